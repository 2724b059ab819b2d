"""Linkage-detection statistics.

Sequential probability ratio test boundaries and runs, the false
discovery rate of a declared linkage, the odds-of-error identity
relating type-1 error and power through the conditional mean likelihood
ratio, an admixture test for locus heterogeneity, expected lod scores
(elods) by enumeration and Monte Carlo, and Kullback-Leibler
information.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    GridMissingNullError,
    SupportMismatchError,
    ZeroPowerRegionError,
    ZeroReplicatesError,
)
from .likelihood import (
    LN10,
    FamilyData,
    IndividualObservation,
    LodCurve,
    ObservedData,
    _golden_section_max,
    pedigree_loglik,
)
from .model import Phenotype, TwoLocusModel
from .pedigree import Pedigree

#: documented presets for the prior probability that a random locus
#: pair is linked
LINKAGE_PRIOR_ONE_IN_20 = 1.0 / 20.0
LINKAGE_PRIOR_ONE_IN_24 = 1.0 / 24.0


# ----------------------------------------------------------------------
# sequential probability ratio test
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SprtConfig:
    """Design of a sequential linkage test: error rates and the
    alternative recombination fraction the lods are computed at.

    The alternative is caller-supplied; adapting it to the amount of
    data is left to the caller.
    """

    alpha: float
    beta: float
    chi_alt: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0 or not 0.0 < self.beta < 1.0:
            raise ValueError("alpha and beta must lie in (0, 1)")
        if self.alpha + self.beta >= 1.0:
            raise ValueError("alpha + beta must be below 1")
        if not 0.0 <= self.chi_alt < 0.5:
            raise ValueError("chi_alt must lie in [0, 0.5)")


@dataclass(frozen=True)
class SprtBoundaries:
    """Base-10 stopping boundaries A = (1-beta)/alpha, B = beta/(1-alpha),
    obtained by ignoring boundary overshoot."""

    log10_a: float
    log10_b: float

    def __post_init__(self):
        if not self.log10_b < 0.0 < self.log10_a:
            raise ValueError("boundaries must satisfy log10B < 0 < log10A")


def sprt_boundaries(cfg: SprtConfig) -> SprtBoundaries:
    """Stopping boundaries for the given error rates."""
    a = (1.0 - cfg.beta) / cfg.alpha
    b = cfg.beta / (1.0 - cfg.alpha)
    return SprtBoundaries(log10_a=math.log10(a), log10_b=math.log10(b))


class SprtOutcome(enum.Enum):
    DECLARE_LINKAGE = "declare_linkage"
    DECLARE_NO_LINKAGE = "declare_no_linkage"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class SprtDecision:
    """Outcome of one sequential run.

    ``step`` is the 1-based index of the family at which the boundary
    was first crossed (None when undecided); ``total`` is the summed lod
    at stopping (or at stream exhaustion).
    """

    outcome: SprtOutcome
    step: int | None
    total: float


def sprt_run(
    lod_stream: Sequence[float], boundaries: SprtBoundaries
) -> SprtDecision:
    """Accumulate per-family lods until a boundary is crossed.

    First crossing of log10A (from below) declares linkage; first
    crossing of log10B declares no linkage; an exhausted stream is
    undecided with the final total.
    """
    total = 0.0
    for step, value in enumerate(lod_stream, start=1):
        total += value
        if total >= boundaries.log10_a:
            return SprtDecision(SprtOutcome.DECLARE_LINKAGE, step, total)
        if total <= boundaries.log10_b:
            return SprtDecision(SprtOutcome.DECLARE_NO_LINKAGE, step, total)
    return SprtDecision(SprtOutcome.UNDECIDED, None, total)


# ----------------------------------------------------------------------
# false discovery rate and the odds-of-error identity
# ----------------------------------------------------------------------


def fdr(alpha: float, prior: float, power: float) -> float:
    """Probability that a declared linkage is false.

    alpha*(1-pi) / (alpha*(1-pi) + pi*W) for prior linkage probability
    pi and average power W; at pi = 1/20 this is 19*alpha/(19*alpha+W).
    """
    for name, value in (("alpha", alpha), ("prior", prior), ("power", power)):
        if not 0.0 < value <= 1.0:
            raise ValueError(f"{name} must lie in (0, 1]")
    false_mass = alpha * (1.0 - prior)
    return false_mass / (false_mass + prior * power)


@dataclass(frozen=True)
class OddsOfErrorReport:
    """alpha, power, and the conditional mean likelihood ratio over the
    critical region; alpha/power equals the conditional mean exactly."""

    alpha: float
    power: float
    conditional_mean_lr: float


def odds_of_error_check(
    f0: Sequence[float], f1: Sequence[float], critical: Sequence[int]
) -> OddsOfErrorReport:
    """Evaluate both sides of the odds-of-error identity on finite models.

    ``critical`` indexes the rejection region.  alpha = P0(C),
    power = P1(C), and the conditional mean of f0/f1 under f1 given C
    equals alpha/power by construction; returning all three lets tests
    assert the identity to machine precision.
    """
    p0 = np.asarray(f0, dtype=float)
    p1 = np.asarray(f1, dtype=float)
    if p0.shape != p1.shape:
        raise ValueError("f0 and f1 must share an outcome set")
    region = np.asarray(sorted(set(int(i) for i in critical)), dtype=int)
    if region.size == 0:
        raise ValueError("critical region is empty")
    alpha = float(p0[region].sum())
    power = float(p1[region].sum())
    if power == 0.0:
        raise ZeroPowerRegionError("critical region has zero alternative mass")
    ratio_terms = [
        (p0[i] / p1[i]) * p1[i] for i in region if p1[i] > 0.0
    ]
    conditional_mean = float(sum(ratio_terms) / power)
    return OddsOfErrorReport(
        alpha=alpha, power=power, conditional_mean_lr=conditional_mean
    )


def kl_information(f0: Sequence[float], f1: Sequence[float]) -> float:
    """Kullback-Leibler information sum f0 * ln(f0/f1), natural-log units.

    Nonnegative; raises ``SupportMismatchError`` where f0 has mass but
    f1 has none.
    """
    p0 = np.asarray(f0, dtype=float)
    p1 = np.asarray(f1, dtype=float)
    if p0.shape != p1.shape:
        raise ValueError("f0 and f1 must share an outcome set")
    total = 0.0
    for a, b in zip(p0, p1):
        if a == 0.0:
            continue
        if b == 0.0:
            raise SupportMismatchError("f0 has mass where f1 has none")
        total += a * math.log(a / b)
    return total


# ----------------------------------------------------------------------
# locus heterogeneity
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class HetTestResult:
    """Admixture test: estimated linked proportion, best chi, and the
    likelihood-ratio statistic 2*ln(mixture max / homogeneous max)."""

    alpha_hat: float
    chi_hat: float
    lr_statistic: float


def heterogeneity_test(curves: Sequence[LodCurve]) -> HetTestResult:
    """Admixture likelihood-ratio test for locus heterogeneity.

    Maximizes sum_f ln(alpha * 10^lod_f(chi) + 1 - alpha) jointly over
    the linked proportion alpha in [0, 1] (golden-section per grid chi,
    with both endpoints evaluated exactly) and chi on the shared grid.
    The homogeneous maximum fixes alpha = 1.  Ties prefer alpha = 1, so
    uninformative inputs report alpha_hat = 1 with a zero statistic.
    """
    if len(curves) < 2:
        raise ValueError("heterogeneity test needs at least two families")
    grid = curves[0].chis
    for curve in curves[1:]:
        if curve.chis != grid:
            raise ValueError("lod curves must share one chi grid")
    if 0.5 not in grid:
        raise GridMissingNullError("chi grid must contain 0.5")
    lods = np.array([curve.lods for curve in curves])
    ratios = np.power(10.0, lods)  # likelihood ratio per family per chi

    best_mixture = -math.inf
    best_alpha = 1.0
    best_chi = 0.5
    best_homog = -math.inf
    best_homog_chi = 0.5
    for j, chi in enumerate(grid):
        r = ratios[:, j]

        def mixture_loglik(a: float) -> float:
            # a family lod of -inf (impossible at this chi) gives ratio 0;
            # the mixture then scores -inf at a = 1, which is correct
            with np.errstate(divide="ignore"):
                return float(np.log(a * r + (1.0 - a)).sum())

        at_one = mixture_loglik(1.0)
        if at_one > best_homog:
            best_homog = at_one
            best_homog_chi = chi
        candidates = [(at_one, 1.0), (mixture_loglik(0.0), 0.0)]
        alpha_opt, val_opt = _golden_section_max(mixture_loglik, 0.0, 1.0, 1e-9)
        candidates.append((val_opt, alpha_opt))
        # prefer alpha = 1 on ties (the candidate list is ordered)
        value, alpha = max(candidates, key=lambda t: t[0])
        if value > best_mixture:
            best_mixture = value
            best_alpha = alpha
            best_chi = chi

    lr = 2.0 * (best_mixture - best_homog)
    if lr <= 0.0 or best_alpha == 1.0:
        # no evidence against homogeneity: report the homogeneous fit
        best_alpha = 1.0
        best_chi = best_homog_chi
    return HetTestResult(
        alpha_hat=float(best_alpha), chi_hat=float(best_chi), lr_statistic=float(lr)
    )


# ----------------------------------------------------------------------
# expected lod scores
# ----------------------------------------------------------------------


class ElodMethod(enum.Enum):
    ENUMERATION = "enumeration"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class ElodResult:
    """Expected base-10 lod; standard error present for Monte Carlo."""

    value: float
    standard_error: float | None
    method: ElodMethod
    replicates: int | None

    def __post_init__(self):
        if (self.method == ElodMethod.MONTE_CARLO) != (
            self.standard_error is not None
        ):
            raise ValueError("standard error is reported iff Monte Carlo")


def _observable_configs(pedigree: Pedigree, model: TwoLocusModel, ids):
    """All (phenotype, marker pair) assignments for the given members."""
    nm = model.marker.n_alleles
    marker_pairs = [(a, b) for a in range(nm) for b in range(a, nm)]
    phenotypes = (Phenotype.AFFECTED, Phenotype.UNAFFECTED)
    per_individual = [
        [(ph, mk) for ph in phenotypes for mk in marker_pairs] for _ in ids
    ]
    return itertools.product(*per_individual)


def data_law(
    pedigree: Pedigree,
    model: TwoLocusModel,
    chi: float,
    *,
    fixed: ObservedData | None = None,
    enumerate_ids: Sequence[str] | None = None,
) -> tuple[list[ObservedData], np.ndarray]:
    """Exact probability law of all observable data configurations.

    Each configuration assigns a phenotype and a full marker genotype to
    every enumerated individual; ``fixed`` observations are held
    constant and the law conditions on them.  Returns the data sets and
    their probabilities (summing to one).
    """
    base = fixed if fixed is not None else ObservedData.empty()
    if enumerate_ids is None:
        ids = [ind.id for ind in pedigree.individuals if ind.id not in base.records]
    else:
        ids = [str(i) for i in enumerate_ids]
    ll_fixed = pedigree_loglik(pedigree, model, base, chi)
    if math.isinf(ll_fixed):
        raise ValueError("fixed observations are impossible under the model")
    datasets: list[ObservedData] = []
    logprobs: list[float] = []
    for config in _observable_configs(pedigree, model, ids):
        records = dict(base.records)
        for iid, (ph, mk) in zip(ids, config):
            records[iid] = IndividualObservation(phenotype=ph, marker=mk)
        candidate = ObservedData(records=records)
        ll = pedigree_loglik(pedigree, model, candidate, chi)
        if math.isinf(ll):
            continue
        datasets.append(candidate)
        logprobs.append(ll - ll_fixed)
    probs = np.exp(np.array(logprobs))
    return datasets, probs


def elod_enumerate(
    pedigree: Pedigree,
    model: TwoLocusModel,
    chi_true: float,
    chi_eval: float,
    *,
    fixed: ObservedData | None = None,
    enumerate_ids: Sequence[str] | None = None,
) -> ElodResult:
    """Expected lod by exhaustive enumeration of data configurations.

    Sums P(data | chi_true) * lod(data at chi_eval) over every
    observable configuration, pruning configurations of zero
    probability.  ``fixed`` observations (optional) are conditioned on,
    which lets a caller isolate the contribution of chosen meioses; the
    reported value is then the expected lod of the complete data set
    given the fixed part.
    """
    datasets, probs = data_law(
        pedigree, model, chi_true, fixed=fixed, enumerate_ids=enumerate_ids
    )
    total = 0.0
    for dataset, prob in zip(datasets, probs):
        if prob == 0.0:
            continue
        ll_eval = pedigree_loglik(pedigree, model, dataset, chi_eval)
        ll_null = pedigree_loglik(pedigree, model, dataset, 0.5)
        total += prob * (ll_eval - ll_null) / LN10
    return ElodResult(
        value=float(total),
        standard_error=None,
        method=ElodMethod.ENUMERATION,
        replicates=None,
    )


def elod_monte_carlo(
    pedigree: Pedigree,
    model: TwoLocusModel,
    chi_true: float,
    chi_eval: float,
    replicates: int,
    seed: int,
) -> ElodResult:
    """Expected lod estimated over gene-drop simulated data sets.

    Deterministic given the seed; each replicate draws from an
    independent sub-stream so evaluation order cannot matter.
    """
    from .sim import SimConfig, gene_drop  # local import to avoid a cycle

    if replicates < 1:
        raise ZeroReplicatesError("Monte Carlo elod needs at least one replicate")
    cfg = SimConfig(chi_true=chi_true, replicates=replicates, seed=seed)
    values = np.empty(replicates)
    for r in range(replicates):
        data = gene_drop(pedigree, model, cfg, r)
        ll_eval = pedigree_loglik(pedigree, model, data, chi_eval)
        ll_null = pedigree_loglik(pedigree, model, data, 0.5)
        values[r] = (ll_eval - ll_null) / LN10
    mean = float(values.mean())
    if replicates > 1:
        se = float(values.std(ddof=1) / math.sqrt(replicates))
    else:
        se = 0.0
    return ElodResult(
        value=mean,
        standard_error=se,
        method=ElodMethod.MONTE_CARLO,
        replicates=replicates,
    )
