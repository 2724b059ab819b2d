"""Exact pedigree likelihoods, lod scores, and efficient scores.

Two evaluation routes are kept deliberately independent:

  - ``pedigree_loglik`` peels nuclear families along a ``PeelingOrder``,
    accumulating in natural-log domain with log-sum-exp, and
  - ``brute_force_loglik`` materializes the full joint table over all
    phased-genotype assignments (restricted to per-individual states of
    nonzero local probability) and sums it.

They must agree to 1e-10 relative on every loop-free pedigree small
enough to enumerate; the bundled corpus and the ``check`` CLI command
assert exactly that.

Lods are base-10 and additive over independent families.  A likelihood
of exactly zero (Mendelian inconsistency) is reported as ``-inf``; the
lod and posterior operations raise ``InconsistentDataError`` when the
data are impossible under the model at the null.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .errors import (
    GridMissingNullError,
    InconsistentDataError,
    LoopDetectedError,
    NullProbabilityZeroError,
    TooLargeToEnumerateError,
)
from .model import PhasedGenotype, Phenotype, TwoLocusModel
from .pedigree import Pedigree, PeelingOrder, peeling_order

LN10 = math.log(10.0)
NEG_INF = float("-inf")

#: default guards for the enumeration oracle
MAX_ENUMERATION_INDIVIDUALS = 8
MAX_ENUMERATION_STATES = 60_000_000


def logsumexp(arr: np.ndarray, axis=None):
    """log(sum(exp(arr))) along an axis, stable against underflow and
    exact on all-(-inf) slices (they stay -inf)."""
    arr = np.asarray(arr)
    if axis is None:
        m = float(arr.max()) if arr.size else NEG_INF
        if not math.isfinite(m):
            return m  # all -inf (or empty): the sum is zero
        return m + math.log(float(np.exp(arr - m).sum()))
    m = arr.max(axis=axis)
    shifted = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        out = np.log(np.exp(arr - np.expand_dims(shifted, axis)).sum(axis=axis))
    return out + shifted


# ----------------------------------------------------------------------
# observed data
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class IndividualObservation:
    """Phenotype plus an optional unordered marker genotype."""

    phenotype: Phenotype = Phenotype.UNKNOWN
    marker: tuple[int, int] | None = None

    def __post_init__(self):
        object.__setattr__(self, "phenotype", Phenotype(self.phenotype))
        if self.marker is not None:
            a, b = self.marker
            pair = (int(a), int(b)) if a <= b else (int(b), int(a))
            object.__setattr__(self, "marker", pair)


UNOBSERVED = IndividualObservation()


@dataclass(frozen=True)
class ObservedData:
    """Per-individual observations for one pedigree.

    Individuals without a record are treated as fully unknown, so an
    empty mapping means "no data".
    """

    records: Mapping[str, IndividualObservation]

    def __post_init__(self):
        object.__setattr__(
            self, "records", {str(k): v for k, v in dict(self.records).items()}
        )

    @classmethod
    def empty(cls) -> "ObservedData":
        return cls(records={})

    def observation(self, individual_id: str) -> IndividualObservation:
        return self.records.get(str(individual_id), UNOBSERVED)

    def with_record(
        self, individual_id: str, observation: IndividualObservation
    ) -> "ObservedData":
        records = dict(self.records)
        records[str(individual_id)] = observation
        return ObservedData(records=records)


# ----------------------------------------------------------------------
# cached model tensors
# ----------------------------------------------------------------------

_TRANSMISSION_CACHE: dict[tuple, np.ndarray] = {}
_CHILD_TENSOR_CACHE: dict[tuple, np.ndarray] = {}
_PRIOR_CACHE: dict[tuple, np.ndarray] = {}
_MARKER_PAIR_CACHE: dict[tuple, np.ndarray] = {}
_PENETRANCE_CACHE: dict[tuple, np.ndarray] = {}


def _transmission_matrix(nt: int, nm: int, chi: float) -> np.ndarray:
    """(S, H) matrix of gamete probabilities per parent genotype."""
    key = (nt, nm, float(chi))
    cached = _TRANSMISSION_CACHE.get(key)
    if cached is not None:
        return cached
    n_hap = nt * nm
    n_geno = n_hap * n_hap
    mat = np.zeros((n_geno, n_hap))
    parental = (1.0 - chi) / 2.0
    recombinant = chi / 2.0
    for g in range(n_geno):
        hp, hm = divmod(g, n_hap)
        tp, mp = divmod(hp, nm)
        tm, mm = divmod(hm, nm)
        mat[g, tp * nm + mp] += parental
        mat[g, tm * nm + mm] += parental
        mat[g, tp * nm + mm] += recombinant
        mat[g, tm * nm + mp] += recombinant
    mat.setflags(write=False)
    _TRANSMISSION_CACHE[key] = mat
    return mat


def _log_child_tensor(nt: int, nm: int, chi: float) -> np.ndarray:
    """(S, S, S) log P(child genotype | father, mother genotypes)."""
    key = (nt, nm, float(chi))
    cached = _CHILD_TENSOR_CACHE.get(key)
    if cached is not None:
        return cached
    t1 = _transmission_matrix(nt, nm, chi)
    n_hap = nt * nm
    n_geno = n_hap * n_hap
    pat = np.arange(n_geno) // n_hap
    mat = np.arange(n_geno) % n_hap
    tensor = t1[:, pat][:, None, :] * t1[:, mat][None, :, :]
    with np.errstate(divide="ignore"):
        log_tensor = np.log(tensor)
    log_tensor.setflags(write=False)
    _CHILD_TENSOR_CACHE[key] = log_tensor
    return log_tensor


def _founder_prior_vector(model: TwoLocusModel) -> np.ndarray:
    key = (model.trait.frequencies, model.marker.frequencies)
    cached = _PRIOR_CACHE.get(key)
    if cached is not None:
        return cached
    nt, nm = model.trait.n_alleles, model.marker.n_alleles
    hap = np.outer(model.trait.frequencies, model.marker.frequencies).ravel()
    vec = np.outer(hap, hap).ravel()
    vec.setflags(write=False)
    _PRIOR_CACHE[key] = vec
    return vec


def _marker_pair_arrays(nt: int, nm: int) -> np.ndarray:
    """(S, 2) sorted marker allele pair per phased genotype."""
    key = (nt, nm)
    cached = _MARKER_PAIR_CACHE.get(key)
    if cached is not None:
        return cached
    n_hap = nt * nm
    n_geno = n_hap * n_hap
    pat_marker = (np.arange(n_geno) // n_hap) % nm
    mat_marker = (np.arange(n_geno) % n_hap) % nm
    pairs = np.stack(
        [np.minimum(pat_marker, mat_marker), np.maximum(pat_marker, mat_marker)],
        axis=1,
    )
    pairs.setflags(write=False)
    _MARKER_PAIR_CACHE[key] = pairs
    return pairs


def _affected_prob_vector(model: TwoLocusModel) -> np.ndarray:
    key = (model.trait.n_alleles, model.marker.n_alleles, model.penetrance.table)
    cached = _PENETRANCE_CACHE.get(key)
    if cached is not None:
        return cached
    nt, nm = model.trait.n_alleles, model.marker.n_alleles
    n_hap = nt * nm
    n_geno = n_hap * n_hap
    pat_trait = (np.arange(n_geno) // n_hap) // nm
    mat_trait = (np.arange(n_geno) % n_hap) // nm
    vec = np.array(
        [
            model.penetrance.affected_prob((int(a), int(b)))
            for a, b in zip(pat_trait, mat_trait)
        ]
    )
    vec.setflags(write=False)
    _PENETRANCE_CACHE[key] = vec
    return vec


def _evidence_vectors(
    pedigree: Pedigree, model: TwoLocusModel, data: ObservedData
) -> dict[str, np.ndarray]:
    """Linear-domain local evidence per individual.

    prior (founders only) x P(phenotype | genotype) x marker indicator.
    """
    prior = _founder_prior_vector(model)
    affected = _affected_prob_vector(model)
    pairs = _marker_pair_arrays(model.trait.n_alleles, model.marker.n_alleles)
    out: dict[str, np.ndarray] = {}
    for ind in pedigree.individuals:
        obs = data.observation(ind.id)
        vec = prior.copy() if ind.is_founder else np.ones_like(prior)
        if obs.phenotype == Phenotype.AFFECTED:
            vec = vec * affected
        elif obs.phenotype == Phenotype.UNAFFECTED:
            vec = vec * (1.0 - affected)
        if obs.marker is not None:
            a, b = obs.marker
            if not (0 <= a < model.marker.n_alleles and 0 <= b < model.marker.n_alleles):
                raise InconsistentDataError(
                    f"individual {ind.id!r}: marker allele out of range"
                )
            vec = vec * ((pairs[:, 0] == a) & (pairs[:, 1] == b))
        out[ind.id] = vec
    return out


# ----------------------------------------------------------------------
# peeling engine
# ----------------------------------------------------------------------


def _family_contract(
    log_t2: np.ndarray,
    log_father: np.ndarray | None,
    log_mother: np.ndarray | None,
    child_logs: Sequence[np.ndarray],
    target: tuple[str, int] | None,
):
    """Contract one nuclear family factor down to one member (or fully).

    ``child_logs`` hold log inputs for every child EXCEPT a child
    target.  ``target`` is ('father', 0), ('mother', 0), ('child', g) to
    return a log vector over that member's genotypes, or None for the
    fully summed log scalar.
    """
    n_geno = log_t2.shape[0]
    table = np.zeros((n_geno, n_geno))
    if log_father is not None:
        table += log_father[:, None]
    if log_mother is not None:
        table += log_mother[None, :]
    if child_logs:
        stacked = log_t2[None, :, :, :] + np.stack(child_logs)[:, None, None, :]
        table += logsumexp(stacked, axis=3).sum(axis=0)
    if target is None:
        return float(logsumexp(table))
    kind = target[0]
    if kind == "father":
        return logsumexp(table, axis=1)
    if kind == "mother":
        return logsumexp(table, axis=0)
    # child: bring the transmission factor back in for the target child
    stacked = table[:, :, None] + log_t2
    return logsumexp(stacked.reshape(n_geno * n_geno, n_geno), axis=0)


def _peel_loglik(
    pedigree: Pedigree,
    model: TwoLocusModel,
    data: ObservedData,
    chi: float,
    order: PeelingOrder,
) -> float:
    log_t2 = _log_child_tensor(model.trait.n_alleles, model.marker.n_alleles, chi)
    with np.errstate(divide="ignore"):
        log_ev = {
            iid: np.log(vec) for iid, vec in _evidence_vectors(pedigree, model, data).items()
        }
    total = 0.0
    for step in order.steps:
        fam, pivot = step.family, step.pivot
        child_logs = [log_ev[c] for c in fam.children if c != pivot]
        log_f = None if pivot == fam.father else log_ev[fam.father]
        log_m = None if pivot == fam.mother else log_ev[fam.mother]
        if pivot is None:
            total += _family_contract(log_t2, log_f, log_m, child_logs, None)
        elif pivot == fam.father:
            msg = _family_contract(log_t2, log_f, log_m, child_logs, ("father", 0))
            log_ev[pivot] = log_ev[pivot] + msg
        elif pivot == fam.mother:
            msg = _family_contract(log_t2, log_f, log_m, child_logs, ("mother", 0))
            log_ev[pivot] = log_ev[pivot] + msg
        else:
            msg = _family_contract(log_t2, log_f, log_m, child_logs, ("child", 0))
            log_ev[pivot] = log_ev[pivot] + msg
    for iid in order.isolated:
        total += float(logsumexp(log_ev[iid]))
    return total


def pedigree_loglik(
    pedigree: Pedigree,
    model: TwoLocusModel,
    data: ObservedData,
    chi: float,
    *,
    method: str = "auto",
) -> float:
    """Natural-log likelihood of the observed data on one pedigree.

    Sums over all joint phased-genotype configurations the product of
    founder priors, transmissions at recombination fraction ``chi``,
    penetrances, and marker-observation indicators.  Uses the peeling
    recursion when the pedigree is loop-free, enumeration otherwise
    (``method`` forces one route: 'peel' | 'enumerate' | 'auto').

    Mendelian-inconsistent data have likelihood zero and return ``-inf``
    (check with ``math.isinf``); no exception is raised here.

    ``chi`` may exceed 0.5 (up to 1.0) to support numeric derivative
    checks at the null; lod-level operations enforce chi in [0, 0.5].
    """
    if not 0.0 <= chi <= 1.0:
        raise ValueError(f"chi {chi!r} not in [0, 1]")
    if method not in ("auto", "peel", "enumerate"):
        raise ValueError(f"unknown method {method!r}")
    if method == "enumerate":
        return brute_force_loglik(pedigree, model, data, chi)
    try:
        order = peeling_order(pedigree)
    except LoopDetectedError:
        if method == "peel":
            raise
        return brute_force_loglik(pedigree, model, data, chi)
    return _peel_loglik(pedigree, model, data, chi, order)


# ----------------------------------------------------------------------
# enumeration oracle
# ----------------------------------------------------------------------


def brute_force_loglik(
    pedigree: Pedigree,
    model: TwoLocusModel,
    data: ObservedData,
    chi: float,
    *,
    max_individuals: int = MAX_ENUMERATION_INDIVIDUALS,
    max_states: int = MAX_ENUMERATION_STATES,
) -> float:
    """Log likelihood by explicit summation over all joint assignments.

    Builds the full joint probability table over per-individual states
    (pruned to states of nonzero local probability) and sums it; no
    elimination ordering is used, so the result is independent of the
    peeling route.  Guarded by ``max_individuals`` and by the total
    pruned state count.
    """
    if len(pedigree) > max_individuals:
        raise TooLargeToEnumerateError(
            f"{len(pedigree)} individuals exceed the guard of {max_individuals}"
        )
    if not 0.0 <= chi <= 1.0:
        raise ValueError(f"chi {chi!r} not in [0, 1]")
    evidence = _evidence_vectors(pedigree, model, data)
    supports: dict[str, np.ndarray] = {}
    for iid, vec in evidence.items():
        sup = np.flatnonzero(vec > 0.0)
        if sup.size == 0:
            return NEG_INF
        supports[iid] = sup
    total_states = 1
    for sup in supports.values():
        total_states *= sup.size
        if total_states > max_states:
            raise TooLargeToEnumerateError(
                f"joint state space exceeds {max_states} states"
            )
    ids = [ind.id for ind in pedigree.individuals]
    axis_of = {iid: k for k, iid in enumerate(ids)}
    shape = tuple(supports[iid].size for iid in ids)
    n = len(ids)

    joint = np.ones(shape)
    for iid in ids:
        view = [1] * n
        view[axis_of[iid]] = shape[axis_of[iid]]
        joint *= evidence[iid][supports[iid]].reshape(view)

    t1 = _transmission_matrix(model.trait.n_alleles, model.marker.n_alleles, chi)
    n_hap = model.trait.n_alleles * model.marker.n_alleles
    geno = np.arange(model.n_genotypes)
    pat_hap, mat_hap = geno // n_hap, geno % n_hap
    for ind in pedigree.individuals:
        if ind.is_founder:
            continue
        sup_c = supports[ind.id]
        sup_f = supports[ind.father]
        sup_m = supports[ind.mother]
        trans = (
            t1[np.ix_(sup_f, pat_hap[sup_c])][:, None, :]
            * t1[np.ix_(sup_m, mat_hap[sup_c])][None, :, :]
        )
        axes = [axis_of[ind.father], axis_of[ind.mother], axis_of[ind.id]]
        perm = np.argsort(axes)
        trans = np.transpose(trans, perm)
        view = [1] * n
        for k, ax in enumerate(sorted(axes)):
            view[ax] = trans.shape[k]
        joint *= trans.reshape(view)

    likelihood = float(joint.sum())
    return math.log(likelihood) if likelihood > 0.0 else NEG_INF


# ----------------------------------------------------------------------
# lod scores
# ----------------------------------------------------------------------

FamilyData = tuple[Pedigree, ObservedData]


def _null_loglik(family: FamilyData, model: TwoLocusModel) -> float:
    pedigree, data = family
    ll = pedigree_loglik(pedigree, model, data, 0.5)
    if math.isinf(ll):
        raise InconsistentDataError(
            f"family {pedigree.family_id!r}: data impossible under the model"
        )
    return ll


def lod(families: Sequence[FamilyData], model: TwoLocusModel, chi: float) -> float:
    """Base-10 lod score summed over independent families.

    lod(chi) = sum over families of log10 L(chi) - log10 L(1/2).  Raises
    ``InconsistentDataError`` when any family's data are impossible under
    the model (zero likelihood at the null); a value of ``-inf`` is
    possible at chi = 0 when the data require a recombination event.
    """
    if not 0.0 <= chi <= 0.5:
        raise ValueError(f"chi {chi!r} not in [0, 0.5]")
    total = 0.0
    for family in families:
        pedigree, data = family
        ll_null = _null_loglik(family, model)
        ll = pedigree_loglik(pedigree, model, data, chi)
        total += (ll - ll_null) / LN10
    return total


@dataclass(frozen=True)
class LodCurve:
    """Base-10 lod evaluated over an increasing chi grid ending at 0.5.

    The point (0.5, 0) is always present and exact.
    """

    chis: tuple[float, ...]
    lods: tuple[float, ...]

    def __post_init__(self):
        chis = tuple(float(c) for c in self.chis)
        lods = tuple(float(v) for v in self.lods)
        object.__setattr__(self, "chis", chis)
        object.__setattr__(self, "lods", lods)
        if len(chis) != len(lods):
            raise ValueError("chi and lod sequences differ in length")
        if any(b <= a for a, b in zip(chis, chis[1:])):
            raise ValueError("chi grid must be strictly increasing")
        if chis and (chis[0] < 0.0 or chis[-1] > 0.5):
            raise ValueError("chi grid must lie in [0, 0.5]")
        if not chis or chis[-1] != 0.5:
            raise GridMissingNullError("lod curve must contain chi = 0.5")
        if lods[-1] != 0.0:
            raise ValueError("lod at chi = 0.5 must be exactly 0")

    @property
    def max_lod(self) -> float:
        return max(self.lods)

    @property
    def argmax_chi(self) -> float:
        return self.chis[int(np.argmax(self.lods))]


def default_chi_grid(step: float = 0.01) -> tuple[float, ...]:
    """Evenly spaced grid on [0, 0.5] containing 0.5 exactly."""
    n = round(0.5 / step)
    if n < 1 or abs(n * step - 0.5) > 1e-9:
        raise ValueError(f"step {step!r} does not divide [0, 0.5]")
    pts = [k * 0.5 / n for k in range(n + 1)]
    pts[-1] = 0.5
    return tuple(pts)


def lod_curve(
    families: Sequence[FamilyData],
    model: TwoLocusModel,
    chis: Sequence[float] | None = None,
) -> LodCurve:
    """Summed lod curve over a chi grid (default 0:0.01:0.5)."""
    grid = tuple(chis) if chis is not None else default_chi_grid()
    if 0.5 not in grid:
        raise GridMissingNullError("chi grid must contain 0.5")
    nulls = [_null_loglik(fam, model) for fam in families]
    lods = []
    for chi in grid:
        if chi == 0.5:
            total = sum(
                (pedigree_loglik(p, model, d, 0.5) - ll0) / LN10
                for (p, d), ll0 in zip(families, nulls)
            )
        else:
            total = sum(
                (pedigree_loglik(p, model, d, chi) - ll0) / LN10
                for (p, d), ll0 in zip(families, nulls)
            )
        lods.append(total)
    return LodCurve(chis=grid, lods=tuple(lods))


class MleEstimate(NamedTuple):
    """MLE of the recombination fraction with its maximized lod.

    ``flat`` marks a likelihood carrying no linkage information
    (max lod below 1e-12); chi_hat is then reported as 0.5.
    """

    chi_hat: float
    max_lod: float
    flat: bool


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_section_max(f, lo: float, hi: float, tol: float):
    """Golden-section maximization; returns (x, f(x)) at the midpoint."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = (a + b) / 2.0
    return x, f(x)


def mle_recombination(
    families: Sequence[FamilyData],
    model: TwoLocusModel,
    *,
    grid_points: int = 512,
    tol: float = 1e-6,
) -> MleEstimate:
    """Maximize the summed lod over chi in [0, 0.5].

    A coarse ``grid_points``-point scan brackets the global maximum and
    golden-section search refines the bracket to width ``tol``.  The
    boundary chi = 0 is a legal maximizer.  A flat likelihood (max lod
    below 1e-12) reports chi_hat = 0.5 with the ``flat`` flag set.
    """
    nulls = [_null_loglik(fam, model) for fam in families]

    def objective(chi: float) -> float:
        return sum(
            (pedigree_loglik(p, model, d, chi) - ll0) / LN10
            for (p, d), ll0 in zip(families, nulls)
        )

    grid = np.linspace(0.0, 0.5, grid_points)
    values = np.array([objective(c) for c in grid])
    best = int(np.argmax(values))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid_points - 1)]
    mid, f_mid = _golden_section_max(objective, lo, hi, tol)
    candidates = [(f_mid, mid), (objective(lo), lo), (objective(hi), hi)]
    # prefer the smaller chi on ties so exact boundary maxima are reported
    candidates.sort(key=lambda t: (-t[0], t[1]))
    max_lod, chi_hat = candidates[0]
    if max_lod < 1e-12:
        return MleEstimate(chi_hat=0.5, max_lod=0.0, flat=True)
    return MleEstimate(chi_hat=float(chi_hat), max_lod=float(max_lod), flat=False)


# ----------------------------------------------------------------------
# efficient scores
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class ScoreCategory:
    """One multinomial category: its null probability, its probability
    as a function of eta = 1 - 2*chi, and optionally the analytic
    derivative at eta = 0 (preferred over finite differences)."""

    null_prob: float
    prob: Callable[[float], float]
    null_derivative: float | None = None


@dataclass(frozen=True)
class ScoreReport:
    """Efficient score at the null with its information.

    ``category_scores`` are the per-category values a_i = p_i'(0)/p_i(0);
    ``score`` = sum a_i x_i; ``information`` = N * sum p_i a_i^2.
    """

    score: float
    information: float
    category_scores: tuple[float, ...]
    n_observations: int

    @property
    def information_per_observation(self) -> float:
        if self.n_observations == 0:
            return 0.0
        return self.information / self.n_observations


def finney_score(
    categories: Sequence[ScoreCategory],
    counts: Sequence[int],
    *,
    fd_step: float = 1e-5,
) -> ScoreReport:
    """Efficient score and information for multinomial data at eta = 0.

    Per-category scores come from the analytic derivative when provided,
    otherwise from a central finite difference with step ``fd_step``.
    Raises ``NullProbabilityZeroError`` when a category with zero null
    probability has observations.
    """
    if len(categories) != len(counts):
        raise ValueError("counts do not align with categories")
    total_null = sum(cat.null_prob for cat in categories)
    if abs(total_null - 1.0) > 1e-9:
        raise ValueError(f"null probabilities sum to {total_null!r}, not 1")
    if any(x < 0 for x in counts):
        raise ValueError("counts must be nonnegative")
    scores = []
    for k, cat in enumerate(categories):
        if cat.null_prob == 0.0:
            if counts[k] > 0:
                raise NullProbabilityZeroError(
                    f"category {k} has null probability 0 but {counts[k]} observations"
                )
            scores.append(0.0)
            continue
        if cat.null_derivative is not None:
            deriv = cat.null_derivative
        else:
            deriv = (cat.prob(fd_step) - cat.prob(-fd_step)) / (2.0 * fd_step)
        scores.append(deriv / cat.null_prob)
    n_obs = int(sum(counts))
    score = sum(a * x for a, x in zip(scores, counts))
    info_per_obs = sum(
        cat.null_prob * a * a for cat, a in zip(categories, scores)
    )
    return ScoreReport(
        score=float(score),
        information=float(n_obs * info_per_obs),
        category_scores=tuple(scores),
        n_observations=n_obs,
    )


# ----------------------------------------------------------------------
# joint posterior sampling (upward peel, downward sample)
# ----------------------------------------------------------------------


def _sample_from_log(rng: np.random.Generator, log_weights: np.ndarray) -> int:
    norm = logsumexp(log_weights)
    if math.isinf(norm):
        raise InconsistentDataError("conditioning data are impossible under the model")
    probs = np.exp(log_weights - norm)
    probs = probs / probs.sum()
    return int(rng.choice(probs.size, p=probs))


def sample_joint_genotypes(
    pedigree: Pedigree,
    model: TwoLocusModel,
    data: ObservedData,
    chi: float,
    rng: np.random.Generator,
) -> dict[str, int]:
    """One exact draw from the joint posterior of all phased genotypes
    given the observations in ``data``.

    Peels upward recording each family's member states at elimination
    time, then samples downward: the final family of each component is
    drawn jointly, and every earlier family is drawn conditional on its
    already-sampled pivot.  With no observations this reduces to a plain
    gene drop.  Looped pedigrees fall back to sampling the enumerated
    joint table.
    """
    try:
        order = peeling_order(pedigree)
    except LoopDetectedError:
        return _sample_by_enumeration(pedigree, model, data, chi, rng)
    log_t2 = _log_child_tensor(model.trait.n_alleles, model.marker.n_alleles, chi)
    with np.errstate(divide="ignore"):
        log_ev = {
            iid: np.log(vec)
            for iid, vec in _evidence_vectors(pedigree, model, data).items()
        }
    snapshots = []
    for step in order.steps:
        fam, pivot = step.family, step.pivot
        snapshots.append(
            (step, {m: log_ev[m] for m in fam.members if m != pivot})
        )
        child_logs = [log_ev[c] for c in fam.children if c != pivot]
        log_f = None if pivot == fam.father else log_ev[fam.father]
        log_m = None if pivot == fam.mother else log_ev[fam.mother]
        if pivot is None:
            continue
        if pivot == fam.father:
            msg = _family_contract(log_t2, log_f, log_m, child_logs, ("father", 0))
        elif pivot == fam.mother:
            msg = _family_contract(log_t2, log_f, log_m, child_logs, ("mother", 0))
        else:
            msg = _family_contract(log_t2, log_f, log_m, child_logs, ("child", 0))
        log_ev[pivot] = log_ev[pivot] + msg

    def child_term(log_child: np.ndarray) -> np.ndarray:
        return logsumexp(log_t2 + log_child[None, None, :], axis=2)

    genotypes: dict[str, int] = {}
    for step, snap in reversed(snapshots):
        fam, pivot = step.family, step.pivot
        free_children = [c for c in fam.children if c != pivot]
        if pivot is None or pivot in (fam.father, fam.mother):
            table = np.zeros_like(log_t2[:, :, 0])
            if pivot != fam.father:
                table = table + snap[fam.father][:, None]
            if pivot != fam.mother:
                table = table + snap[fam.mother][None, :]
            for c in free_children:
                table = table + child_term(snap[c])
            if pivot == fam.father:
                g_f = genotypes[fam.father]
                g_m = _sample_from_log(rng, table[g_f, :])
            elif pivot == fam.mother:
                g_m = genotypes[fam.mother]
                g_f = _sample_from_log(rng, table[:, g_m])
            else:
                g_f = _sample_from_log(rng, logsumexp(table, axis=1))
                g_m = _sample_from_log(rng, table[g_f, :])
        else:
            g_pivot = genotypes[pivot]
            table = snap[fam.father][:, None] + snap[fam.mother][None, :]
            for c in free_children:
                table = table + child_term(snap[c])
            table = table + log_t2[:, :, g_pivot]
            g_f = _sample_from_log(rng, logsumexp(table, axis=1))
            g_m = _sample_from_log(rng, table[g_f, :])
        genotypes[fam.father] = g_f
        genotypes[fam.mother] = g_m
        for c in free_children:
            genotypes[c] = _sample_from_log(
                rng, log_t2[g_f, g_m, :] + snap[c]
            )
    for iid in order.isolated:
        genotypes[iid] = _sample_from_log(rng, log_ev[iid])
    return genotypes


def _sample_by_enumeration(
    pedigree: Pedigree,
    model: TwoLocusModel,
    data: ObservedData,
    chi: float,
    rng: np.random.Generator,
) -> dict[str, int]:
    evidence = _evidence_vectors(pedigree, model, data)
    supports = {iid: np.flatnonzero(v > 0.0) for iid, v in evidence.items()}
    if any(s.size == 0 for s in supports.values()):
        raise InconsistentDataError("conditioning data are impossible under the model")
    joint = _joint_table(pedigree, model, evidence, supports, chi)
    total = joint.sum()
    if total <= 0.0:
        raise InconsistentDataError("conditioning data are impossible under the model")
    flat = (joint / total).ravel()
    index = int(rng.choice(flat.size, p=flat / flat.sum()))
    ids = [ind.id for ind in pedigree.individuals]
    multi = np.unravel_index(index, joint.shape)
    return {iid: int(supports[iid][k]) for iid, k in zip(ids, multi)}


# ----------------------------------------------------------------------
# genotype posteriors (upward + downward passes)
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class GenotypePosteriors:
    """Exact per-individual phased-genotype posteriors given all data.

    ``loglik`` is the normalizing log likelihood; it equals
    ``pedigree_loglik`` by construction of the two passes.
    """

    marginals: dict[str, dict[PhasedGenotype, float]]
    loglik: float


def posterior_genotypes(
    pedigree: Pedigree,
    model: TwoLocusModel,
    data: ObservedData,
    chi: float,
) -> GenotypePosteriors:
    """Marginal posterior of every individual's phased genotype.

    Loop-free pedigrees use one upward and one downward message pass
    over the nuclear-family tree; looped pedigrees fall back to the
    enumeration table.  Raises ``InconsistentDataError`` when the data
    have zero likelihood.
    """
    try:
        order = peeling_order(pedigree)
    except LoopDetectedError:
        return _posterior_by_enumeration(pedigree, model, data, chi)
    del order
    return _posterior_two_pass(pedigree, model, data, chi)


def _log_marginals_to_posteriors(
    pedigree: Pedigree, model: TwoLocusModel, log_marginals: dict[str, np.ndarray]
) -> GenotypePosteriors:
    genotypes = list(model.phased_genotypes())
    loglik = None
    marginals: dict[str, dict[PhasedGenotype, float]] = {}
    for ind in pedigree.individuals:
        logm = log_marginals[ind.id]
        norm = float(logsumexp(logm))
        if math.isinf(norm):
            raise InconsistentDataError(
                f"family {pedigree.family_id!r}: data impossible under the model"
            )
        if loglik is None:
            loglik = norm
        probs = np.exp(logm - norm)
        marginals[ind.id] = {g: float(p) for g, p in zip(genotypes, probs)}
    return GenotypePosteriors(marginals=marginals, loglik=float(loglik))


def _posterior_by_enumeration(
    pedigree: Pedigree, model: TwoLocusModel, data: ObservedData, chi: float
) -> GenotypePosteriors:
    evidence = _evidence_vectors(pedigree, model, data)
    supports = {iid: np.flatnonzero(v > 0.0) for iid, v in evidence.items()}
    if any(s.size == 0 for s in supports.values()):
        raise InconsistentDataError(
            f"family {pedigree.family_id!r}: data impossible under the model"
        )
    ids = [ind.id for ind in pedigree.individuals]
    # reuse the oracle's joint table construction
    joint = _joint_table(pedigree, model, evidence, supports, chi)
    total = float(joint.sum())
    if total <= 0.0:
        raise InconsistentDataError(
            f"family {pedigree.family_id!r}: data impossible under the model"
        )
    log_marginals = {}
    n = len(ids)
    for k, iid in enumerate(ids):
        axes = tuple(a for a in range(n) if a != k)
        marg = joint.sum(axis=axes)
        full = np.zeros(model.n_genotypes)
        full[supports[iid]] = marg
        with np.errstate(divide="ignore"):
            log_marginals[iid] = np.log(full)
    return _log_marginals_to_posteriors(pedigree, model, log_marginals)


def _joint_table(pedigree, model, evidence, supports, chi):
    ids = [ind.id for ind in pedigree.individuals]
    if len(pedigree) > MAX_ENUMERATION_INDIVIDUALS:
        raise TooLargeToEnumerateError(
            f"{len(pedigree)} individuals exceed the guard of "
            f"{MAX_ENUMERATION_INDIVIDUALS}"
        )
    total_states = 1
    for sup in supports.values():
        total_states *= sup.size
        if total_states > MAX_ENUMERATION_STATES:
            raise TooLargeToEnumerateError(
                f"joint state space exceeds {MAX_ENUMERATION_STATES} states"
            )
    axis_of = {iid: k for k, iid in enumerate(ids)}
    n = len(ids)
    shape = tuple(supports[iid].size for iid in ids)
    joint = np.ones(shape)
    for iid in ids:
        view = [1] * n
        view[axis_of[iid]] = shape[axis_of[iid]]
        joint *= evidence[iid][supports[iid]].reshape(view)
    t1 = _transmission_matrix(model.trait.n_alleles, model.marker.n_alleles, chi)
    n_hap = model.n_haplotypes
    geno = np.arange(model.n_genotypes)
    pat_hap, mat_hap = geno // n_hap, geno % n_hap
    for ind in pedigree.individuals:
        if ind.is_founder:
            continue
        sup_c = supports[ind.id]
        trans = (
            t1[np.ix_(supports[ind.father], pat_hap[sup_c])][:, None, :]
            * t1[np.ix_(supports[ind.mother], mat_hap[sup_c])][None, :, :]
        )
        axes = [axis_of[ind.father], axis_of[ind.mother], axis_of[ind.id]]
        perm = np.argsort(axes)
        trans = np.transpose(trans, perm)
        view = [1] * n
        for k, ax in enumerate(sorted(axes)):
            view[ax] = trans.shape[k]
        joint *= trans.reshape(view)
    return joint


def _posterior_two_pass(
    pedigree: Pedigree, model: TwoLocusModel, data: ObservedData, chi: float
) -> GenotypePosteriors:
    """Sum-product on the bipartite (individual, nuclear-family) tree."""
    log_t2 = _log_child_tensor(model.trait.n_alleles, model.marker.n_alleles, chi)
    with np.errstate(divide="ignore"):
        log_ev = {
            iid: np.log(vec)
            for iid, vec in _evidence_vectors(pedigree, model, data).items()
        }
    families = list(pedigree.nuclear_families)
    fam_members = {k: fam.members for k, fam in enumerate(families)}
    var_fams: dict[str, list[int]] = {}
    for k, fam in enumerate(families):
        for member in fam.members:
            var_fams.setdefault(member, []).append(k)

    # messages keyed by directed edge
    to_fam: dict[tuple[str, int], np.ndarray] = {}
    to_var: dict[tuple[int, str], np.ndarray] = {}

    def var_message(iid: str, fam_idx: int) -> np.ndarray:
        msg = log_ev[iid].copy()
        for other in var_fams[iid]:
            if other != fam_idx:
                msg += to_var[(other, iid)]
        return msg

    def fam_message(fam_idx: int, target: str) -> np.ndarray:
        fam = families[fam_idx]
        child_logs = [
            to_fam[(c, fam_idx)] for c in fam.children if c != target
        ]
        log_f = None if target == fam.father else to_fam[(fam.father, fam_idx)]
        log_m = None if target == fam.mother else to_fam[(fam.mother, fam_idx)]
        if target == fam.father:
            return _family_contract(log_t2, log_f, log_m, child_logs, ("father", 0))
        if target == fam.mother:
            return _family_contract(log_t2, log_f, log_m, child_logs, ("mother", 0))
        return _family_contract(log_t2, log_f, log_m, child_logs, ("child", 0))

    # BFS forest over family nodes; roots chosen deterministically
    visited_fam: set[int] = set()
    for root in range(len(families)):
        if root in visited_fam:
            continue
        # schedule: (family, parent_variable) pairs in BFS order
        schedule: list[tuple[int, str | None]] = [(root, None)]
        visited_fam.add(root)
        visited_var: set[str] = set()
        head = 0
        while head < len(schedule):
            fam_idx, parent_var = schedule[head]
            head += 1
            for member in fam_members[fam_idx]:
                if member == parent_var or member in visited_var:
                    continue
                visited_var.add(member)
                for nxt in var_fams[member]:
                    if nxt not in visited_fam:
                        visited_fam.add(nxt)
                        schedule.append((nxt, member))
        # upward: leaves toward the root
        for fam_idx, parent_var in reversed(schedule):
            fam = families[fam_idx]
            for member in fam.members:
                if member != parent_var:
                    to_fam[(member, fam_idx)] = var_message(member, fam_idx)
            if parent_var is not None:
                to_var[(fam_idx, parent_var)] = fam_message(fam_idx, parent_var)
        # downward: root toward the leaves
        for fam_idx, parent_var in schedule:
            fam = families[fam_idx]
            if parent_var is not None:
                to_fam[(parent_var, fam_idx)] = var_message(parent_var, fam_idx)
            for member in fam.members:
                if member != parent_var:
                    to_var[(fam_idx, member)] = fam_message(fam_idx, member)

    log_marginals = {}
    for ind in pedigree.individuals:
        logm = log_ev[ind.id].copy()
        for fam_idx in var_fams.get(ind.id, ()):
            logm += to_var[(fam_idx, ind.id)]
        log_marginals[ind.id] = logm
    posteriors = _log_marginals_to_posteriors(pedigree, model, log_marginals)
    # the normalizer is per connected component; report the pedigree-wide
    # log likelihood (sum over components and isolated individuals)
    loglik = _component_loglik(pedigree, log_marginals, var_fams, families)
    return GenotypePosteriors(marginals=posteriors.marginals, loglik=loglik)


def _component_loglik(pedigree, log_marginals, var_fams, families) -> float:
    # union components via shared families
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str):
        parent[find(a)] = find(b)

    for fam in families:
        members = fam.members
        for m in members[1:]:
            union(members[0], m)
    seen_roots: set[str] = set()
    total = 0.0
    for ind in pedigree.individuals:
        root = find(ind.id)
        if root in seen_roots:
            continue
        seen_roots.add(root)
        total += float(logsumexp(log_marginals[ind.id]))
    return total
