"""Gene-drop simulation of two-locus data on pedigrees.

Founders draw phased genotypes from the founder prior; each non-founder
draws one gamete from each parent at the true recombination fraction;
phenotypes follow the penetrance and marker genotypes are masked at the
missingness rate.  Every replicate uses an independent generator
derived from (seed, replicate index), so results do not depend on
evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .likelihood import (
    FamilyData,
    IndividualObservation,
    ObservedData,
    lod_curve,
    sample_joint_genotypes,
    _founder_prior_vector,
    _transmission_matrix,
)
from .model import Phenotype, TwoLocusModel
from .pedigree import Pedigree


@dataclass(frozen=True)
class SimConfig:
    """Gene-drop settings: the true recombination fraction, replicate
    count, base seed, and marker missingness rate."""

    chi_true: float
    replicates: int
    seed: int
    missingness_rate: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.chi_true <= 0.5:
            raise ValueError("chi_true must lie in [0, 0.5]")
        if self.replicates < 1:
            raise ValueError("need at least one replicate")
        if not 0.0 <= self.missingness_rate <= 1.0:
            raise ValueError("missingness_rate must lie in [0, 1]")


def replicate_rng(seed: int, replicate_index: int) -> np.random.Generator:
    """Independent generator for one replicate.

    Mixes (seed, replicate index) through a seed sequence; this fixes
    the per-replicate stream without making the raw stream part of any
    cross-implementation contract.
    """
    return np.random.default_rng(np.random.SeedSequence((int(seed), int(replicate_index))))


def gene_drop(
    pedigree: Pedigree,
    model: TwoLocusModel,
    cfg: SimConfig,
    replicate_index: int,
    rng: np.random.Generator | None = None,
    fixed: ObservedData | None = None,
) -> ObservedData:
    """Simulate one replicate of observed data on a pedigree.

    Deterministic given (cfg.seed, replicate_index); pass ``rng`` to
    draw several pedigrees from one replicate stream.  ``fixed``
    observations, when given, are held constant and the rest of the data
    are drawn from the exact conditional law: genotypes are sampled from
    their joint posterior given the fixed records, then unfixed
    individuals report phenotype and marker from the sampled genotypes.
    """
    if rng is None:
        rng = replicate_rng(cfg.seed, replicate_index)
    affected = _affected_lookup(model)
    n_hap = model.n_haplotypes
    nm = model.marker.n_alleles
    if fixed is None or not fixed.records:
        genotypes = _forward_drop(pedigree, model, cfg.chi_true, rng)
        fixed_ids: set[str] = set()
    else:
        genotypes = sample_joint_genotypes(
            pedigree, model, fixed, cfg.chi_true, rng
        )
        fixed_ids = set(fixed.records)
    records: dict[str, IndividualObservation] = {}
    for ind in pedigree.individuals:
        if ind.id in fixed_ids:
            records[ind.id] = fixed.observation(ind.id)
            continue
        g = genotypes[ind.id]
        phenotype = (
            Phenotype.AFFECTED
            if rng.random() < affected[g]
            else Phenotype.UNAFFECTED
        )
        pat_marker = (g // n_hap) % nm
        mat_marker = (g % n_hap) % nm
        marker: tuple[int, int] | None
        marker = (min(pat_marker, mat_marker), max(pat_marker, mat_marker))
        if cfg.missingness_rate > 0.0 and rng.random() < cfg.missingness_rate:
            marker = None
        records[ind.id] = IndividualObservation(phenotype=phenotype, marker=marker)
    return ObservedData(records=records)


def _forward_drop(
    pedigree: Pedigree, model: TwoLocusModel, chi: float, rng: np.random.Generator
) -> dict[str, int]:
    """Unconditional genotype drop: founders from the prior, children by
    gamete transmission."""
    n_hap = model.n_haplotypes
    prior = _founder_prior_vector(model)
    trans = _transmission_matrix(model.trait.n_alleles, model.marker.n_alleles, chi)
    genotypes: dict[str, int] = {}
    for ind in _founders_first(pedigree):
        if ind.is_founder:
            g = int(rng.choice(len(prior), p=prior))
        else:
            pat = int(rng.choice(n_hap, p=trans[genotypes[ind.father]]))
            mat = int(rng.choice(n_hap, p=trans[genotypes[ind.mother]]))
            g = pat * n_hap + mat
        genotypes[ind.id] = g
    return genotypes


def _founders_first(pedigree: Pedigree):
    """Individuals ordered so parents precede their children."""
    placed: set[str] = set()
    remaining = list(pedigree.individuals)
    ordered = []
    while remaining:
        progressed = False
        still = []
        for ind in remaining:
            if ind.is_founder or (ind.father in placed and ind.mother in placed):
                ordered.append(ind)
                placed.add(ind.id)
                progressed = True
            else:
                still.append(ind)
        remaining = still
        if not progressed:  # unreachable on validated pedigrees
            raise RuntimeError("pedigree ordering failed")
    return ordered


def _affected_lookup(model: TwoLocusModel) -> np.ndarray:
    from .likelihood import _affected_prob_vector

    return _affected_prob_vector(model)


def estimate_power(
    families: Sequence[Pedigree],
    model: TwoLocusModel,
    chi_true: float,
    lod_threshold: float,
    cfg: SimConfig,
    chis: Sequence[float] | None = None,
    fixed: Sequence[ObservedData | None] | None = None,
) -> tuple[float, float]:
    """Fraction of replicates whose maximum lod reaches the threshold.

    Each replicate gene-drops every family at ``chi_true``, sums the
    family lod curves over the chi grid, and scores a success when the
    maximum summed lod is at least ``lod_threshold``.  Returns the
    estimate with its binomial standard error.  A threshold of 0 always
    succeeds because the curve attains 0 at chi = 0.5.  ``fixed``
    optionally conditions each family on held observations (ascertained
    designs).
    """
    if lod_threshold < 0.0:
        raise ValueError("lod threshold must be nonnegative")
    if fixed is None:
        fixed = [None] * len(families)
    if len(fixed) != len(families):
        raise ValueError("fixed observations do not align with families")
    run_cfg = SimConfig(
        chi_true=chi_true,
        replicates=cfg.replicates,
        seed=cfg.seed,
        missingness_rate=cfg.missingness_rate,
    )
    successes = 0
    for r in range(run_cfg.replicates):
        rng = replicate_rng(run_cfg.seed, r)
        simulated: list[FamilyData] = [
            (ped, gene_drop(ped, model, run_cfg, r, rng=rng, fixed=fx))
            for ped, fx in zip(families, fixed)
        ]
        curve = lod_curve(simulated, model, chis)
        if curve.max_lod >= lod_threshold:
            successes += 1
    w = successes / run_cfg.replicates
    se = math.sqrt(w * (1.0 - w) / run_cfg.replicates)
    return w, se
