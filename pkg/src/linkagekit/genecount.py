"""Gene-counting EM for population allele frequencies.

Estimates allele frequencies from phenotype counts when several
genotypes share a phenotype (e.g. recessive alleles hidden in a
dominant class).  The E-step distributes each phenotype's count over
its compatible genotypes in Hardy-Weinberg proportion at the current
frequencies; the M-step renormalizes the expected allele counts.  The
observed-data log likelihood never decreases along the iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    InsufficientIteratesError,
    ModelError,
    NonSimplexInitError,
    ZeroTotalCountError,
)

EM_LOGLIK_TOL = 1e-10
EM_MAX_ITERATIONS = 10_000


@dataclass(frozen=True)
class PhenotypeSystem:
    """Alleles, phenotypes, and the genotype-to-phenotype map.

    ``membership`` maps every unordered genotype (i, j) with i <= j to a
    phenotype index; every phenotype must own at least one genotype.
    """

    alleles: tuple[str, ...]
    phenotypes: tuple[str, ...]
    membership: Mapping[tuple[int, int], int]

    def __post_init__(self):
        n = len(self.alleles)
        if n == 0:
            raise ModelError("phenotype system has no alleles")
        membership = {}
        for (i, j), ph in dict(self.membership).items():
            key = (i, j) if i <= j else (j, i)
            if key in membership:
                raise ModelError(f"genotype {key} mapped twice")
            membership[key] = int(ph)
        expected = {(i, j) for i in range(n) for j in range(i, n)}
        if set(membership) != expected:
            raise ModelError("membership must cover every unordered genotype")
        owned = set(membership.values())
        if owned != set(range(len(self.phenotypes))):
            raise ModelError("every phenotype needs at least one genotype")
        object.__setattr__(self, "membership", membership)

    @cached_property
    def genotypes_by_phenotype(self) -> tuple[tuple[tuple[int, int], ...], ...]:
        buckets: list[list[tuple[int, int]]] = [[] for _ in self.phenotypes]
        for genotype, ph in sorted(self.membership.items()):
            buckets[ph].append(genotype)
        return tuple(tuple(b) for b in buckets)

    @classmethod
    def from_names(
        cls,
        alleles: Sequence[str],
        membership: Mapping[str, str],
        *,
        separator: str = "/",
    ) -> "PhenotypeSystem":
        """Build from name-keyed genotypes like {"A/O": "A", ...}.

        Phenotype order follows first appearance in the mapping.
        """
        allele_index = {name: k for k, name in enumerate(alleles)}
        phenotype_names: list[str] = []
        mapping: dict[tuple[int, int], int] = {}
        for genotype_name, phenotype_name in membership.items():
            parts = genotype_name.split(separator)
            if len(parts) != 2:
                raise ModelError(f"bad genotype key {genotype_name!r}")
            try:
                i, j = allele_index[parts[0]], allele_index[parts[1]]
            except KeyError as exc:
                raise ModelError(f"unknown allele in {genotype_name!r}") from exc
            if phenotype_name not in phenotype_names:
                phenotype_names.append(phenotype_name)
            mapping[(min(i, j), max(i, j))] = phenotype_names.index(phenotype_name)
        return cls(
            alleles=tuple(alleles),
            phenotypes=tuple(phenotype_names),
            membership=mapping,
        )

    @classmethod
    def codominant(cls, alleles: Sequence[str]) -> "PhenotypeSystem":
        """Every genotype is its own phenotype (complete data)."""
        names = tuple(alleles)
        membership = {}
        phenotypes = []
        for i in range(len(names)):
            for j in range(i, len(names)):
                membership[(i, j)] = len(phenotypes)
                phenotypes.append(f"{names[i]}/{names[j]}")
        return cls(alleles=names, phenotypes=tuple(phenotypes), membership=membership)


@dataclass(frozen=True)
class EmTrajectory:
    """EM iterates: (frequency vector, observed-data log likelihood),
    starting from the initialization."""

    iterates: tuple[tuple[tuple[float, ...], float], ...]

    @property
    def final_frequencies(self) -> tuple[float, ...]:
        return self.iterates[-1][0]

    @property
    def final_loglik(self) -> float:
        return self.iterates[-1][1]

    def __len__(self) -> int:
        return len(self.iterates)


def _hw_prob(freqs: np.ndarray, genotype: tuple[int, int]) -> float:
    i, j = genotype
    if i == j:
        return float(freqs[i] * freqs[i])
    return float(2.0 * freqs[i] * freqs[j])


def _phenotype_logliks(
    system: PhenotypeSystem, counts: np.ndarray, freqs: np.ndarray
) -> float:
    total = 0.0
    for ph, genotypes in enumerate(system.genotypes_by_phenotype):
        if counts[ph] == 0:
            continue
        mass = sum(_hw_prob(freqs, g) for g in genotypes)
        if mass <= 0.0:
            return float("-inf")
        total += counts[ph] * math.log(mass)
    return total


def _normalize_counts(
    system: PhenotypeSystem, counts: Mapping[str, int] | Sequence[int]
) -> np.ndarray:
    if isinstance(counts, Mapping):
        arr = np.zeros(len(system.phenotypes))
        for name, value in counts.items():
            try:
                ph = system.phenotypes.index(str(name))
            except ValueError:
                raise ModelError(f"unknown phenotype {name!r}") from None
            arr[ph] = float(value)
    else:
        arr = np.asarray(counts, dtype=float)
        if arr.shape != (len(system.phenotypes),):
            raise ModelError("counts do not align with phenotypes")
    if np.any(arr < 0):
        raise ModelError("phenotype counts must be nonnegative")
    return arr


def em_gene_count(
    system: PhenotypeSystem,
    counts: Mapping[str, int] | Sequence[int],
    init: Sequence[float] | None = None,
    *,
    loglik_tol: float = EM_LOGLIK_TOL,
) -> EmTrajectory:
    """Run gene-counting EM and return the full trajectory.

    The E-step distributes phenotype counts over compatible genotypes in
    Hardy-Weinberg proportion; the M-step renormalizes expected allele
    counts.  Stops when the log-likelihood improvement drops below
    ``loglik_tol`` (default 1e-10) or after 10,000 iterations.  Default
    initialization is uniform.
    """
    n_alleles = len(system.alleles)
    count_arr = _normalize_counts(system, counts)
    total = count_arr.sum()
    if total < 1:
        raise ZeroTotalCountError("phenotype counts sum to zero")
    if init is None:
        freqs = np.full(n_alleles, 1.0 / n_alleles)
    else:
        freqs = np.asarray(init, dtype=float)
        if freqs.shape != (n_alleles,):
            raise NonSimplexInitError("initialization has the wrong length")
        if np.any(freqs <= 0.0) or abs(freqs.sum() - 1.0) > 1e-9:
            raise NonSimplexInitError(
                "initialization must be strictly positive and sum to one"
            )

    iterates = [(tuple(float(f) for f in freqs), _phenotype_logliks(system, count_arr, freqs))]
    for _ in range(EM_MAX_ITERATIONS):
        allele_counts = np.zeros(n_alleles)
        for ph, genotypes in enumerate(system.genotypes_by_phenotype):
            if count_arr[ph] == 0:
                continue
            masses = np.array([_hw_prob(freqs, g) for g in genotypes])
            mass_total = masses.sum()
            if mass_total <= 0.0:
                raise ModelError(
                    f"phenotype {system.phenotypes[ph]!r} has zero mass at the "
                    "current frequencies"
                )
            expected = count_arr[ph] * masses / mass_total
            for (i, j), e in zip(genotypes, expected):
                allele_counts[i] += e
                allele_counts[j] += e
        freqs = allele_counts / (2.0 * total)
        loglik = _phenotype_logliks(system, count_arr, freqs)
        iterates.append((tuple(float(f) for f in freqs), loglik))
        if abs(loglik - iterates[-2][1]) < loglik_tol:
            break
    return EmTrajectory(iterates=tuple(iterates))


def em_convergence_rate(trajectory: EmTrajectory) -> float:
    """Linear convergence rate estimated from the trajectory tail.

    Geometric mean of successive error ratios ||x_{k+1} - x*|| /
    ||x_k - x*|| over the last five pre-convergence iterates, with the
    final iterate standing in for the limit.  One-step convergence
    (complete data) reports 0.  Raises ``InsufficientIteratesError``
    when the trajectory is too short to estimate a rate.
    """
    points = [np.asarray(freqs) for freqs, _ in trajectory.iterates]
    if len(points) < 3:
        raise InsufficientIteratesError(
            f"need at least 3 iterates, got {len(points)}"
        )
    limit = points[-1]
    errors = [float(np.linalg.norm(p - limit)) for p in points[:-1]]
    if errors[1] == 0.0:
        return 0.0
    if len(points) < 4:
        raise InsufficientIteratesError(
            "trajectory stopped before a rate could be estimated"
        )
    pairs = list(zip(errors[:-1], errors[1:]))[-5:]
    ratios = [num / den for den, num in pairs if den > 0.0]
    if not ratios:
        return 0.0
    if any(r == 0.0 for r in ratios):
        return 0.0
    log_mean = sum(math.log(r) for r in ratios) / len(ratios)
    return math.exp(log_mean)
