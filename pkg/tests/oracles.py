"""Independent oracles used to derive expected test values.

Everything here is deliberately naive: direct enumeration, exhaustive
grid search, and finite differences.  None of it shares code with the
library paths it checks.
"""

from __future__ import annotations

import itertools
import math

import numpy as np


def meiosis_lod(chi: float, n_total: int, n_recombinant: int) -> float:
    """Base-10 lod of phase-known meioses by two-outcome enumeration.

    Each meiosis transmits the parental haplotype with probability
    (1 - chi)/2 and the recombinant with probability chi/2; at the null
    every gamete has probability 1/4.
    """
    lod = 0.0
    for k in range(n_total):
        recombinant = k < n_recombinant
        p = (chi / 2.0) if recombinant else ((1.0 - chi) / 2.0)
        lod += math.log10(p / 0.25) if p > 0.0 else float("-inf")
    return lod


def binomial_mle_chi(n_recombinant: int, n_total: int) -> float:
    """Closed-form recombination MLE for phase-known meioses, clamped to
    the parameter range."""
    return min(n_recombinant / n_total, 0.5)


def grid_scan_chi(objective, n_points: int = 2001) -> tuple[float, float]:
    """Dense grid argmax of a lod function over [0, 0.5]."""
    grid = np.linspace(0.0, 0.5, n_points)
    values = [objective(c) for c in grid]
    k = int(np.argmax(values))
    return float(grid[k]), float(values[k])


def multinomial_loglik(freqs, genotype_lists, counts) -> float:
    """Observed-data log likelihood of phenotype counts under
    Hardy-Weinberg with the given allele frequencies."""
    total = 0.0
    for genotypes, count in zip(genotype_lists, counts):
        if count == 0:
            continue
        mass = 0.0
        for i, j in genotypes:
            mass += freqs[i] * freqs[i] if i == j else 2.0 * freqs[i] * freqs[j]
        if mass <= 0.0:
            return float("-inf")
        total += count * math.log(mass)
    return total


def simplex_grid_mle(genotype_lists, counts, resolution: float):
    """Exhaustive grid maximizer of the multinomial likelihood over the
    allele-frequency simplex (2 or 3 alleles)."""
    n_alleles = 1 + max(max(max(g) for g in genotypes) for genotypes in genotype_lists)
    steps = round(1.0 / resolution)
    if n_alleles == 2:
        best = (-math.inf, None)
        for a in range(steps + 1):
            p = a / steps
            ll = multinomial_loglik((p, 1.0 - p), genotype_lists, counts)
            if ll > best[0]:
                best = (ll, (p, 1.0 - p))
        return best[1], best[0]
    if n_alleles != 3:
        raise ValueError("oracle supports 2- or 3-allele systems")
    best_ll = -math.inf
    best_freqs = None
    counts_arr = np.asarray(counts, dtype=float)
    # vectorize over the second coordinate for each first coordinate
    for a in range(steps + 1):
        p = a / steps
        qs = np.arange(0, steps - a + 1) / steps
        rs = 1.0 - p - qs
        rs[np.abs(rs) < 1e-15] = 0.0
        lls = np.zeros_like(qs)
        for genotypes, count in zip(genotype_lists, counts_arr):
            if count == 0:
                continue
            mass = np.zeros_like(qs)
            for i, j in genotypes:
                fi = p if i == 0 else (qs if i == 1 else rs)
                fj = p if j == 0 else (qs if j == 1 else rs)
                mass = mass + (fi * fi if i == j else 2.0 * fi * fj)
            with np.errstate(divide="ignore"):
                lls = lls + count * np.log(mass)
        k = int(np.argmax(lls))
        if lls[k] > best_ll:
            best_ll = float(lls[k])
            best_freqs = (p, float(qs[k]), float(rs[k]))
    return best_freqs, best_ll


def central_difference(f, x: float, step: float) -> float:
    return (f(x + step) - f(x - step)) / (2.0 * step)


def enumerate_distributions(rng: np.random.Generator, n_outcomes: int):
    """A pair of strictly positive distributions on a shared outcome set."""
    f0 = rng.dirichlet(np.ones(n_outcomes))
    f1 = rng.dirichlet(np.ones(n_outcomes))
    f0 = np.maximum(f0, 1e-12)
    f1 = np.maximum(f1, 1e-12)
    return f0 / f0.sum(), f1 / f1.sum()
