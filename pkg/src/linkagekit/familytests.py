"""Model-light family-based tests.

Sib-pair trait concordance, the transmission disequilibrium statistic,
and a homozygosity-mapping score.  None of these require a trait model
beyond what their inputs carry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import EmptyInputError, NoInformativeTransmissionsError
from .likelihood import ObservedData
from .pedigree import Pedigree


# ----------------------------------------------------------------------
# sib-pair concordance
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class SibPair:
    """Whether a sib pair is concordant for each of two traits."""

    trait_a_concordant: bool
    trait_b_concordant: bool


@dataclass(frozen=True)
class SibPairResult:
    """Pearson chi-square on the 2x2 concordance table.

    ``table[i][j]`` counts pairs with trait-A concordance i and trait-B
    concordance j (0 = discordant, 1 = concordant).  ``degenerate``
    flags a table with an empty margin, where the statistic is 0 by
    convention.
    """

    statistic: float
    table: tuple[tuple[int, int], tuple[int, int]]
    degenerate: bool


def sib_pair_test(pairs: Sequence[SibPair]) -> SibPairResult:
    """Concordance association between two traits across sib pairs.

    Under linkage, pairs alike for one trait tend to be alike for the
    other; independence gives a chi-square statistic near its single
    degree of freedom.
    """
    if not pairs:
        raise EmptyInputError("no sib pairs")
    table = [[0, 0], [0, 0]]
    for pair in pairs:
        table[int(pair.trait_a_concordant)][int(pair.trait_b_concordant)] += 1
    n = len(pairs)
    row = [table[0][0] + table[0][1], table[1][0] + table[1][1]]
    col = [table[0][0] + table[1][0], table[0][1] + table[1][1]]
    frozen = (tuple(table[0]), tuple(table[1]))
    if 0 in row or 0 in col:
        return SibPairResult(statistic=0.0, table=frozen, degenerate=True)
    det = table[0][0] * table[1][1] - table[0][1] * table[1][0]
    statistic = n * det * det / (row[0] * row[1] * col[0] * col[1])
    return SibPairResult(statistic=float(statistic), table=frozen, degenerate=False)


# ----------------------------------------------------------------------
# transmission disequilibrium
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class TrioTransmission:
    """Transmission counts from heterozygous parents.

    ``transmitted_target`` (b) and ``untransmitted_target`` (c) count
    how often the target allele was and was not passed on; their sum is
    the number of scored transmissions.
    """

    heterozygous_parent_count: int
    transmitted_target: int
    untransmitted_target: int

    def __post_init__(self):
        if self.transmitted_target < 0 or self.untransmitted_target < 0:
            raise ValueError("transmission counts must be nonnegative")


def tdt(t: TrioTransmission) -> float:
    """McNemar-form statistic (b - c)^2 / (b + c).

    Symmetric under allele relabeling (b and c swap).  Raises
    ``NoInformativeTransmissionsError`` when nothing was scored.
    """
    b, c = t.transmitted_target, t.untransmitted_target
    if b + c == 0:
        raise NoInformativeTransmissionsError("no transmissions from heterozygous parents")
    return (b - c) ** 2 / (b + c)


def count_transmissions(
    pedigree: Pedigree, data: ObservedData, target_allele: int
) -> TrioTransmission:
    """Score target-allele transmissions from heterozygous parents.

    For each child with both parents' markers observed, transmitted
    alleles are resolved by matching the child's genotype against the
    parents'; a child is skipped when the resolution is ambiguous about
    the counts.  Each heterozygous parent contributes one transmission
    per child.
    """

    def carries(genotype, allele):
        return int(genotype[0] == allele) + int(genotype[1] == allele)

    b = c = 0
    het_parents = 0
    for ind in pedigree.individuals:
        if ind.is_founder:
            continue
        child_obs = data.observation(ind.id)
        father_obs = data.observation(ind.father)
        mother_obs = data.observation(ind.mother)
        if None in (child_obs.marker, father_obs.marker, mother_obs.marker):
            continue
        father_het = len(set(father_obs.marker)) == 2 and target_allele in father_obs.marker
        mother_het = len(set(mother_obs.marker)) == 2 and target_allele in mother_obs.marker
        if not father_het and not mother_het:
            continue
        # all (paternal, maternal) resolutions consistent with the child
        resolutions = set()
        for fa in set(father_obs.marker):
            for mo in set(mother_obs.marker):
                if tuple(sorted((fa, mo))) == child_obs.marker:
                    resolutions.add((fa, mo))
        if not resolutions:
            continue  # Mendelian inconsistency; not scored here
        increments = set()
        for fa, mo in resolutions:
            db = dc = 0
            if father_het:
                db += int(fa == target_allele)
                dc += int(fa != target_allele)
            if mother_het:
                db += int(mo == target_allele)
                dc += int(mo != target_allele)
            increments.add((db, dc))
        if len(increments) != 1:
            continue  # ambiguous resolution; skip the child
        db, dc = next(iter(increments))
        b += db
        c += dc
        het_parents += int(father_het) + int(mother_het)
    return TrioTransmission(
        heterozygous_parent_count=het_parents,
        transmitted_target=b,
        untransmitted_target=c,
    )


# ----------------------------------------------------------------------
# homozygosity mapping
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class HomozygosityInput:
    """A single inbred individual's marker observation.

    ``inbreeding_coefficient`` documents the pedigree-derived autozygosity
    probability; the score itself compares the fully autozygous and
    outbred hypotheses at this marker.
    """

    inbreeding_coefficient: float
    marker_allele_frequency: float
    observed_genotype: tuple[int, int]

    def __post_init__(self):
        if not 0.0 <= self.inbreeding_coefficient <= 1.0:
            raise ValueError("inbreeding coefficient must lie in [0, 1]")
        if not 0.0 < self.marker_allele_frequency <= 1.0:
            raise ValueError("marker allele frequency must lie in (0, 1]")
        a, b = self.observed_genotype
        pair = (int(a), int(b)) if a <= b else (int(b), int(a))
        object.__setattr__(self, "observed_genotype", pair)

    @property
    def is_homozygous(self) -> bool:
        return self.observed_genotype[0] == self.observed_genotype[1]


@dataclass(frozen=True)
class HomozygosityResult:
    """Base-10 score; ``impossible_under_autozygosity`` flags an observed
    heterozygote, whose score is -inf."""

    score: float
    impossible_under_autozygosity: bool


def homozygosity_score(h: HomozygosityInput) -> HomozygosityResult:
    """Evidence that the observed marker genotype is autozygous.

    log10 of P(genotype | marker identical by descent) over
    P(genotype | Hardy-Weinberg): a homozygote for an allele of
    frequency p scores log10(p / p^2) = log10(1/p); a heterozygote is
    impossible under autozygosity and scores -inf.
    """
    if not h.is_homozygous:
        return HomozygosityResult(
            score=float("-inf"), impossible_under_autozygosity=True
        )
    p = h.marker_allele_frequency
    return HomozygosityResult(
        score=math.log10(1.0 / p), impossible_under_autozygosity=False
    )
