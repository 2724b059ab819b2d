"""Two-locus genetic model.

Alleles, phased genotypes, founder priors under Hardy-Weinberg and
linkage equilibrium, penetrance, and gamete transmission probabilities
with recombination.  All functions here return linear-domain
probabilities; the likelihood engines convert to natural logs at their
boundaries.

Conventions:
  - allele indices are 0-based everywhere in the API (file formats use
    1-based indices with 0 meaning missing; parsing converts),
  - a haplotype pairs one trait allele with one marker allele,
  - a phased genotype is an ordered (paternal, maternal) haplotype pair,
    so (h1, h2) and (h2, h1) are distinct states,
  - unordered genotypes are (min, max) index pairs.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field

from .errors import InvalidLocusError, ModelError

FREQ_SUM_TOL = 1e-12


class Phenotype(enum.IntEnum):
    """Trait phenotype; integer values match the data-file encoding."""

    UNKNOWN = 0
    UNAFFECTED = 1
    AFFECTED = 2


@dataclass(frozen=True)
class Locus:
    """A locus with named alleles and population allele frequencies.

    Frequencies must be nonnegative and sum to one within 1e-12.  A zero
    frequency declares the allele absent from the population.
    """

    name: str
    frequencies: tuple[float, ...]
    alleles: tuple[str, ...] | None = None

    def __post_init__(self):
        freqs = tuple(float(f) for f in self.frequencies)
        object.__setattr__(self, "frequencies", freqs)
        if not freqs:
            raise InvalidLocusError(f"locus {self.name!r} has no alleles")
        if any(f < 0.0 for f in freqs):
            raise InvalidLocusError(
                f"locus {self.name!r} has a negative allele frequency"
            )
        if abs(sum(freqs) - 1.0) > FREQ_SUM_TOL:
            raise InvalidLocusError(
                f"locus {self.name!r} frequencies sum to {sum(freqs)!r}, not 1"
            )
        if self.alleles is not None:
            names = tuple(str(a) for a in self.alleles)
            if len(names) != len(freqs):
                raise InvalidLocusError(
                    f"locus {self.name!r}: {len(names)} allele names for "
                    f"{len(freqs)} frequencies"
                )
            object.__setattr__(self, "alleles", names)

    @property
    def n_alleles(self) -> int:
        return len(self.frequencies)

    def allele_name(self, index: int) -> str:
        if self.alleles is not None:
            return self.alleles[index]
        return str(index + 1)

    def allele_index(self, name: str) -> int:
        if self.alleles is not None:
            try:
                return self.alleles.index(name)
            except ValueError:
                raise ModelError(
                    f"locus {self.name!r} has no allele named {name!r}"
                ) from None
        try:
            idx = int(name) - 1
        except ValueError:
            raise ModelError(
                f"locus {self.name!r} has no allele named {name!r}"
            ) from None
        if not 0 <= idx < self.n_alleles:
            raise ModelError(f"locus {self.name!r}: allele {name!r} out of range")
        return idx


@dataclass(frozen=True)
class Haplotype:
    """One gamete: a trait allele paired with a marker allele."""

    trait_allele: int
    marker_allele: int


@dataclass(frozen=True)
class PhasedGenotype:
    """Ordered (paternal, maternal) haplotype pair."""

    paternal: Haplotype
    maternal: Haplotype

    def trait_genotype(self) -> tuple[int, int]:
        """Unordered trait genotype as a sorted index pair."""
        a, b = self.paternal.trait_allele, self.maternal.trait_allele
        return (a, b) if a <= b else (b, a)

    def marker_genotype(self) -> tuple[int, int]:
        """Unordered marker genotype as a sorted index pair."""
        a, b = self.paternal.marker_allele, self.maternal.marker_allele
        return (a, b) if a <= b else (b, a)

    def phase_swapped(self) -> "PhasedGenotype":
        return PhasedGenotype(self.maternal, self.paternal)


@dataclass(frozen=True)
class RecombinationParam:
    """Recombination fraction chi in [0, 1/2] with eta = 1 - 2*chi.

    chi = 1/2 (eta = 0) is the no-linkage null.
    """

    chi: float

    def __post_init__(self):
        if not 0.0 <= self.chi <= 0.5:
            raise ModelError(f"recombination fraction {self.chi!r} not in [0, 1/2]")

    @property
    def eta(self) -> float:
        return 1.0 - 2.0 * self.chi

    @classmethod
    def from_eta(cls, eta: float) -> "RecombinationParam":
        return cls(chi=(1.0 - eta) / 2.0)


@dataclass(frozen=True)
class PenetranceModel:
    """P(affected | unordered trait genotype) as a lookup table.

    The table covers every unordered genotype of the trait locus it is
    used with; probabilities lie in [0, 1].  Unknown phenotypes carry no
    information: P(unknown | g) = 1.
    """

    table: tuple[tuple[tuple[int, int], float], ...]

    def __post_init__(self):
        norm = []
        for genotype, prob in self.table:
            a, b = genotype
            key = (a, b) if a <= b else (b, a)
            p = float(prob)
            if not 0.0 <= p <= 1.0:
                raise ModelError(
                    f"penetrance {p!r} for genotype {key} not in [0, 1]"
                )
            norm.append((key, p))
        norm.sort()
        keys = [k for k, _ in norm]
        if len(set(keys)) != len(keys):
            raise ModelError("duplicate genotype in penetrance table")
        object.__setattr__(self, "table", tuple(norm))
        object.__setattr__(self, "_lookup", dict(norm))

    @classmethod
    def from_dict(cls, mapping) -> "PenetranceModel":
        return cls(table=tuple(mapping.items()))

    def affected_prob(self, genotype: tuple[int, int]) -> float:
        a, b = genotype
        key = (a, b) if a <= b else (b, a)
        try:
            return self._lookup[key]
        except KeyError:
            raise ModelError(f"penetrance table lacks genotype {key}") from None

    def phenotype_prob(self, phenotype: Phenotype, genotype: tuple[int, int]) -> float:
        if phenotype == Phenotype.UNKNOWN:
            return 1.0
        p = self.affected_prob(genotype)
        return p if phenotype == Phenotype.AFFECTED else 1.0 - p


@dataclass(frozen=True)
class TwoLocusModel:
    """Trait locus, marker locus, penetrance, and an optional default chi."""

    trait: Locus
    marker: Locus
    penetrance: PenetranceModel
    chi: float | None = None

    def __post_init__(self):
        # the penetrance table must cover every unordered trait genotype
        for i in range(self.trait.n_alleles):
            for j in range(i, self.trait.n_alleles):
                self.penetrance.affected_prob((i, j))
        if self.chi is not None and not 0.0 <= self.chi <= 0.5:
            raise ModelError(f"default chi {self.chi!r} not in [0, 1/2]")

    @property
    def n_haplotypes(self) -> int:
        return self.trait.n_alleles * self.marker.n_alleles

    @property
    def n_genotypes(self) -> int:
        return self.n_haplotypes**2

    def haplotypes(self):
        """All haplotypes in index order (trait-major)."""
        for t in range(self.trait.n_alleles):
            for m in range(self.marker.n_alleles):
                yield Haplotype(t, m)

    def phased_genotypes(self):
        """All phased genotypes in (paternal-major) index order."""
        haps = list(self.haplotypes())
        for hp, hm in itertools.product(haps, haps):
            yield PhasedGenotype(hp, hm)

    def haplotype_index(self, h: Haplotype) -> int:
        return h.trait_allele * self.marker.n_alleles + h.marker_allele

    def genotype_index(self, g: PhasedGenotype) -> int:
        return self.haplotype_index(g.paternal) * self.n_haplotypes + self.haplotype_index(
            g.maternal
        )

    def genotype_from_index(self, index: int) -> PhasedGenotype:
        hp, hm = divmod(index, self.n_haplotypes)
        nm = self.marker.n_alleles
        return PhasedGenotype(Haplotype(*divmod(hp, nm)), Haplotype(*divmod(hm, nm)))


def founder_prior(g: PhasedGenotype, trait: Locus, marker: Locus) -> float:
    """Prior probability of a founder's phased genotype.

    Hardy-Weinberg at each locus, linkage equilibrium across loci, and
    equal probability for both phases by construction: the product of
    the four allele frequencies.  Sums to one over all phased genotypes.
    Grouped per locus so the value is bit-identical under phase swap.
    """
    trait_term = (
        trait.frequencies[g.paternal.trait_allele]
        * trait.frequencies[g.maternal.trait_allele]
    )
    marker_term = (
        marker.frequencies[g.paternal.marker_allele]
        * marker.frequencies[g.maternal.marker_allele]
    )
    return trait_term * marker_term


def transmission_prob(
    parent: PhasedGenotype, gamete: Haplotype, r: RecombinationParam
) -> float:
    """Probability that a parent transmits the given gamete.

    Each parental haplotype is transmitted with probability (1-chi)/2
    and each recombinant with probability chi/2; identical outcomes
    accumulate.  Sums to one over all gametes.
    """
    chi = r.chi
    pat, mat = parent.paternal, parent.maternal
    outcomes = (
        (Haplotype(pat.trait_allele, pat.marker_allele), (1.0 - chi) / 2.0),
        (Haplotype(mat.trait_allele, mat.marker_allele), (1.0 - chi) / 2.0),
        (Haplotype(pat.trait_allele, mat.marker_allele), chi / 2.0),
        (Haplotype(mat.trait_allele, pat.marker_allele), chi / 2.0),
    )
    return sum(p for h, p in outcomes if h == gamete)


def penetrance_prob(
    phenotype: Phenotype, g: PhasedGenotype, pm: PenetranceModel
) -> float:
    """P(phenotype | unordered trait genotype of g); unknown gives 1."""
    return pm.phenotype_prob(phenotype, g.trait_genotype())
