"""Bundled self-test corpus and reusable pedigree/model builders.

The corpus holds small loop-free pedigrees (at most 6 individuals) with
dominant, recessive, and partial-penetrance models and assorted
observation patterns.  ``run_self_test`` evaluates every case at a
fixed set of recombination fractions and compares the peeling engine
against brute-force enumeration; the CLI ``check`` command reports one
line per case.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .likelihood import (
    IndividualObservation,
    ObservedData,
    brute_force_loglik,
    pedigree_loglik,
)
from .model import Locus, PenetranceModel, Phenotype, TwoLocusModel
from .pedigree import Individual, Pedigree, validate_pedigree

AFF = Phenotype.AFFECTED
UNAFF = Phenotype.UNAFFECTED

CHECK_CHI_VALUES = (0.0, 0.05, 0.1, 0.3, 0.5)
CHECK_RELATIVE_TOL = 1e-10


# ----------------------------------------------------------------------
# model builders (trait allele 0 is the disease allele)
# ----------------------------------------------------------------------


def recessive_model(
    disease_freq: float = 0.01, marker_freqs: Sequence[float] = (0.5, 0.5)
) -> TwoLocusModel:
    """Fully penetrant recessive trait."""
    return TwoLocusModel(
        trait=Locus("trait", (disease_freq, 1.0 - disease_freq), ("d", "+")),
        marker=Locus("marker", tuple(marker_freqs)),
        penetrance=PenetranceModel.from_dict(
            {(0, 0): 1.0, (0, 1): 0.0, (1, 1): 0.0}
        ),
    )


def dominant_model(
    disease_freq: float = 0.01, marker_freqs: Sequence[float] = (0.5, 0.5)
) -> TwoLocusModel:
    """Fully penetrant dominant trait."""
    return TwoLocusModel(
        trait=Locus("trait", (disease_freq, 1.0 - disease_freq), ("D", "+")),
        marker=Locus("marker", tuple(marker_freqs)),
        penetrance=PenetranceModel.from_dict(
            {(0, 0): 1.0, (0, 1): 1.0, (1, 1): 0.0}
        ),
    )


def partial_model(
    disease_freq: float = 0.05,
    marker_freqs: Sequence[float] = (0.5, 0.5),
    penetrance: float = 0.8,
    phenocopy: float = 0.05,
) -> TwoLocusModel:
    """Dominant trait with incomplete penetrance and phenocopies."""
    return TwoLocusModel(
        trait=Locus("trait", (disease_freq, 1.0 - disease_freq), ("D", "+")),
        marker=Locus("marker", tuple(marker_freqs)),
        penetrance=PenetranceModel.from_dict(
            {(0, 0): penetrance, (0, 1): penetrance, (1, 1): phenocopy}
        ),
    )


def uninformative_model(marker_freqs: Sequence[float] = (0.5, 0.5)) -> TwoLocusModel:
    """Phenotype independent of genotype: no linkage information."""
    return TwoLocusModel(
        trait=Locus("trait", (0.5, 0.5)),
        marker=Locus("marker", tuple(marker_freqs)),
        penetrance=PenetranceModel.from_dict(
            {(0, 0): 0.3, (0, 1): 0.3, (1, 1): 0.3}
        ),
    )


# ----------------------------------------------------------------------
# pedigree builders
# ----------------------------------------------------------------------


def trio(family_id: str = "trio") -> Pedigree:
    return validate_pedigree(
        [
            Individual("f"),
            Individual("m"),
            Individual("c", father="f", mother="m"),
        ],
        family_id=family_id,
    )


def nuclear_family(n_children: int, family_id: str = "nuclear") -> Pedigree:
    members = [Individual("f"), Individual("m")] + [
        Individual(f"c{k + 1}", father="f", mother="m") for k in range(n_children)
    ]
    return validate_pedigree(members, family_id=family_id)


def three_generation(n_children: int = 1, family_id: str = "threegen") -> Pedigree:
    """Grandparents, their child as father, an unrelated mother, children."""
    members = [
        Individual("gf"),
        Individual("gm"),
        Individual("f", father="gf", mother="gm"),
        Individual("m"),
    ] + [Individual(f"c{k + 1}", father="f", mother="m") for k in range(n_children)]
    return validate_pedigree(members, family_id=family_id)


def half_sib_family(family_id: str = "halfsib") -> Pedigree:
    """One mother with children by two fathers."""
    return validate_pedigree(
        [
            Individual("m"),
            Individual("f1"),
            Individual("f2"),
            Individual("c1", father="f1", mother="m"),
            Individual("c2", father="f2", mother="m"),
        ],
        family_id=family_id,
    )


def first_cousin_marriage(family_id: str = "looped") -> Pedigree:
    """First-cousin mating: the marriage-node graph has a loop."""
    return validate_pedigree(
        [
            Individual("g1"),
            Individual("g2"),
            Individual("a", father="g1", mother="g2"),
            Individual("b", father="g1", mother="g2"),
            Individual("as"),
            Individual("bs"),
            Individual("c", father="a", mother="as"),
            Individual("d", father="bs", mother="b"),
            Individual("e", father="c", mother="d"),
        ],
        family_id=family_id,
    )


def sib_mating(family_id: str = "sibloop") -> Pedigree:
    """Full-sib mating: a loop small enough for the enumeration fallback."""
    return validate_pedigree(
        [
            Individual("p"),
            Individual("q"),
            Individual("a", father="p", mother="q"),
            Individual("b", father="p", mother="q"),
            Individual("e", father="a", mother="b"),
        ],
        family_id=family_id,
    )


def phase_known_family(n_children: int, family_id: str = "phaseknown") -> Pedigree:
    """Pedigree whose children are phase-known meioses when the standard
    observations from ``phase_known_setup`` are attached."""
    members = [
        Individual("gf"),
        Individual("gm"),
        Individual("f", father="gf", mother="gm"),
        Individual("m"),
    ] + [Individual(f"c{k + 1}", father="f", mother="m") for k in range(n_children)]
    return validate_pedigree(members, family_id=family_id)


def phase_known_setup() -> dict[str, IndividualObservation]:
    """Observations that fix the father's phase under a recessive model.

    The affected grandfather is homozygous for marker allele 1 and for
    the disease allele; the unaffected father typed 1/2 must then carry
    the disease allele with marker allele 1 on one haplotype and the
    wild allele with marker allele 2 on the other.  The affected mother
    typed 1/1 transmits only (disease, 1) gametes, so each child's data
    reveal the father's transmitted gamete.
    """
    return {
        "gf": IndividualObservation(phenotype=AFF, marker=(0, 0)),
        "f": IndividualObservation(phenotype=UNAFF, marker=(0, 1)),
        "m": IndividualObservation(phenotype=AFF, marker=(0, 0)),
    }


def child_observation(recombinant: bool) -> IndividualObservation:
    """A phase-known child's data: affected 1/1 when non-recombinant,
    affected 1/2 when recombinant (under the recessive setup)."""
    if recombinant:
        return IndividualObservation(phenotype=AFF, marker=(0, 1))
    return IndividualObservation(phenotype=AFF, marker=(0, 0))


def phase_known_meioses(
    n_recombinant: int, n_total: int, family_id: str = "meioses"
) -> tuple[Pedigree, ObservedData, TwoLocusModel]:
    """A family scoring ``n_total`` phase-known meioses, ``n_recombinant``
    of them recombinant, with its recessive model."""
    pedigree = phase_known_family(n_total, family_id=family_id)
    records = phase_known_setup()
    for k in range(n_total):
        records[f"c{k + 1}"] = child_observation(recombinant=k < n_recombinant)
    return pedigree, ObservedData(records=records), recessive_model(0.1, (0.5, 0.5))


# ----------------------------------------------------------------------
# the corpus
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class CorpusCase:
    name: str
    pedigree: Pedigree
    model: TwoLocusModel
    data: ObservedData


def _obs(**records) -> ObservedData:
    return ObservedData(records=records)


def build_corpus() -> tuple[CorpusCase, ...]:
    """Loop-free pedigrees of at most 6 individuals for the self-test."""
    rec = recessive_model(0.1, (0.3, 0.7))
    rec_rare = recessive_model(0.01, (0.5, 0.5))
    dom = dominant_model(0.05, (0.4, 0.6))
    dom_rare = dominant_model(0.01, (0.3, 0.7))
    part = partial_model()
    rec3 = recessive_model(0.1, (0.2, 0.3, 0.5))
    dom4 = dominant_model(0.05, (0.25, 0.25, 0.25, 0.25))

    het = IndividualObservation(marker=(0, 1))
    hom1 = IndividualObservation(marker=(0, 0))
    hom2 = IndividualObservation(marker=(1, 1))
    aff_het = IndividualObservation(phenotype=AFF, marker=(0, 1))
    aff_hom1 = IndividualObservation(phenotype=AFF, marker=(0, 0))
    unaff_het = IndividualObservation(phenotype=UNAFF, marker=(0, 1))
    unaff_hom2 = IndividualObservation(phenotype=UNAFF, marker=(1, 1))
    aff_only = IndividualObservation(phenotype=AFF)
    unaff_only = IndividualObservation(phenotype=UNAFF)

    cases = [
        CorpusCase("trio_recessive_full", trio("t1"), rec,
                   _obs(f=unaff_het, m=unaff_het, c=aff_hom1)),
        CorpusCase("trio_dominant_full", trio("t2"), dom,
                   _obs(f=aff_het, m=unaff_hom2, c=aff_het)),
        CorpusCase("trio_partial", trio("t3"), part,
                   _obs(f=aff_het, m=unaff_het, c=aff_hom1)),
        CorpusCase("trio_all_unknown", trio("t4"), rec, ObservedData.empty()),
        CorpusCase("trio_marker_only", trio("t5"), rec,
                   _obs(f=het, m=hom1, c=het)),
        CorpusCase("trio_phenotype_only", trio("t6"), dom,
                   _obs(f=aff_only, m=unaff_only, c=aff_only)),
        CorpusCase("trio_child_only", trio("t7"), rec_rare,
                   _obs(c=aff_hom1)),
        CorpusCase("nuclear2_recessive", nuclear_family(2, "n1"), rec,
                   _obs(f=unaff_het, m=unaff_het, c1=aff_hom1, c2=unaff_het)),
        CorpusCase("nuclear3_dominant", nuclear_family(3, "n2"), dom,
                   _obs(f=aff_het, m=unaff_hom2, c1=aff_het,
                        c2=unaff_hom2, c3=aff_het)),
        CorpusCase("nuclear4_partial", nuclear_family(4, "n3"), part,
                   _obs(f=aff_het, m=unaff_het, c1=aff_hom1, c2=unaff_het,
                        c3=aff_het, c4=unaff_hom2)),
        CorpusCase("nuclear2_missing_parent", nuclear_family(2, "n4"), dom_rare,
                   _obs(m=unaff_hom2, c1=aff_het, c2=unaff_hom2)),
        CorpusCase("threegen_recessive", three_generation(1, "g1"), rec,
                   _obs(gf=aff_hom1, gm=unaff_het, f=unaff_het,
                        m=unaff_het, c1=aff_hom1)),
        CorpusCase("threegen_dominant_two_kids", three_generation(2, "g2"), dom,
                   _obs(gf=aff_het, gm=unaff_hom2, f=aff_het,
                        m=unaff_hom2, c1=aff_het, c2=unaff_hom2)),
        CorpusCase("threegen_sparse", three_generation(2, "g3"), part,
                   _obs(gf=aff_only, f=het, c1=aff_hom1)),
        CorpusCase("halfsib_recessive", half_sib_family("h1"), rec,
                   _obs(m=unaff_het, f1=unaff_het, f2=unaff_het,
                        c1=aff_hom1, c2=aff_hom1)),
        CorpusCase("halfsib_marker_only", half_sib_family("h2"), dom,
                   _obs(m=het, f1=hom1, f2=hom2, c1=het, c2=het)),
        CorpusCase("phase_known_pair", phase_known_meioses(0, 2, "pk")[0],
                   recessive_model(0.1, (0.5, 0.5)),
                   phase_known_meioses(0, 2, "pk")[1]),
        CorpusCase("phase_known_with_recombinant",
                   phase_known_meioses(1, 2, "pkr")[0],
                   recessive_model(0.1, (0.5, 0.5)),
                   phase_known_meioses(1, 2, "pkr")[1]),
        CorpusCase("trio_marker_3alleles", trio("t8"), rec3,
                   _obs(f=IndividualObservation(marker=(0, 1)),
                        m=IndividualObservation(marker=(1, 2)),
                        c=IndividualObservation(phenotype=AFF, marker=(1, 1)))),
        CorpusCase("nuclear2_marker_4alleles", nuclear_family(2, "n5"), dom4,
                   _obs(f=IndividualObservation(phenotype=AFF, marker=(0, 1)),
                        m=IndividualObservation(phenotype=UNAFF, marker=(2, 3)),
                        c1=IndividualObservation(phenotype=AFF, marker=(0, 2)),
                        c2=IndividualObservation(phenotype=UNAFF, marker=(1, 3)))),
        CorpusCase("single_founder", validate_pedigree([Individual("s")], "s1"),
                   rec, _obs(s=het)),
        CorpusCase("two_disconnected_trios",
                   validate_pedigree(
                       [Individual("f1"), Individual("m1"),
                        Individual("c1", father="f1", mother="m1"),
                        Individual("f2"), Individual("m2"),
                        Individual("c2", father="f2", mother="m2")],
                       "d1"),
                   rec,
                   _obs(f1=unaff_het, m1=unaff_het, c1=aff_hom1,
                        f2=het, m2=hom1, c2=het)),
        CorpusCase("uninformative_phenotypes", nuclear_family(3, "n6"),
                   uninformative_model((0.3, 0.7)),
                   _obs(f=aff_het, m=unaff_het, c1=aff_hom1,
                        c2=aff_het, c3=unaff_het)),
    ]
    return tuple(cases)


@dataclass(frozen=True)
class CheckResult:
    case: str
    chi: float
    peel_loglik: float
    enumeration_loglik: float
    passed: bool


def run_self_test(
    chis: Sequence[float] = CHECK_CHI_VALUES,
    relative_tol: float = CHECK_RELATIVE_TOL,
) -> list[CheckResult]:
    """Compare peeling against enumeration on every corpus case."""
    results = []
    for case in build_corpus():
        for chi in chis:
            peel = pedigree_loglik(
                case.pedigree, case.model, case.data, chi, method="peel"
            )
            brute = brute_force_loglik(case.pedigree, case.model, case.data, chi)
            if math.isinf(peel) or math.isinf(brute):
                passed = peel == brute
            else:
                passed = abs(peel - brute) <= relative_tol * max(1.0, abs(peel))
            results.append(
                CheckResult(
                    case=case.name,
                    chi=chi,
                    peel_loglik=peel,
                    enumeration_loglik=brute,
                    passed=passed,
                )
            )
    return results
