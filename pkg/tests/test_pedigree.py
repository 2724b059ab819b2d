import pytest

from linkagekit import corpus
from linkagekit.errors import (
    CycleDetectedError,
    EmptyPedigreeError,
    HalfSpecifiedParentsError,
    InvalidStructureError,
    LoopDetectedError,
    MissingParentError,
)
from linkagekit.pedigree import (
    Individual,
    Pedigree,
    peeling_order,
    pivot_separates,
    validate_pedigree,
)


def test_trio_is_valid_with_expected_founders():
    ped = validate_pedigree(
        [
            Individual("c", father="f", mother="m"),
            Individual("f"),
            Individual("m"),
        ]
    )
    assert set(ped.founders) == {"f", "m"}
    assert ped.non_founders == ("c",)


def test_own_father_is_a_cycle():
    with pytest.raises(CycleDetectedError):
        validate_pedigree([Individual("a", father="a", mother="b"), Individual("b")])


def test_ancestor_loop_is_a_cycle():
    with pytest.raises(CycleDetectedError):
        validate_pedigree(
            [
                Individual("a", father="b", mother="x"),
                Individual("b", father="a", mother="x"),
                Individual("x"),
            ]
        )


def test_half_specified_parents_rejected():
    with pytest.raises(HalfSpecifiedParentsError):
        validate_pedigree([Individual("c", father="f", mother=None), Individual("f")])


def test_missing_parent_rejected():
    with pytest.raises(MissingParentError):
        validate_pedigree([Individual("c", father="f", mother="m"), Individual("f")])


def test_empty_pedigree_rejected():
    with pytest.raises(EmptyPedigreeError):
        validate_pedigree([])


def test_duplicate_id_rejected():
    with pytest.raises(InvalidStructureError):
        validate_pedigree([Individual("a"), Individual("a")])


def test_self_mating_rejected():
    with pytest.raises(InvalidStructureError):
        validate_pedigree([Individual("a"), Individual("c", father="a", mother="a")])


def test_validate_is_idempotent():
    ped = corpus.trio()
    assert validate_pedigree(ped) is ped


def test_founder_nonfounder_partition():
    for build in (corpus.trio, corpus.half_sib_family, lambda: corpus.three_generation(2)):
        ped = build()
        assert len(ped.founders) + len(ped.non_founders) == len(ped)
        for iid in ped.non_founders:
            ind = ped.members[iid]
            assert ind.father is not None and ind.mother is not None


def test_trio_peeling_is_single_step_without_pivot():
    order = peeling_order(corpus.trio())
    assert len(order.steps) == 1
    assert order.steps[0].pivot is None
    assert order.isolated == ()


def test_three_generation_peels_through_the_middle_parent():
    ped = corpus.three_generation(1)
    order = peeling_order(ped)
    assert len(order.steps) == 2
    pivots = [step.pivot for step in order.steps]
    assert pivots == ["f", None]
    assert pivot_separates(ped, order)


def test_half_sib_peeling_uses_the_shared_mother():
    ped = corpus.half_sib_family()
    order = peeling_order(ped)
    assert len(order.steps) == 2
    assert order.steps[0].pivot == "m"
    assert pivot_separates(ped, order)


def test_each_individual_eliminated_exactly_once():
    for build in (
        corpus.trio,
        corpus.half_sib_family,
        lambda: corpus.three_generation(3),
        lambda: corpus.phase_known_family(4),
    ):
        ped = build()
        order = peeling_order(ped)
        eliminated = list(order.isolated)
        seen_pivots: set[str] = set()
        for step in order.steps:
            for member in step.family.members:
                if member == step.pivot:
                    continue
                if member not in seen_pivots:
                    eliminated.append(member)
            if step.pivot is None:
                # final family of a component: previously pivoted members
                # are closed out here
                continue
            seen_pivots.add(step.pivot)
        # pivots are eliminated in the family where they stop connecting
        all_ids = {ind.id for ind in ped.individuals}
        assert set(eliminated) | seen_pivots == all_ids


def test_first_cousin_marriage_is_a_loop():
    with pytest.raises(LoopDetectedError):
        peeling_order(corpus.first_cousin_marriage())


def test_sib_mating_is_a_loop():
    with pytest.raises(LoopDetectedError):
        peeling_order(corpus.sib_mating())


def test_isolated_individuals_are_reported():
    ped = validate_pedigree([Individual("a"), Individual("b")])
    order = peeling_order(ped)
    assert order.steps == ()
    assert set(order.isolated) == {"a", "b"}


def test_cut_property_across_corpus():
    for case in corpus.build_corpus():
        order = peeling_order(case.pedigree)
        assert pivot_separates(case.pedigree, order), case.name
