"""Pedigree data model, validation, and peeling order.

A pedigree is a directed family structure of founders (no parents) and
non-founders (both parents present).  Likelihood evaluation exploits
the cut structure of loop-free pedigrees: nuclear families form a tree
connected through shared individuals ("pivots"), and conditioning on a
pivot makes the data on the two sides independent.  ``peeling_order``
computes a family elimination order with that cut property, or raises
``LoopDetectedError`` when the marriage-node graph has a loop (e.g. a
first-cousin marriage), in which case likelihoods fall back to
enumeration.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

from .errors import (
    CycleDetectedError,
    EmptyPedigreeError,
    HalfSpecifiedParentsError,
    InvalidStructureError,
    LoopDetectedError,
    MissingParentError,
)


class Sex(enum.IntEnum):
    """Optional sex code; unused by the autosomal model, kept for file
    fidelity (0 = unknown, 1 = male, 2 = female)."""

    UNKNOWN = 0
    MALE = 1
    FEMALE = 2


def _id_key(identifier: str) -> tuple[int, str]:
    # length-then-lexicographic: numeric-string ids sort numerically,
    # and the order is total for arbitrary strings
    return (len(identifier), identifier)


@dataclass(frozen=True)
class Individual:
    """One pedigree member.  Parents are both present or both absent."""

    id: str
    father: str | None = None
    mother: str | None = None
    sex: Sex = Sex.UNKNOWN

    def __post_init__(self):
        object.__setattr__(self, "id", str(self.id))
        if self.father is not None:
            object.__setattr__(self, "father", str(self.father))
        if self.mother is not None:
            object.__setattr__(self, "mother", str(self.mother))

    @property
    def is_founder(self) -> bool:
        return self.father is None


@dataclass(frozen=True)
class NuclearFamily:
    """A parent pair and their joint children within one pedigree."""

    father: str
    mother: str
    children: tuple[str, ...]

    @property
    def members(self) -> tuple[str, ...]:
        return (self.father, self.mother) + self.children


@dataclass(frozen=True)
class Pedigree:
    """A validated pedigree.  Construct through ``validate_pedigree``."""

    family_id: str
    individuals: tuple[Individual, ...]

    @cached_property
    def members(self) -> dict[str, Individual]:
        return {ind.id: ind for ind in self.individuals}

    @cached_property
    def founders(self) -> tuple[str, ...]:
        return tuple(ind.id for ind in self.individuals if ind.is_founder)

    @cached_property
    def non_founders(self) -> tuple[str, ...]:
        return tuple(ind.id for ind in self.individuals if not ind.is_founder)

    @cached_property
    def nuclear_families(self) -> tuple[NuclearFamily, ...]:
        children: dict[tuple[str, str], list[str]] = {}
        for ind in self.individuals:
            if ind.is_founder:
                continue
            children.setdefault((ind.father, ind.mother), []).append(ind.id)
        fams = [
            NuclearFamily(father, mother, tuple(sorted(kids, key=_id_key)))
            for (father, mother), kids in children.items()
        ]
        fams.sort(key=lambda f: (_id_key(f.father), _id_key(f.mother)))
        return tuple(fams)

    def __len__(self) -> int:
        return len(self.individuals)

    def __contains__(self, identifier: str) -> bool:
        return str(identifier) in self.members


def validate_pedigree(
    raw: Iterable[Individual] | Pedigree, family_id: str = "1"
) -> Pedigree:
    """Validate individual records into a Pedigree.

    Checks: non-empty; unique ids; parents both present or both absent;
    referenced parents exist; no self-mating; the parent relation is
    acyclic; at least one founder.  Idempotent: a valid Pedigree is
    returned unchanged.
    """
    if isinstance(raw, Pedigree):
        _check_structure(raw.individuals, raw.family_id)
        return raw
    individuals = tuple(raw)
    _check_structure(individuals, family_id)
    return Pedigree(family_id=str(family_id), individuals=individuals)


def _check_structure(individuals: Sequence[Individual], family_id: str) -> None:
    if not individuals:
        raise EmptyPedigreeError(f"family {family_id!r}: no individuals")
    seen: set[str] = set()
    for ind in individuals:
        if ind.id in seen:
            raise InvalidStructureError(
                f"family {family_id!r}: duplicate individual {ind.id!r}"
            )
        seen.add(ind.id)
    for ind in individuals:
        if (ind.father is None) != (ind.mother is None):
            raise HalfSpecifiedParentsError(
                f"family {family_id!r}: individual {ind.id!r} has exactly one parent"
            )
        if ind.is_founder:
            continue
        if ind.father == ind.id or ind.mother == ind.id:
            raise CycleDetectedError(
                f"family {family_id!r}: individual {ind.id!r} is its own parent"
            )
        if ind.father == ind.mother:
            raise InvalidStructureError(
                f"family {family_id!r}: individual {ind.id!r} has identical parents"
            )
        for parent in (ind.father, ind.mother):
            if parent not in seen:
                raise MissingParentError(
                    f"family {family_id!r}: parent {parent!r} of {ind.id!r} not found"
                )
    _check_acyclic(individuals, family_id)
    if not any(ind.is_founder for ind in individuals):
        # an all-non-founder pedigree is necessarily cyclic, so this is
        # unreachable after the acyclicity check; kept as a guard
        raise CycleDetectedError(f"family {family_id!r}: no founder exists")


def _check_acyclic(individuals: Sequence[Individual], family_id: str) -> None:
    # Kahn's algorithm on parent -> child edges
    parents = {ind.id: (ind.father, ind.mother) for ind in individuals}
    indegree = {iid: 0 for iid in parents}
    children: dict[str, list[str]] = {iid: [] for iid in parents}
    for iid, (fa, mo) in parents.items():
        if fa is None:
            continue
        indegree[iid] = 2
        children[fa].append(iid)
        children[mo].append(iid)
    queue = [iid for iid, deg in indegree.items() if deg == 0]
    done = 0
    while queue:
        iid = queue.pop()
        done += 1
        for child in children[iid]:
            indegree[child] -= 1
            if indegree[child] == 0:
                queue.append(child)
    if done != len(parents):
        raise CycleDetectedError(
            f"family {family_id!r}: ancestor loop in the parent relation"
        )


@dataclass(frozen=True)
class PeelStep:
    """Eliminate one nuclear family, passing its information to the pivot.

    ``pivot`` is the single individual connecting this family to the
    not-yet-peeled remainder; None for the final family of a connected
    component.
    """

    family: NuclearFamily
    pivot: str | None


@dataclass(frozen=True)
class PeelingOrder:
    """Family elimination order plus members of no nuclear family."""

    steps: tuple[PeelStep, ...]
    isolated: tuple[str, ...]


def peeling_order(pedigree: Pedigree) -> PeelingOrder:
    """Compute a peeling order over nuclear families.

    A family is peelable when at most one of its members still connects
    to other unpeeled families; that member becomes the pivot.  A valid
    order exists iff the marriage-node graph is loop-free; otherwise
    ``LoopDetectedError`` is raised and callers should use enumeration.
    Deterministic: families and candidate pivots are taken in smallest-id
    order.
    """
    families = list(pedigree.nuclear_families)
    in_any_family: set[str] = set()
    for fam in families:
        in_any_family.update(fam.members)
    isolated = tuple(
        ind.id for ind in pedigree.individuals if ind.id not in in_any_family
    )

    active = list(range(len(families)))
    membership: dict[str, set[int]] = {}
    for idx, fam in enumerate(families):
        for member in fam.members:
            membership.setdefault(member, set()).add(idx)

    steps: list[PeelStep] = []
    while active:
        chosen = None
        for idx in active:
            shared = [
                m for m in families[idx].members if len(membership[m]) >= 2
            ]
            if len(shared) <= 1:
                pivot = shared[0] if shared else None
                chosen = (idx, pivot)
                break
        if chosen is None:
            raise LoopDetectedError(
                f"family {pedigree.family_id!r}: marriage-node graph has a loop; "
                "use enumeration"
            )
        idx, pivot = chosen
        steps.append(PeelStep(family=families[idx], pivot=pivot))
        active.remove(idx)
        for member in families[idx].members:
            membership[member].discard(idx)
    return PeelingOrder(steps=tuple(steps), isolated=isolated)


def _relationship_graph(pedigree: Pedigree) -> dict[str, set[str]]:
    """Undirected graph with parent-child and co-parent (mate) edges."""
    adj: dict[str, set[str]] = {ind.id: set() for ind in pedigree.individuals}
    for ind in pedigree.individuals:
        if ind.is_founder:
            continue
        adj[ind.id].add(ind.father)
        adj[ind.id].add(ind.mother)
        adj[ind.father].add(ind.id)
        adj[ind.mother].add(ind.id)
        adj[ind.father].add(ind.mother)
        adj[ind.mother].add(ind.father)
    return adj


def pivot_separates(pedigree: Pedigree, order: PeelingOrder) -> bool:
    """Graph check of the cut property of every peeling step.

    For each step with a pivot, deleting the pivot from the relationship
    graph must disconnect the already-peeled individuals from everyone
    else.  Used by the self-test corpus.
    """
    adj = _relationship_graph(pedigree)
    eliminated: set[str] = set()
    for step in order.steps:
        members = set(step.family.members)
        if step.pivot is None:
            eliminated |= members
            continue
        peeled_side = (eliminated | members) - {step.pivot}
        other_side = set(adj) - peeled_side - {step.pivot}
        if other_side:
            reachable = _reachable(adj, peeled_side, forbidden={step.pivot})
            if reachable & other_side:
                return False
        eliminated |= members - {step.pivot}
    return True


def _reachable(
    adj: dict[str, set[str]], sources: set[str], forbidden: set[str]
) -> set[str]:
    seen = set(sources)
    stack = list(sources)
    while stack:
        node = stack.pop()
        for nxt in adj[node]:
            if nxt in forbidden or nxt in seen:
                continue
            seen.add(nxt)
            stack.append(nxt)
    return seen
