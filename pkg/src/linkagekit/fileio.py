"""Text and JSON interchange formats.

Pedigree file (whitespace-delimited, one individual per line):

    familyId individualId fatherId motherId sex

with 0 meaning absent/unknown for parents and sex.  Lines beginning
with '#' are ignored; any other malformed line is a hard error carrying
its line number.

Data file: the same columns extended by phenotype and marker alleles,

    familyId individualId fatherId motherId sex phenotype m1 m2

where phenotype is 2 = affected, 1 = unaffected, 0 = unknown, and m1 m2
are 1-based allele indices with ``0 0`` meaning missing.  A half-typed
marker (exactly one allele 0) is not representable in the model and is
treated as fully missing with a warning.

Model configuration (JSON): ``trait`` and ``marker`` objects each with
``frequencies`` and optional ``alleles`` and ``name``; ``penetrance``
keyed by unordered trait genotype ("a/b" allele names); optional
``chi`` default.  Phenotype-system configuration (JSON): ``alleles``,
``membership`` keyed the same way, optional ``counts``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError
from .genecount import PhenotypeSystem
from .likelihood import IndividualObservation, ObservedData
from .model import Locus, PenetranceModel, Phenotype, TwoLocusModel
from .pedigree import Individual, Pedigree, Sex, validate_pedigree


def _tokenize(text: str):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield number, line.split()


def _parse_sex(token: str, line_number: int) -> Sex:
    try:
        return Sex(int(token))
    except ValueError:
        raise ParseError(f"bad sex code {token!r}", line_number) from None


def _parse_structure(fields, line_number):
    family_id, individual_id, father, mother = fields[:4]
    sex = _parse_sex(fields[4], line_number)
    if individual_id == "0":
        raise ParseError("individual id 0 is reserved for 'absent'", line_number)
    individual = Individual(
        id=individual_id,
        father=None if father == "0" else father,
        mother=None if mother == "0" else mother,
        sex=sex,
    )
    return family_id, individual


def parse_pedigree_file(path: str | Path) -> list[Pedigree]:
    """Parse a 5-column pedigree file into one Pedigree per family."""
    return _parse_pedigrees(Path(path).read_text(), want_data=False)[0]


def parse_data_file(path: str | Path) -> list[tuple[Pedigree, ObservedData]]:
    """Parse an 8-column data file into (Pedigree, ObservedData) pairs."""
    pedigrees, observations = _parse_pedigrees(Path(path).read_text(), want_data=True)
    return [(ped, observations[ped.family_id]) for ped in pedigrees]


def _parse_pedigrees(text: str, want_data: bool):
    n_fields = 8 if want_data else 5
    by_family: dict[str, list[Individual]] = {}
    family_order: list[str] = []
    observations: dict[str, dict[str, IndividualObservation]] = {}
    for line_number, fields in _tokenize(text):
        if len(fields) != n_fields:
            raise ParseError(
                f"expected {n_fields} fields, found {len(fields)}", line_number
            )
        family_id, individual = _parse_structure(fields, line_number)
        if family_id not in by_family:
            by_family[family_id] = []
            observations[family_id] = {}
            family_order.append(family_id)
        by_family[family_id].append(individual)
        if want_data:
            observations[family_id][individual.id] = _parse_observation(
                fields[5:], individual.id, line_number
            )
    if not family_order:
        raise ParseError("file contains no pedigree records")
    pedigrees = [
        validate_pedigree(by_family[fid], family_id=fid) for fid in family_order
    ]
    if not want_data:
        return pedigrees, {}
    return pedigrees, {
        fid: ObservedData(records=observations[fid]) for fid in family_order
    }


def _parse_observation(fields, individual_id, line_number) -> IndividualObservation:
    try:
        phenotype = Phenotype(int(fields[0]))
    except ValueError:
        raise ParseError(f"bad phenotype code {fields[0]!r}", line_number) from None
    try:
        m1, m2 = int(fields[1]), int(fields[2])
    except ValueError:
        raise ParseError("marker alleles must be integers", line_number) from None
    if m1 < 0 or m2 < 0:
        raise ParseError("marker alleles must be nonnegative", line_number)
    if (m1 == 0) != (m2 == 0):
        warnings.warn(
            f"individual {individual_id!r}: half-typed marker treated as missing",
            stacklevel=2,
        )
        marker = None
    elif m1 == 0:
        marker = None
    else:
        marker = (m1 - 1, m2 - 1)
    return IndividualObservation(phenotype=phenotype, marker=marker)


def format_data_file(families: Iterable[tuple[Pedigree, ObservedData]]) -> str:
    """Render families in the 8-column data format."""
    lines = ["# familyId individualId fatherId motherId sex phenotype m1 m2"]
    for pedigree, data in families:
        for ind in pedigree.individuals:
            obs = data.observation(ind.id)
            m1, m2 = (0, 0) if obs.marker is None else (
                obs.marker[0] + 1,
                obs.marker[1] + 1,
            )
            lines.append(
                f"{pedigree.family_id} {ind.id} {ind.father or 0} "
                f"{ind.mother or 0} {int(ind.sex)} {int(obs.phenotype)} {m1} {m2}"
            )
    return "\n".join(lines) + "\n"


def write_data_file(
    path: str | Path, families: Iterable[tuple[Pedigree, ObservedData]]
) -> None:
    """Write families in the 8-column data format."""
    Path(path).write_text(format_data_file(families))


# ----------------------------------------------------------------------
# JSON configurations
# ----------------------------------------------------------------------


def _locus_from_config(obj, default_name: str) -> Locus:
    if not isinstance(obj, dict) or "frequencies" not in obj:
        raise ParseError(f"locus {default_name!r} needs a 'frequencies' list")
    return Locus(
        name=str(obj.get("name", default_name)),
        frequencies=tuple(float(f) for f in obj["frequencies"]),
        alleles=tuple(obj["alleles"]) if "alleles" in obj else None,
    )


def _genotype_key(key: str, locus: Locus, context: str) -> tuple[int, int]:
    parts = key.split("/")
    if len(parts) != 2:
        raise ParseError(f"{context}: bad genotype key {key!r}")
    i, j = locus.allele_index(parts[0]), locus.allele_index(parts[1])
    return (min(i, j), max(i, j))


def load_model_config(path: str | Path) -> TwoLocusModel:
    """Load a two-locus model from its JSON configuration."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    for key in ("trait", "marker", "penetrance"):
        if key not in obj:
            raise ParseError(f"model config lacks {key!r}")
    trait = _locus_from_config(obj["trait"], "trait")
    marker = _locus_from_config(obj["marker"], "marker")
    table = {
        _genotype_key(k, trait, "penetrance"): float(v)
        for k, v in obj["penetrance"].items()
    }
    chi = obj.get("chi")
    return TwoLocusModel(
        trait=trait,
        marker=marker,
        penetrance=PenetranceModel.from_dict(table),
        chi=None if chi is None else float(chi),
    )


def load_phenotype_system(path: str | Path):
    """Load a phenotype system plus optional counts from JSON."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from exc
    for key in ("alleles", "membership"):
        if key not in obj:
            raise ParseError(f"phenotype system config lacks {key!r}")
    system = PhenotypeSystem.from_names(
        alleles=[str(a) for a in obj["alleles"]],
        membership={str(k): str(v) for k, v in obj["membership"].items()},
    )
    counts = obj.get("counts")
    if counts is not None:
        counts = {str(k): int(v) for k, v in counts.items()}
    return system, counts


def parse_sib_pair_file(path: str | Path):
    """Parse the 4-column sib-pair TSV of booleans.

    Columns: sib1 trait-A value, sib2 trait-A value, sib1 trait-B value,
    sib2 trait-B value (0/1 per sib); concordance is derived per trait.
    """
    from .familytests import SibPair

    pairs = []
    for line_number, fields in _tokenize(Path(path).read_text()):
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, found {len(fields)}", line_number)
        try:
            a1, a2, b1, b2 = (int(f) for f in fields)
        except ValueError:
            raise ParseError("sib-pair fields must be 0/1", line_number) from None
        if any(v not in (0, 1) for v in (a1, a2, b1, b2)):
            raise ParseError("sib-pair fields must be 0/1", line_number)
        pairs.append(SibPair(trait_a_concordant=a1 == a2, trait_b_concordant=b1 == b2))
    if not pairs:
        raise ParseError("file contains no sib pairs")
    return pairs


def parse_homozygosity_file(path: str | Path):
    """Parse homozygosity inputs: columns F, allele frequency, m1, m2
    (1-based allele indices)."""
    from .familytests import HomozygosityInput

    rows = []
    for line_number, fields in _tokenize(Path(path).read_text()):
        if len(fields) != 4:
            raise ParseError(f"expected 4 fields, found {len(fields)}", line_number)
        try:
            f_coef = float(fields[0])
            freq = float(fields[1])
            m1, m2 = int(fields[2]), int(fields[3])
        except ValueError:
            raise ParseError("bad homozygosity record", line_number) from None
        if m1 < 1 or m2 < 1:
            raise ParseError("marker alleles must be 1-based", line_number)
        rows.append(
            HomozygosityInput(
                inbreeding_coefficient=f_coef,
                marker_allele_frequency=freq,
                observed_genotype=(m1 - 1, m2 - 1),
            )
        )
    if not rows:
        raise ParseError("file contains no homozygosity records")
    return rows
