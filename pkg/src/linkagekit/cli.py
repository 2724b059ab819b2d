"""Command-line front end.

Commands: lodscan, mle, sprt, fdr, elod, hettest, em, tdt, sibpair,
homozygosity, simulate, power, check.  Outputs are JSON records (or TSV
tables for curves and trajectories) carrying a config echo that allows
an exact rerun; numbers are printed with 10 significant digits.  Exit
codes: 0 success, 1 analysis error, 2 usage error, 3 file not found.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path
from typing import Sequence

from . import corpus, detect, familytests, fileio, genecount, sim
from .errors import LinkageKitError
from .likelihood import (
    LodCurve,
    default_chi_grid,
    lod_curve,
    mle_recombination,
    pedigree_loglik,
)

EXIT_OK = 0
EXIT_ANALYSIS_ERROR = 1
EXIT_USAGE = 2
EXIT_FILE_NOT_FOUND = 3

COMMANDS = (
    "lodscan",
    "mle",
    "sprt",
    "fdr",
    "elod",
    "hettest",
    "em",
    "tdt",
    "sibpair",
    "homozygosity",
    "simulate",
    "power",
    "check",
)


class UsageError(Exception):
    pass


@dataclasses.dataclass
class RunConfig:
    command: str
    ped: str | None = None
    model: str | None = None
    chi: float | None = None
    chi_eval: float | None = None
    grid: tuple[float, float, float] | None = None
    alpha: float | None = None
    beta: float | None = None
    pi: float | None = None
    power: float | None = None
    threshold: float | None = None
    replicates: int | None = None
    seed: int | None = None
    missingness: float | None = None
    allele: int | None = None
    out: str | None = None
    format: str = "json"

    def echo(self) -> dict:
        items = {}
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name == "grid":
                value = f"{value[0]:g}:{value[1]:g}:{value[2]:g}"
            items[f.name] = value
        return items


def _fmt(x: float):
    """10-significant-digit value for JSON; infinities become strings."""
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return float(f"{x:.10g}")


def _fmt_str(x: float) -> str:
    return f"{x:.10g}"


def _parse_grid_spec(text: str) -> tuple[float, float, float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"bad grid spec {text!r}; expected lo:step:hi")
    try:
        lo, step, hi = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"bad grid spec {text!r}") from None
    if not (0.0 <= lo < hi <= 0.5) or step <= 0.0:
        raise UsageError("grid must satisfy 0 <= lo < hi <= 0.5 with step > 0")
    return lo, step, hi


def grid_points(spec: tuple[float, float, float] | None) -> tuple[float, ...]:
    if spec is None:
        return default_chi_grid()
    lo, step, hi = spec
    n = round((hi - lo) / step)
    if n < 1 or abs(lo + n * step - hi) > 1e-9:
        raise UsageError("grid step does not divide the interval")
    pts = [lo + k * (hi - lo) / n for k in range(n + 1)]
    pts[-1] = hi
    return tuple(pts)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="linkagekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", metavar="command")
    specs = {
        "lodscan": ("lod curve over a chi grid", ["ped", "model", "grid", "out", "format"]),
        "mle": ("MLE of the recombination fraction", ["ped", "model", "out"]),
        "sprt": ("sequential test over families", ["ped", "model", "alpha", "beta", "chi", "out"]),
        "fdr": ("false discovery rate of a declared linkage", ["alpha", "pi", "power", "out"]),
        "elod": ("expected lod score", ["ped", "model", "chi", "chi_eval", "replicates", "seed", "out"]),
        "hettest": ("locus heterogeneity test", ["ped", "model", "grid", "out"]),
        "em": ("gene-counting EM", ["model", "out", "format"]),
        "tdt": ("transmission disequilibrium test", ["ped", "allele", "out"]),
        "sibpair": ("sib-pair concordance test", ["ped", "out"]),
        "homozygosity": ("homozygosity-mapping score", ["ped", "out"]),
        "simulate": ("gene-drop simulation to a data file", ["ped", "model", "chi", "replicates", "seed", "missingness", "out"]),
        "power": ("Monte Carlo power estimate", ["ped", "model", "chi", "threshold", "replicates", "seed", "grid", "out"]),
        "check": ("peeling vs enumeration self-test", []),
    }
    flag_defs = {
        "ped": dict(type=str, required=True, help="input file"),
        "model": dict(type=str, required=True, help="model config (JSON)"),
        "chi": dict(type=float, required=False, help="recombination fraction"),
        "chi_eval": dict(type=float, required=False, help="evaluation chi (default: --chi)"),
        "grid": dict(type=str, required=False, help="chi grid lo:step:hi"),
        "alpha": dict(type=float, required=True, help="type-1 error rate"),
        "beta": dict(type=float, required=True, help="type-2 error rate"),
        "pi": dict(type=float, required=True, help="prior linkage probability"),
        "power": dict(type=float, required=True, help="average power W"),
        "threshold": dict(type=float, required=True, help="lod threshold"),
        "replicates": dict(type=int, required=False, help="Monte Carlo replicates"),
        "seed": dict(type=int, required=False, help="random seed"),
        "missingness": dict(type=float, required=False, help="marker missingness rate"),
        "allele": dict(type=int, required=False, help="1-based target marker allele"),
        "out": dict(type=str, required=False, help="output path (default: stdout)"),
        "format": dict(type=str, required=False, choices=("json", "tsv"), help="output format"),
    }
    required_overrides = {
        ("sprt", "chi"): True,
        ("elod", "chi"): True,
        ("simulate", "chi"): True,
        ("simulate", "replicates"): True,
        ("simulate", "seed"): True,
        ("power", "chi"): True,
        ("power", "replicates"): True,
        ("power", "seed"): True,
    }
    for name, (help_text, flags) in specs.items():
        p = sub.add_parser(name, help=help_text)
        for flag in flags:
            kwargs = dict(flag_defs[flag])
            if (name, flag) in required_overrides:
                kwargs["required"] = True
            p.add_argument(f"--{flag.replace('_', '-')}", dest=flag, **kwargs)
    return parser


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Parse and validate argv into a RunConfig.

    Raises ``UsageError`` for malformed invocations and
    ``FileNotFoundError`` for missing input paths.
    """
    parser = _build_parser()
    namespace = parser.parse_args(list(argv))
    if namespace.command is None:
        raise UsageError("a command is required")
    values = vars(namespace)
    config = RunConfig(command=values.pop("command"))
    for key, value in values.items():
        if value is None:
            continue
        if key == "grid":
            value = _parse_grid_spec(value)
        setattr(config, key, value)
    if config.format is None:
        config.format = "tsv" if config.command in ("lodscan", "em") else "json"
    for path_attr in ("ped", "model"):
        path = getattr(config, path_attr)
        if path is not None and not Path(path).exists():
            raise FileNotFoundError(path)
    return config


def _emit(config: RunConfig, text: str) -> None:
    if config.out:
        Path(config.out).write_text(text)
    else:
        sys.stdout.write(text)


def _emit_json(config: RunConfig, record: dict) -> None:
    record = dict(record)
    record["config"] = config.echo()
    _emit(config, json.dumps(record, sort_keys=True, indent=2) + "\n")


def _load_families(path: str):
    """Data file (8 columns) or bare pedigree file (5 columns)."""
    from .likelihood import ObservedData

    first_line = None
    for _, fields in fileio._tokenize(Path(path).read_text()):
        first_line = fields
        break
    if first_line is None:
        raise LinkageKitError(f"{path}: no records")
    if len(first_line) == 5:
        return [(ped, ObservedData.empty()) for ped in fileio.parse_pedigree_file(path)]
    return fileio.parse_data_file(path)


def _cmd_lodscan(config: RunConfig) -> int:
    families = _load_families(config.ped)
    model = fileio.load_model_config(config.model)
    grid = grid_points(config.grid)
    per_family = [lod_curve([fam], model, grid) for fam in families]
    total = [sum(curve.lods[j] for curve in per_family) for j in range(len(grid))]
    if config.format == "json":
        _emit_json(
            config,
            {
                "statistic": "lodscan",
                "chi": [_fmt(c) for c in grid],
                "lod": [_fmt(v) for v in total],
                "per_family": {
                    fam[0].family_id: [_fmt(v) for v in curve.lods]
                    for fam, curve in zip(families, per_family)
                },
                "n_used": len(families),
            },
        )
    else:
        lines = ["# config: " + json.dumps(config.echo(), sort_keys=True)]
        header = ["chi", "lod"] + [f"lod_{fam[0].family_id}" for fam in families]
        lines.append("\t".join(header))
        for j, chi in enumerate(grid):
            row = [_fmt_str(chi), _fmt_str(total[j])]
            row += [_fmt_str(curve.lods[j]) for curve in per_family]
            lines.append("\t".join(row))
        _emit(config, "\n".join(lines) + "\n")
    return EXIT_OK


def _cmd_mle(config: RunConfig) -> int:
    families = _load_families(config.ped)
    model = fileio.load_model_config(config.model)
    estimate = mle_recombination(families, model)
    _emit_json(
        config,
        {
            "statistic": "mle_recombination",
            "chi_hat": _fmt(estimate.chi_hat),
            "max_lod": _fmt(estimate.max_lod),
            "flat": estimate.flat,
            "n_used": len(families),
        },
    )
    return EXIT_OK


def _cmd_sprt(config: RunConfig) -> int:
    families = _load_families(config.ped)
    model = fileio.load_model_config(config.model)
    cfg = detect.SprtConfig(alpha=config.alpha, beta=config.beta, chi_alt=config.chi)
    boundaries = detect.sprt_boundaries(cfg)
    from .likelihood import lod

    stream = [lod([fam], model, config.chi) for fam in families]
    decision = detect.sprt_run(stream, boundaries)
    _emit_json(
        config,
        {
            "statistic": "sprt",
            "log10_a": _fmt(boundaries.log10_a),
            "log10_b": _fmt(boundaries.log10_b),
            "decision": decision.outcome.value,
            "step": decision.step,
            "total": _fmt(decision.total),
            "n_used": len(stream),
        },
    )
    return EXIT_OK


def _cmd_fdr(config: RunConfig) -> int:
    value = detect.fdr(config.alpha, config.pi, config.power)
    _emit_json(config, {"statistic": "fdr", "value": _fmt(value)})
    return EXIT_OK


def _cmd_elod(config: RunConfig) -> int:
    families = _load_families(config.ped)
    model = fileio.load_model_config(config.model)
    chi_eval = config.chi_eval if config.chi_eval is not None else config.chi
    total = 0.0
    se_sq = 0.0
    method = None
    for pedigree, _ in families:
        if config.replicates:
            result = detect.elod_monte_carlo(
                pedigree, model, config.chi, chi_eval,
                replicates=config.replicates, seed=config.seed or 0,
            )
            se_sq += result.standard_error**2
        else:
            result = detect.elod_enumerate(pedigree, model, config.chi, chi_eval)
        method = result.method.value
        total += result.value
    record = {
        "statistic": "elod",
        "value": _fmt(total),
        "method": method,
        "n_used": len(families),
    }
    if config.replicates:
        record["se"] = _fmt(math.sqrt(se_sq))
        record["replicates"] = config.replicates
    _emit_json(config, record)
    return EXIT_OK


def _cmd_hettest(config: RunConfig) -> int:
    families = _load_families(config.ped)
    model = fileio.load_model_config(config.model)
    grid = grid_points(config.grid)
    curves = [lod_curve([fam], model, grid) for fam in families]
    result = detect.heterogeneity_test(curves)
    _emit_json(
        config,
        {
            "statistic": "heterogeneity",
            "alpha_hat": _fmt(result.alpha_hat),
            "chi_hat": _fmt(result.chi_hat),
            "lr_statistic": _fmt(result.lr_statistic),
            "n_used": len(curves),
        },
    )
    return EXIT_OK


def _cmd_em(config: RunConfig) -> int:
    system, counts = fileio.load_phenotype_system(config.model)
    if counts is None:
        raise LinkageKitError("phenotype system config lacks 'counts'")
    trajectory = genecount.em_gene_count(system, counts)
    try:
        rate = genecount.em_convergence_rate(trajectory)
    except LinkageKitError:
        rate = None
    if config.format == "tsv":
        lines = ["# config: " + json.dumps(config.echo(), sort_keys=True)]
        lines.append(
            "\t".join(["iteration"] + [f"freq_{a}" for a in system.alleles] + ["loglik"])
        )
        for k, (freqs, loglik) in enumerate(trajectory.iterates):
            lines.append(
                "\t".join([str(k)] + [_fmt_str(f) for f in freqs] + [_fmt_str(loglik)])
            )
        _emit(config, "\n".join(lines) + "\n")
    else:
        _emit_json(
            config,
            {
                "statistic": "em_gene_count",
                "frequencies": {
                    a: _fmt(f)
                    for a, f in zip(system.alleles, trajectory.final_frequencies)
                },
                "loglik": _fmt(trajectory.final_loglik),
                "iterations": len(trajectory) - 1,
                "rate": None if rate is None else _fmt(rate),
            },
        )
    return EXIT_OK


def _cmd_tdt(config: RunConfig) -> int:
    families = fileio.parse_data_file(config.ped)
    target = (config.allele or 1) - 1
    b = c = het = 0
    for pedigree, data in families:
        counts = familytests.count_transmissions(pedigree, data, target)
        b += counts.transmitted_target
        c += counts.untransmitted_target
        het += counts.heterozygous_parent_count
    counts = familytests.TrioTransmission(
        heterozygous_parent_count=het, transmitted_target=b, untransmitted_target=c
    )
    value = familytests.tdt(counts)
    _emit_json(
        config,
        {
            "statistic": "tdt",
            "value": _fmt(value),
            "transmitted": b,
            "untransmitted": c,
            "n_used": len(families),
        },
    )
    return EXIT_OK


def _cmd_sibpair(config: RunConfig) -> int:
    pairs = fileio.parse_sib_pair_file(config.ped)
    result = familytests.sib_pair_test(pairs)
    _emit_json(
        config,
        {
            "statistic": "sib_pair",
            "value": _fmt(result.statistic),
            "table": [list(row) for row in result.table],
            "degenerate": result.degenerate,
            "n_used": len(pairs),
        },
    )
    return EXIT_OK


def _cmd_homozygosity(config: RunConfig) -> int:
    rows = fileio.parse_homozygosity_file(config.ped)
    results = [familytests.homozygosity_score(row) for row in rows]
    total = sum(r.score for r in results)
    _emit_json(
        config,
        {
            "statistic": "homozygosity",
            "value": _fmt(total),
            "per_observation": [_fmt(r.score) for r in results],
            "n_used": len(rows),
        },
    )
    return EXIT_OK


def _cmd_simulate(config: RunConfig) -> int:
    families = _load_families(config.ped)
    model = fileio.load_model_config(config.model)
    cfg = sim.SimConfig(
        chi_true=config.chi,
        replicates=config.replicates,
        seed=config.seed,
        missingness_rate=config.missingness or 0.0,
    )
    out_families = []
    for r in range(cfg.replicates):
        rng = sim.replicate_rng(cfg.seed, r)
        for pedigree, _ in families:
            data = sim.gene_drop(pedigree, model, cfg, r, rng=rng)
            family_id = (
                pedigree.family_id
                if cfg.replicates == 1
                else f"{pedigree.family_id}:r{r}"
            )
            renamed = dataclasses.replace(pedigree, family_id=family_id)
            out_families.append((renamed, data))
    text = "# config: " + json.dumps(config.echo(), sort_keys=True) + "\n"
    text += fileio.format_data_file(out_families)
    if config.out:
        Path(config.out).write_text(text)
        sys.stdout.write(
            json.dumps(
                {"statistic": "simulate", "written": config.out,
                 "families": len(out_families), "config": config.echo()},
                sort_keys=True,
            )
            + "\n"
        )
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_power(config: RunConfig) -> int:
    families = [ped for ped, _ in _load_families(config.ped)]
    model = fileio.load_model_config(config.model)
    cfg = sim.SimConfig(
        chi_true=config.chi, replicates=config.replicates, seed=config.seed
    )
    grid = grid_points(config.grid)
    w, se = sim.estimate_power(
        families, model, config.chi, config.threshold, cfg, chis=grid
    )
    _emit_json(
        config,
        {
            "statistic": "power",
            "value": _fmt(w),
            "se": _fmt(se),
            "replicates": config.replicates,
            "n_used": len(families),
        },
    )
    return EXIT_OK


def _cmd_check(config: RunConfig) -> int:
    results = corpus.run_self_test()
    failures = 0
    by_case: dict[str, list] = {}
    for result in results:
        by_case.setdefault(result.case, []).append(result)
    for case, case_results in by_case.items():
        ok = all(r.passed for r in case_results)
        failures += 0 if ok else 1
        worst = max(
            (
                abs(r.peel_loglik - r.enumeration_loglik)
                for r in case_results
                if math.isfinite(r.peel_loglik)
            ),
            default=0.0,
        )
        status = "PASS" if ok else "FAIL"
        sys.stdout.write(f"{status} {case} (max abs diff {worst:.3e})\n")
    sys.stdout.write(
        f"{len(by_case) - failures}/{len(by_case)} cases passed\n"
    )
    return EXIT_OK if failures == 0 else EXIT_ANALYSIS_ERROR


_HANDLERS = {
    "lodscan": _cmd_lodscan,
    "mle": _cmd_mle,
    "sprt": _cmd_sprt,
    "fdr": _cmd_fdr,
    "elod": _cmd_elod,
    "hettest": _cmd_hettest,
    "em": _cmd_em,
    "tdt": _cmd_tdt,
    "sibpair": _cmd_sibpair,
    "homozygosity": _cmd_homozygosity,
    "simulate": _cmd_simulate,
    "power": _cmd_power,
    "check": _cmd_check,
}


def run(config: RunConfig) -> int:
    """Execute one command; returns the process exit code."""
    handler = _HANDLERS.get(config.command)
    if handler is None:
        raise UsageError(f"unknown command {config.command!r}")
    try:
        return handler(config)
    except LinkageKitError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ANALYSIS_ERROR
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ANALYSIS_ERROR


def main(argv: Sequence[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        config = parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except FileNotFoundError as exc:
        sys.stderr.write(f"file not found: {exc}\n")
        return EXIT_FILE_NOT_FOUND
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
