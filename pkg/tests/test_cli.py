import json
import math

import pytest

from linkagekit import cli, corpus, fileio
from linkagekit.cli import RunConfig, UsageError, main, parse_args, run


@pytest.fixture()
def meioses_file(tmp_path):
    """Data file with the 10-meiosis zero-recombinant family."""
    ped, data, _ = corpus.phase_known_meioses(0, 10, "fam1")
    path = tmp_path / "meioses.dat"
    fileio.write_data_file(path, [(ped, data)])
    return path


@pytest.fixture()
def model_file(tmp_path):
    config = {
        "trait": {"frequencies": [0.1, 0.9], "alleles": ["d", "+"]},
        "marker": {"frequencies": [0.5, 0.5]},
        "penetrance": {"d/d": 1.0, "d/+": 0.0, "+/+": 0.0},
    }
    path = tmp_path / "model.json"
    path.write_text(json.dumps(config))
    return path


class TestParseArgs:
    def test_lodscan_defaults(self, meioses_file, model_file):
        config = parse_args(
            ["lodscan", "--ped", str(meioses_file), "--model", str(model_file)]
        )
        assert config.command == "lodscan"
        assert config.grid is None
        assert cli.grid_points(config.grid) == tuple(
            k * 0.5 / 50 for k in range(50)
        ) + (0.5,)

    def test_missing_required_flag_is_usage_error(self):
        with pytest.raises(UsageError):
            parse_args(["lodscan"])

    def test_unknown_flag_rejected(self, meioses_file, model_file):
        with pytest.raises(UsageError):
            parse_args(
                ["lodscan", "--ped", str(meioses_file), "--model", str(model_file),
                 "--bogus", "1"]
            )

    def test_unknown_command_rejected(self):
        with pytest.raises(UsageError):
            parse_args(["frobnicate"])

    def test_fdr_direct_evaluation_config(self):
        config = parse_args(
            ["fdr", "--alpha", "0.001", "--pi", "0.05", "--power", "1.0"]
        )
        assert config.command == "fdr"
        assert config.alpha == 0.001

    def test_missing_file_raises(self, model_file):
        with pytest.raises(FileNotFoundError):
            parse_args(
                ["lodscan", "--ped", "/no/such/file", "--model", str(model_file)]
            )

    def test_main_exit_codes(self, model_file):
        assert main(["lodscan"]) == cli.EXIT_USAGE
        assert (
            main(["lodscan", "--ped", "/no/such/file", "--model", str(model_file)])
            == cli.EXIT_FILE_NOT_FOUND
        )


class TestCommands:
    def test_lodscan_reports_three_at_zero(self, meioses_file, model_file, tmp_path):
        out = tmp_path / "scan.tsv"
        code = main(
            [
                "lodscan",
                "--ped", str(meioses_file),
                "--model", str(model_file),
                "--grid", "0:0.05:0.5",
                "--out", str(out),
                "--format", "tsv",
            ]
        )
        assert code == 0
        lines = [
            line for line in out.read_text().splitlines() if not line.startswith("#")
        ]
        header = lines[0].split("\t")
        assert header[:2] == ["chi", "lod"]
        first = lines[1].split("\t")
        assert float(first[0]) == 0.0
        assert float(first[1]) == pytest.approx(10 * math.log10(2), abs=1e-6)
        last = lines[-1].split("\t")
        assert float(last[0]) == 0.5
        assert float(last[1]) == 0.0

    def test_lodscan_json_breaks_out_families(self, meioses_file, model_file, tmp_path):
        out = tmp_path / "scan.json"
        code = main(
            ["lodscan", "--ped", str(meioses_file), "--model", str(model_file),
             "--out", str(out), "--format", "json"]
        )
        assert code == 0
        record = json.loads(out.read_text())
        assert record["statistic"] == "lodscan"
        assert "fam1" in record["per_family"]
        assert record["config"]["command"] == "lodscan"

    def test_fdr_value(self, tmp_path, capsys):
        code = main(["fdr", "--alpha", "0.001", "--pi", "0.05", "--power", "1.0"])
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["value"] == pytest.approx(0.019 / 1.019, rel=1e-9)
        assert record["config"]["alpha"] == 0.001

    def test_mle_output(self, meioses_file, model_file, tmp_path):
        out = tmp_path / "mle.json"
        code = main(
            ["mle", "--ped", str(meioses_file), "--model", str(model_file),
             "--out", str(out)]
        )
        assert code == 0
        record = json.loads(out.read_text())
        assert record["chi_hat"] == 0.0
        assert record["max_lod"] == pytest.approx(3.010299957, rel=1e-9)

    def test_sprt_declares_linkage(self, meioses_file, model_file, capsys):
        # the family's lod at chi = 0.05 is 10*log10(1.9) ~ 2.79, which
        # crosses log10(95) ~ 1.98 on the first step
        code = main(
            ["sprt", "--ped", str(meioses_file), "--model", str(model_file),
             "--alpha", "0.01", "--beta", "0.05", "--chi", "0.05"]
        )
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["decision"] == "declare_linkage"
        assert record["step"] == 1

    def test_elod_enumeration(self, model_file, tmp_path, capsys):
        ped = corpus.nuclear_family(2, "n")
        path = tmp_path / "fam.dat"
        fileio.write_data_file(path, [(ped, corpus.ObservedData.empty())])
        code = main(
            ["elod", "--ped", str(path), "--model", str(model_file),
             "--chi", "0.5"]
        )
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["method"] == "enumeration"
        assert record["value"] == pytest.approx(0.0, abs=1e-12)

    def test_em_trajectory_and_summary(self, tmp_path, capsys):
        config = {
            "alleles": ["A", "B", "O"],
            "membership": {
                "A/A": "A", "A/O": "A", "B/B": "B", "B/O": "B",
                "A/B": "AB", "O/O": "O",
            },
            "counts": {"A": 186, "B": 38, "AB": 13, "O": 284},
        }
        path = tmp_path / "abo.json"
        path.write_text(json.dumps(config))
        out = tmp_path / "traj.tsv"
        code = main(["em", "--model", str(path), "--out", str(out), "--format", "tsv"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[1].split("\t")[0] == "iteration"
        code = main(["em", "--model", str(path), "--format", "json"])
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["frequencies"]["O"] == pytest.approx(0.7363, abs=2e-4)

    def test_tdt_and_sibpair_and_homozygosity(self, tmp_path, capsys):
        data = tmp_path / "trio.dat"
        data.write_text("1 f 0 0 1 0 1 2\n1 m 0 0 2 0 2 2\n1 c f m 0 2 1 2\n")
        assert main(["tdt", "--ped", str(data), "--allele", "1"]) == 0
        record = json.loads(capsys.readouterr().out)
        assert record["transmitted"] == 1
        assert record["untransmitted"] == 0

        pairs = tmp_path / "pairs.tsv"
        pairs.write_text("1 1 1 1\n0 1 0 1\n1 1 0 0\n0 0 1 1\n")
        assert main(["sibpair", "--ped", str(pairs)]) == 0
        record = json.loads(capsys.readouterr().out)
        assert record["n_used"] == 4

        hom = tmp_path / "hom.tsv"
        hom.write_text("0.0625 0.05 1 1\n")
        assert main(["homozygosity", "--ped", str(hom)]) == 0
        record = json.loads(capsys.readouterr().out)
        assert record["value"] == pytest.approx(math.log10(20), rel=1e-9)

    def test_simulate_then_lodscan_round_trip(
        self, meioses_file, model_file, tmp_path, capsys
    ):
        sim_out = tmp_path / "sim.dat"
        code = main(
            ["simulate", "--ped", str(meioses_file), "--model", str(model_file),
             "--chi", "0.0", "--replicates", "3", "--seed", "42",
             "--out", str(sim_out)]
        )
        assert code == 0
        capsys.readouterr()
        code = main(
            ["lodscan", "--ped", str(sim_out), "--model", str(model_file),
             "--grid", "0:0.1:0.5", "--format", "json",
             "--out", str(tmp_path / "scan.json")]
        )
        assert code == 0
        record = json.loads((tmp_path / "scan.json").read_text())
        assert record["n_used"] == 3

    def test_power_command(self, meioses_file, model_file, tmp_path, capsys):
        code = main(
            ["power", "--ped", str(meioses_file), "--model", str(model_file),
             "--chi", "0.5", "--threshold", "0", "--replicates", "5",
             "--seed", "7", "--grid", "0:0.25:0.5"]
        )
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert record["value"] == 1.0

    def test_hettest_command(self, model_file, tmp_path, capsys):
        fams = []
        for k, rec in enumerate((0, 0, 3)):
            ped, data, _ = corpus.phase_known_meioses(rec, 6, f"fam{k}")
            fams.append((ped, data))
        path = tmp_path / "fams.dat"
        fileio.write_data_file(path, fams)
        code = main(
            ["hettest", "--ped", str(path), "--model", str(model_file),
             "--grid", "0:0.05:0.5"]
        )
        assert code == 0
        record = json.loads(capsys.readouterr().out)
        assert 0.0 <= record["alpha_hat"] <= 1.0
        assert record["lr_statistic"] >= 0.0

    def test_check_command_passes(self, capsys):
        assert main(["check"]) == 0
        output = capsys.readouterr().out
        assert "PASS" in output
        assert "FAIL" not in output

    def test_byte_identical_reruns(self, meioses_file, model_file, tmp_path):
        out1 = tmp_path / "a.json"
        out2 = tmp_path / "b.json"
        args = ["mle", "--ped", str(meioses_file), "--model", str(model_file)]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        text1 = out1.read_text().replace("a.json", "OUT")
        text2 = out2.read_text().replace("b.json", "OUT")
        assert text1 == text2

    def test_simulate_deterministic_given_seed(
        self, meioses_file, model_file, tmp_path
    ):
        out1 = tmp_path / "s1.dat"
        out2 = tmp_path / "s2.dat"
        base = ["simulate", "--ped", str(meioses_file), "--model", str(model_file),
                "--chi", "0.1", "--replicates", "2", "--seed", "9"]
        assert main(base + ["--out", str(out1)]) == 0
        assert main(base + ["--out", str(out2)]) == 0
        assert out1.read_text().replace("s1.dat", "O") == out2.read_text().replace(
            "s2.dat", "O"
        )
