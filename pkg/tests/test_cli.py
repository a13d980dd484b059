import json
import math

import pytest

from typecpd.cli import main


def run(args, capsys):
    code = main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_csv(path):
    lines = path.read_text().strip().splitlines()
    header = lines[0].split(",")
    return [dict(zip(header, line.split(","))) for line in lines[1:]]


@pytest.fixture
def worked_instance(tmp_path):
    (tmp_path / "x.txt").write_text("0 0 1 1\n")
    (tmp_path / "y1.txt").write_text("0 0\n")
    (tmp_path / "y2.txt").write_text("1 1\n")
    return tmp_path


class TestDetectCommand:
    def detect_args(self, d, out, lam="0.05", delta="0"):
        return [
            "detect",
            "--test-file", str(d / "x.txt"),
            "--train1-file", str(d / "y1.txt"),
            "--train2-file", str(d / "y2.txt"),
            "--theta", "0.25",
            "--lambda", lam,
            "--delta", delta,
            "--threshold-mode", "raw",
            "-o", str(out),
        ]

    def test_declares_on_worked_instance(self, worked_instance, tmp_path, capsys):
        out = tmp_path / "verdict.json"
        code, stdout, _ = run(self.detect_args(worked_instance, out), capsys)
        assert code == 0
        record = json.loads(stdout)
        assert record["verdict"] == "change_point"
        assert record["index"] == 2
        assert record["i_star"] == 2
        assert record["min_competing_l"] == pytest.approx(0.14811740, abs=1e-6)
        assert record["threshold"] == 0.05
        assert json.loads(out.read_text()) == record

    def test_erases_at_large_lambda(self, worked_instance, tmp_path, capsys):
        out = tmp_path / "verdict.json"
        code, stdout, _ = run(
            self.detect_args(worked_instance, out, lam="0.5"), capsys)
        assert code == 0
        assert json.loads(stdout)["verdict"] == "erasure"

    def test_empty_competing_set(self, worked_instance, tmp_path, capsys):
        out = tmp_path / "verdict.json"
        code, stdout, _ = run(
            self.detect_args(worked_instance, out, lam="0.5", delta="2"), capsys)
        assert code == 0
        record = json.loads(stdout)
        assert record["verdict"] == "change_point"
        assert record["min_competing_l"] == math.inf

    def test_malformed_file_exits_2(self, worked_instance, tmp_path, capsys):
        (worked_instance / "x.txt").write_text("0 zero 1 1\n")
        out = tmp_path / "verdict.json"
        code, _, stderr = run(self.detect_args(worked_instance, out), capsys)
        assert code == 2
        assert "line 1, token 2" in stderr

    def test_empty_interval_exits_3(self, tmp_path, capsys):
        (tmp_path / "x.txt").write_text("0 1 1\n")
        (tmp_path / "y1.txt").write_text("0\n")
        (tmp_path / "y2.txt").write_text("1\n")
        code, _, stderr = run(
            [
                "detect",
                "--test-file", str(tmp_path / "x.txt"),
                "--train1-file", str(tmp_path / "y1.txt"),
                "--train2-file", str(tmp_path / "y2.txt"),
                "--theta", "0.45",
                "--lambda", "0.1",
                "-o", str(tmp_path / "v.json"),
            ],
            capsys,
        )
        assert code == 3
        assert "configuration error" in stderr


class TestResolutionCommand:
    def test_ld_rows_capped_and_saturate(self, tmp_path, capsys):
        out = tmp_path / "ld.csv"
        code, _, _ = run(
            [
                "resolution", "--p1", "bern:0.6", "--p2", "bern:0.2",
                "--theta", "0.2", "--r", "10", "--regime", "ld",
                "--lambda-grid", "0.001,0.005,0.02,0.2,1.0",
                "-o", str(out),
            ],
            capsys,
        )
        assert code == 0
        rows = read_csv(out)
        values = [float(r["delta_bar_star"]) for r in rows]
        assert all(v <= 0.3 + 1e-12 for v in values)
        assert rows[-1]["saturated"] == "true"
        assert float(rows[-1]["delta_bar_star"]) == 0.3
        assert rows[0]["saturated"] == "false"
        assert all(b >= a for a, b in zip(values, values[1:]))

    def test_md_square_root_law(self, tmp_path, capsys):
        out = tmp_path / "md.csv"
        code, _, _ = run(
            [
                "resolution", "--p1", "bern:0.6", "--p2", "bern:0.2",
                "--theta", "0.2", "--r", "10", "--regime", "md",
                "--lambda-grid", "0.0025,0.01",
                "-o", str(out),
            ],
            capsys,
        )
        assert code == 0
        rows = read_csv(out)
        assert float(rows[1]["delta_bar_star"]) == pytest.approx(
            2 * float(rows[0]["delta_bar_star"]), rel=1e-4)

    def test_md_theta_ordering(self, tmp_path, capsys):
        curves = {}
        for theta in ("0.1", "0.2", "0.3", "0.4"):
            out = tmp_path / f"md{theta}.csv"
            code, _, _ = run(
                [
                    "resolution", "--p1", "bern:0.6", "--p2", "bern:0.2",
                    "--theta", theta, "--r", "10", "--regime", "md",
                    "--lambda-grid", "0.001,0.01,0.05",
                    "-o", str(out),
                ],
                capsys,
            )
            assert code == 0
            curves[theta] = [float(r["delta_bar_star"]) for r in read_csv(out)]
        thetas = sorted(curves)
        for small, large in zip(thetas, thetas[1:]):
            assert all(a > b for a, b in zip(curves[small], curves[large]))

    def test_invalid_distribution_exits_2(self, tmp_path, capsys):
        code, _, stderr = run(
            [
                "resolution", "--p1", "bern:1.4", "--p2", "bern:0.2",
                "--theta", "0.2", "--r", "10", "--regime", "md",
                "--lambda-grid", "0.01", "-o", str(tmp_path / "x.csv"),
            ],
            capsys,
        )
        assert code == 2
        assert "input error" in stderr


class TestSimulateCommand:
    BASE = [
        "simulate", "--p1", "bern:0.8", "--p2", "bern:0.2",
        "--n", "300", "--r", "5", "--theta", "0.2", "--alpha", "0.5",
        "--trials", "40", "--lambda", "0.02", "--threshold-mode", "raw",
        "--delta-bar-grid", "0.05,0.25",
    ]

    def test_same_seed_identical_checksum(self, tmp_path, capsys):
        outs = []
        for name in ("a.csv", "b.csv"):
            out = tmp_path / name
            code, _, _ = run(
                self.BASE + ["--seed", "7", "-o", str(out)], capsys)
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]
        manifests = [
            json.loads((tmp_path / f"{n}.manifest.json").read_text())
            for n in ("a.csv", "b.csv")
        ]
        assert manifests[0]["outputs"]["a.csv"] == manifests[1]["outputs"]["b.csv"]

    def test_worker_count_does_not_change_bytes(self, tmp_path, capsys):
        payloads = []
        for name, workers in (("w1.csv", "1"), ("w2.csv", "3")):
            out = tmp_path / name
            code, _, _ = run(
                self.BASE + ["--seed", "7", "--workers", workers, "-o", str(out)],
                capsys,
            )
            assert code == 0
            payloads.append(out.read_bytes())
        assert payloads[0] == payloads[1]

    def test_trials_zero_is_usage_error(self, tmp_path, capsys):
        args = list(self.BASE)
        args[args.index("--trials") + 1] = "0"
        code, _, stderr = run(args + ["-o", str(tmp_path / "x.csv")], capsys)
        assert code == 2
        assert "trials" in stderr

    def test_erasure_crosses_half(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        code, _, _ = run(
            self.BASE + ["--seed", "1", "-o", str(out)], capsys)
        assert code == 0
        rows = read_csv(out)
        rates = [float(r["erasure_rate"]) for r in rows]
        assert rates[0] > 0.5 > rates[-1]

    def test_json_format(self, tmp_path, capsys):
        out = tmp_path / "sweep.json"
        code, _, _ = run(
            self.BASE + ["--seed", "1", "--format", "json", "-o", str(out)],
            capsys,
        )
        assert code == 0
        rows = json.loads(out.read_text())
        assert {"delta_bar", "n", "lam", "undetected_rate", "erasure_rate",
                "wilson_halfwidth"} <= set(rows[0])


class TestDivergenceCommand:
    def test_values(self, tmp_path, capsys):
        code, stdout, _ = run(
            ["divergence", "bern:0.6", "bern:0.2", "-o", str(tmp_path / "d.txt")],
            capsys,
        )
        assert code == 0
        assert "sym_chi2 0.666667" in stdout
        assert "chi2_forward 1.000000" in stdout
        assert "gjs 0.172609" in stdout

    def test_identical_inputs_all_zero(self, tmp_path, capsys):
        code, stdout, _ = run(
            ["divergence", "bern:0.3", "bern:0.3", "-o", str(tmp_path / "d.txt")],
            capsys,
        )
        assert code == 0
        for line in stdout.strip().splitlines():
            assert line.split()[1] == "0.000000"

    def test_support_violations_reported_per_quantity(self, tmp_path, capsys):
        code, stdout, _ = run(
            ["divergence", "bern:1.0", "bern:0.5", "-o", str(tmp_path / "d.txt")],
            capsys,
        )
        assert code == 0
        lines = dict(
            line.split(maxsplit=1) for line in stdout.strip().splitlines())
        assert lines["kl_forward"] == "0.693147"
        assert lines["kl_reverse"] == "inf"
        assert lines["chi2_reverse"].startswith("error:")

    def test_distribution_file_input(self, tmp_path, capsys):
        dist = tmp_path / "p.json"
        dist.write_text("[0.6, 0.4]")
        code, stdout, _ = run(
            ["divergence", str(dist), "bern:0.2", "-o", str(tmp_path / "d.txt")],
            capsys,
        )
        assert code == 0
        assert "sym_chi2 0.666667" in stdout


class TestManifest:
    def test_written_next_to_output_and_replays(self, tmp_path, capsys):
        out = tmp_path / "res.csv"
        args = [
            "resolution", "--p1", "bern:0.6", "--p2", "bern:0.2",
            "--theta", "0.2", "--r", "10", "--regime", "md",
            "--lambda-grid", "0.01", "-o", str(out),
        ]
        assert run(args, capsys)[0] == 0
        manifest = json.loads((tmp_path / "res.csv.manifest.json").read_text())
        assert manifest["command"] == "resolution"
        assert manifest["artifact_version"]
        first = manifest["outputs"]["res.csv"]
        assert run(args, capsys)[0] == 0
        replay = json.loads((tmp_path / "res.csv.manifest.json").read_text())
        assert replay["outputs"]["res.csv"] == first

    def test_output_dir_env(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("TYPECPD_OUTPUT_DIR", str(tmp_path / "outdir"))
        code, _, _ = run(
            ["divergence", "bern:0.6", "bern:0.2"], capsys)
        assert code == 0
        assert (tmp_path / "outdir" / "divergence.txt").exists()
        assert (tmp_path / "outdir" / "divergence.txt.manifest.json").exists()
