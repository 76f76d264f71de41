import csv
import json

import numpy as np
import pytest

from sdnbi.cli import RunManifest, main, read_front, read_iterations


def _run(tmp_path, name, *extra):
    out = tmp_path / name
    argv = ["run", "--out", str(out), *extra]
    return main(argv), out


@pytest.fixture(scope="module")
def sch2_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("runs")
    dirs = {}
    for algo in ("sd", "mnbi", "sdnbi"):
        code, out = _run(base, algo, "--problem", "sch2", "--algo", algo, "--max-iters", "8")
        assert code == 0
        dirs[algo] = out
    return dirs


class TestRun:
    def test_artifacts(self, sch2_runs):
        out = sch2_runs["sdnbi"]
        for name in ("front.csv", "iterations.csv", "metrics.json", "manifest.json"):
            assert (out / name).exists()
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["n_iters"] == 8
        assert "fathomed" in metrics and "termination" in metrics
        with open(out / "front.csv", newline="") as fh:
            header = next(csv.reader(fh))
        assert header == ["iter_found", "z1_raw", "z2_raw", "z1_norm", "z2_norm", "x1", "x2"]

    def test_front_round_trip(self, sch2_runs):
        out = sch2_runs["sdnbi"]
        front = read_front(out / "front.csv")
        metrics = json.loads((out / "metrics.json").read_text())
        assert len(front) == metrics["n_unq"]
        assert np.all(np.diff(front[:, 0]) > 0)

    def test_iterations_round_trip(self, sch2_runs):
        rows = read_iterations(sch2_runs["sdnbi"] / "iterations.csv")
        assert [int(r["iter"]) for r in rows] == list(range(1, len(rows) + 1))

    def test_manifest_round_trip(self, sch2_runs):
        text = (sch2_runs["sd"] / "manifest.json").read_text()
        m = RunManifest.from_json(text)
        assert m.to_json() == text
        assert m.seed == 7 and m.problem == "sch2" and m.algorithm == "sd"

    def test_byte_identical_fronts(self, tmp_path):
        args = ("--problem", "mop1", "--algo", "sdnbi", "--max-iters", "6")
        _, a = _run(tmp_path, "a", *args)
        _, b = _run(tmp_path, "b", *args)
        assert (a / "front.csv").read_bytes() == (b / "front.csv").read_bytes()

    def test_tnk_sd_anchors_only(self, tmp_path):
        code, out = _run(tmp_path, "tnk", "--problem", "tnk", "--algo", "sd", "--max-iters", "59")
        assert code == 0
        assert json.loads((out / "metrics.json").read_text())["n_unq"] == 2

    def test_config_file_and_override(self, tmp_path):
        cfg = tmp_path / "presets.ini"
        cfg.write_text("[mop1]\nmax_iters = 5\nn_starts = 4\n")
        _, out = _run(tmp_path, "c", "--problem", "mop1", "--algo", "mnbi", "--config", str(cfg))
        m = RunManifest.from_json((out / "manifest.json").read_text())
        assert m.config["max_iters"] == 5 and m.config["n_starts"] == 4
        _, out = _run(tmp_path, "d", "--problem", "mop1", "--algo", "mnbi", "--config", str(cfg), "--max-iters", "4")
        assert RunManifest.from_json((out / "manifest.json").read_text()).config["max_iters"] == 4

    def test_bad_config_key(self, tmp_path):
        cfg = tmp_path / "bad.ini"
        cfg.write_text("[mop1]\nwidth = 3\n")
        assert _run(tmp_path, "e", "--problem", "mop1", "--algo", "sd", "--config", str(cfg))[0] == 2


class TestUsage:
    def test_unknown_problem(self, tmp_path):
        assert _run(tmp_path, "x", "--problem", "dtlz2", "--algo", "sd", "--max-iters", "3")[0] == 2

    def test_unknown_algorithm(self, tmp_path):
        assert _run(tmp_path, "x", "--problem", "mop1", "--algo", "nsga", "--max-iters", "3")[0] == 2

    def test_missing_command(self):
        assert main([]) == 2

    def test_problems_listing(self, capsys):
        assert main(["problems"]) == 0
        out = capsys.readouterr().out
        for name in ("mop1", "sch2", "tnk", "zdt3", "zdt5"):
            assert name in out


class TestReference:
    def test_zdt5_rows(self, tmp_path):
        out = tmp_path / "ref"
        assert main(["reference", "--problem", "zdt5", "--out", str(out)]) == 0
        assert len(read_front(out / "reference_front.csv")) == 31
        metrics = json.loads((out / "reference_metrics.json").read_text())
        assert metrics["n_unq"] == 31

    def test_mop1_rows(self, tmp_path):
        out = tmp_path / "ref"
        assert main(["reference", "--problem", "mop1", "--n-finite", "100", "--out", str(out)]) == 0
        assert len(read_front(out / "reference_front.csv")) == 100


class TestCompare:
    def test_three_engines(self, sch2_runs, tmp_path, capsys):
        out = tmp_path / "cmp"
        dirs = [str(sch2_runs[a]) for a in ("sd", "mnbi", "sdnbi")]
        assert main(["compare", *dirs, "--out", str(out)]) == 0
        with open(out / "compare.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["metric", "sd", "mnbi", "sdnbi"]
        assert {r[0] for r in rows[1:]} >= {"N_unq", "HV", "DM"}
        for a in ("sd", "mnbi", "sdnbi"):
            with open(out / f"trace_{a}.csv", newline="") as fh:
                trace = list(csv.DictReader(fh))
            assert len(trace) == 8
            hv = [float(r["hv"]) for r in trace]
            assert all(b >= a_ - 1e-12 for a_, b in zip(hv, hv[1:]))

    def test_self_compare_identical_columns(self, sch2_runs, tmp_path):
        out = tmp_path / "self"
        d = str(sch2_runs["sdnbi"])
        assert main(["compare", d, d, "--out", str(out)]) == 0
        with open(out / "compare.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        assert all(r[1] == r[2] for r in rows[1:])

    def test_problem_mismatch(self, sch2_runs, tmp_path, capsys):
        _, other = _run(tmp_path, "m", "--problem", "mop1", "--algo", "sd", "--max-iters", "3")
        assert main(["compare", str(sch2_runs["sd"]), str(other), "--out", str(tmp_path / "mm")]) == 1
        assert "problem mismatch" in capsys.readouterr().err

    def test_missing_artifacts(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["compare", str(empty), str(empty), "--out", str(tmp_path / "z")]) == 1
