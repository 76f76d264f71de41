"""Command-line harness: run engines, build reference fronts, compare runs.

Usage:
    sdnbi run --problem zdt5 --algo sdnbi --eps 0.005 --max-iters 40 --out runs/zdt5
    sdnbi reference --problem mop1 --out ref/mop1
    sdnbi compare runs/sd runs/mnbi runs/sdnbi --out cmp/mop1
    sdnbi problems

Exit codes are 0 on success, 1 on runtime failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import logging
import math
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from sdnbi import __version__
from sdnbi.core import ObjectiveBounds, ObjectivePoint, ParetoArchive, denormalize
from sdnbi.engines import ALGORITHMS, EngineConfig, EngineResult, run
from sdnbi.metrics import distribution_metric, hypervolume_2d, joint_reference, report
from sdnbi.problems import PROBLEMS, get_problem, reference_front
from sdnbi.scalarize import SolverConfig

log = logging.getLogger("sdnbi.cli")

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_SEED = 7

# config-file keys and the flag attributes they preset
_CONFIG_KEYS = {
    "eps": float,
    "max_iters": int,
    "n_beta": int,
    "n_starts": int,
    "seed": int,
    "n_finite": int,
}


class UsageError(Exception):
    """Bad command-line input; maps to exit code 2."""


@dataclass
class RunManifest:
    """Provenance of one command invocation.

    Attributes:
        problem: Benchmark name.
        algorithm: Engine name, or "reference".
        config: Snapshot of the effective settings.
        outputs: Artifact name to file name (relative to the run directory).
        started: ISO-8601 UTC start time.
        finished: ISO-8601 UTC finish time.
        version: Package version.
        seed: Multistart seed.
    """

    problem: str
    algorithm: str
    config: dict
    outputs: dict = field(default_factory=dict)
    started: str = ""
    finished: str = ""
    version: str = __version__
    seed: int = DEFAULT_SEED

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        return cls(**json.loads(text))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _num(x: float):
    """JSON-safe float (NaN and infinities become None)."""
    x = float(x)
    return x if math.isfinite(x) else None


# ---------------------------------------------------------------- CSV I/O

FRONT_BASE = ["iter_found", "z1_raw", "z2_raw", "z1_norm", "z2_norm"]
ITER_FIELDS = ["iter", "event", "d_max", "elapsed", "archive_size", "z1_norm", "z2_norm", "z1_raw", "z2_raw"]


def write_front(path: Path, archive: ParetoArchive, bounds: ObjectiveBounds) -> None:
    """Write one row per archived point, sorted by z1."""
    n_dec = max((len(p.decision) for p in archive if p.decision is not None), default=0)
    header = FRONT_BASE + [f"x{i + 1}" for i in range(n_dec)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for p in archive:
            raw = p.raw if p.raw is not None else tuple(denormalize(p.z, bounds))
            dec = [] if p.decision is None else [repr(v) for v in p.decision.as_array()]
            w.writerow([p.iter_found, repr(raw[0]), repr(raw[1]), repr(p.z[0]), repr(p.z[1])] + dec)


def read_front(path: Path) -> np.ndarray:
    """Normalized points of a front CSV as an (n, 2) array."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return np.array([[float(r["z1_norm"]), float(r["z2_norm"])] for r in rows]).reshape(-1, 2)


def write_iterations(path: Path, result: EngineResult) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ITER_FIELDS)
        for r in result.records:
            p = r.new_point
            pt = ["", "", "", ""]
            if p is not None:
                raw = p.raw if p.raw is not None else tuple(denormalize(p.z, result.bounds))
                pt = [repr(p.z[0]), repr(p.z[1]), repr(raw[0]), repr(raw[1])]
            w.writerow([r.iter, r.event, repr(r.d_max), f"{r.elapsed:.6f}", r.archive_size] + pt)


def read_iterations(path: Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


# ---------------------------------------------------------------- config


def load_config(path: Optional[str], problem: str) -> dict:
    """Read the preset block for ``problem`` from an INI file.

    The file has one section per problem (and an optional DEFAULT section)
    with keys eps, max_iters, n_beta, n_starts, seed, n_finite.
    """
    if path is None:
        return {}
    parser = configparser.ConfigParser()
    if not parser.read(path):
        raise UsageError(f"cannot read config file {path}")
    section = parser[problem] if parser.has_section(problem) else parser.defaults()
    out = {}
    for key, value in section.items():
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"unknown config key {key!r}")
        try:
            out[key] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise UsageError(f"bad value for {key}: {value!r}") from exc
    return out


def _settings(args) -> dict:
    """Config-file values overridden by explicitly given flags."""
    merged = load_config(args.config, args.problem)
    for key in _CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    merged.setdefault("seed", DEFAULT_SEED)
    return merged


def _problem(name: str):
    try:
        return get_problem(name)
    except KeyError as exc:
        raise UsageError(f"unknown problem {name!r}") from exc


def _out_dir(args, default: str) -> Path:
    out = Path(args.out or default)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------- commands


def cmd_run(args) -> int:
    spec = _problem(args.problem)
    s = _settings(args)
    cfg = EngineConfig.for_problem(
        spec,
        args.algo,
        epsilon=s.get("eps"),
        max_iters=s.get("max_iters"),
        n_beta=s.get("n_beta"),
        n_starts=s.get("n_starts"),
        seed=s["seed"],
    )
    out = _out_dir(args, f"runs/{spec.name}-{args.algo}")
    manifest = RunManifest(spec.name, args.algo, _config_snapshot(cfg), started=_now(), seed=cfg.solver.seed)
    result = run(spec, cfg)
    manifest.finished = _now()
    rep = report(result.archive, result.bounds, result.t_total)

    write_front(out / "front.csv", result.archive, result.bounds)
    write_iterations(out / "iterations.csv", result)
    metrics = {k: _num(v) if isinstance(v, float) else v for k, v in rep.to_dict().items()}
    metrics.update(
        termination=result.termination,
        n_iters=result.n_iters,
        fathomed=[[float(a), float(b)] for a, b in result.fathomed],
        bounds={"ideal": list(result.bounds.ideal), "nadir": list(result.bounds.nadir)},
    )
    (out / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True))
    manifest.outputs = {
        "front": "front.csv",
        "iterations": "iterations.csv",
        "metrics": "metrics.json",
        "manifest": "manifest.json",
    }
    (out / "manifest.json").write_text(manifest.to_json())
    print(_summary_header())
    print(_summary_row(spec.name, args.algo, rep.n_unq, rep.hv, rep.dm, rep.t_total, result.n_iters, result.termination))
    return EXIT_OK


def _config_snapshot(cfg: EngineConfig) -> dict:
    return {
        "algorithm": cfg.algorithm,
        "epsilon": cfg.epsilon,
        "max_iters": cfg.max_iters,
        "n_beta": cfg.n_beta,
        "n_starts": cfg.solver.n_starts,
        "seed": cfg.solver.seed,
        "dedup_tol": cfg.dedup_tol,
        "eps_z": cfg.eps_z,
        "eps_d": list(cfg.eps_d),
        "classify_tol": cfg.classify_tol,
        "tolerances": asdict(cfg.solver.tolerances),
    }


def _summary_header() -> str:
    return f"{'problem':<8}{'algo':<7}{'N_unq':>6}{'HV':>10}{'DM':>10}{'t_total':>10}{'iters':>6}  termination"


def _summary_row(problem, algo, n, hv, dm, t, iters, term) -> str:
    return f"{problem:<8}{algo:<7}{n:>6d}{hv:>10.5f}{dm:>10.5f}{t:>10.2f}{iters:>6d}  {term}"


def cmd_reference(args) -> int:
    spec = _problem(args.problem)
    s = _settings(args)
    n_finite = s.get("n_finite") or spec.defaults.n_finite
    cfg = SolverConfig(n_starts=s.get("n_starts") or spec.defaults.n_starts, seed=s["seed"])
    out = _out_dir(args, f"reference/{spec.name}")
    manifest = RunManifest(spec.name, "reference", {"n_finite": n_finite, "n_starts": cfg.n_starts},
                           started=_now(), seed=cfg.seed)
    t0 = time.perf_counter()
    archive = reference_front(spec, n_finite, cfg)
    elapsed = time.perf_counter() - t0
    manifest.finished = _now()
    write_front(out / "reference_front.csv", archive, archive.bounds)
    rep = report(archive, archive.bounds, elapsed)
    metrics = {"n_unq": rep.n_unq, "hv": _num(rep.hv), "dm": _num(rep.dm), "t_total": elapsed, "n_finite": n_finite,
               "bounds": {"ideal": list(archive.bounds.ideal), "nadir": list(archive.bounds.nadir)}}
    (out / "reference_metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True))
    manifest.outputs = {"front": "reference_front.csv", "metrics": "reference_metrics.json",
                        "manifest": "manifest.json"}
    (out / "manifest.json").write_text(manifest.to_json())
    print(f"{spec.name}: {rep.n_unq} points, HV {rep.hv:.5f}, DM {rep.dm:.5f}")
    return EXIT_OK


@dataclass
class _LoadedRun:
    label: str
    manifest: RunManifest
    metrics: dict
    front: np.ndarray
    iterations: list[dict]

    @property
    def bounds(self) -> ObjectiveBounds:
        b = self.metrics["bounds"]
        return ObjectiveBounds(tuple(b["ideal"]), tuple(b["nadir"]))


def _load_run(path: Path) -> _LoadedRun:
    try:
        manifest = RunManifest.from_json((path / "manifest.json").read_text())
        metrics = json.loads((path / "metrics.json").read_text())
        front = read_front(path / "front.csv")
        iterations = read_iterations(path / "iterations.csv")
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise RuntimeError(f"missing or unreadable run artifacts in {path}: {exc}") from exc
    return _LoadedRun(path.name, manifest, metrics, front, iterations)


def _trace(run_: _LoadedRun, ref: np.ndarray) -> list[dict]:
    """HV, DM and N_unq after every iteration, rebuilt from the new points."""
    archive = ParetoArchive()
    rows = []
    for r in run_.iterations:
        if r["z1_norm"]:
            archive.insert(ObjectivePoint((float(r["z1_norm"]), float(r["z2_norm"]))))
        try:
            dm = distribution_metric(archive, run_.bounds)
        except ValueError:
            dm = float("nan")
        rows.append({"iter": int(r["iter"]), "n_unq": len(archive), "hv": hypervolume_2d(archive, ref), "dm": dm})
    return rows


def cmd_compare(args) -> int:
    runs = [_load_run(Path(p)) for p in args.runs]
    problems = {r.manifest.problem for r in runs}
    if len(problems) != 1:
        raise RuntimeError("problem mismatch")
    labels = []
    for i, r in enumerate(runs):
        label = r.manifest.algorithm
        labels.append(label if label not in labels else f"{label}-{i + 1}")
    ref = joint_reference(*[r.front for r in runs])
    out = _out_dir(args, "compare")

    metric_rows = [
        ("N_unq", [str(r.metrics["n_unq"]) for r in runs]),
        ("HV", [f"{hypervolume_2d(r.front, ref):.5f}" for r in runs]),
        ("DM", [_fmt(r.metrics["dm"]) for r in runs]),
        ("t_total", [_fmt(r.metrics["t_total"], 3) for r in runs]),
        ("t_avg", [_fmt(r.metrics["t_avg"], 4) for r in runs]),
        ("iters", [str(r.metrics["n_iters"]) for r in runs]),
        ("termination", [r.metrics["termination"] for r in runs]),
    ]
    with open(out / "compare.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["metric"] + labels)
        for name, vals in metric_rows:
            w.writerow([name] + vals)
    width = max(14, *(len(lb) + 2 for lb in labels))
    lines = [f"problem {problems.pop()}, HV reference ({ref[0]:.6g}, {ref[1]:.6g})",
             f"{'metric':<12}" + "".join(f"{lb:>{width}}" for lb in labels)]
    lines += [f"{name:<12}" + "".join(f"{v:>{width}}" for v in vals) for name, vals in metric_rows]
    text = "\n".join(lines) + "\n"
    (out / "compare.txt").write_text(text)
    print(text, end="")

    for label, r in zip(labels, runs):
        with open(out / f"trace_{label}.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=["iter", "n_unq", "hv", "dm"])
            w.writeheader()
            for row in _trace(r, ref):
                w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in row.items()})
    return EXIT_OK


def _fmt(v, digits: int = 5) -> str:
    return "nan" if v is None else f"{float(v):.{digits}f}"


def cmd_problems(args) -> int:
    print(f"{'name':<6}{'n_cont':>7}{'n_int':>6}{'starts':>7}{'eps':>7}{'iters':>6}{'N_beta':>7}{'N_finite':>9}")
    for spec in PROBLEMS.values():
        d = spec.defaults
        print(f"{spec.name:<6}{spec.n_continuous:>7}{spec.n_integer:>6}{d.n_starts:>7}{d.epsilon:>7}"
              f"{d.max_iters:>6}{d.n_beta:>7}{d.n_finite:>9}")
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdnbi", description="Bi-objective front approximation toolkit.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_engine: bool):
        p.add_argument("--problem", required=True, help="benchmark name (see `sdnbi problems`)")
        p.add_argument("--n-starts", dest="n_starts", type=int, help="multistart count")
        p.add_argument("--seed", type=int, help=f"multistart seed (default {DEFAULT_SEED})")
        p.add_argument("--out", help="output directory")
        p.add_argument("--config", help="INI file with per-problem presets")
        if with_engine:
            p.add_argument("--algo", required=True, choices=ALGORITHMS)
            p.add_argument("--eps", type=float, help="stopping tolerance on the largest facet error")
            p.add_argument("--max-iters", dest="max_iters", type=int, help="iteration budget, anchors included")
            p.add_argument("--n-beta", dest="n_beta", type=int, help="mNBI grid size")
        else:
            p.add_argument("--n-finite", dest="n_finite", type=int, help="number of reference points")

    p_run = sub.add_parser("run", help="run one engine on one problem")
    common(p_run, True)
    p_run.set_defaults(func=cmd_run)

    p_ref = sub.add_parser("reference", help="compute a dense reference front")
    common(p_ref, False)
    p_ref.set_defaults(func=cmd_reference)

    p_cmp = sub.add_parser("compare", help="tabulate and trace completed runs")
    p_cmp.add_argument("runs", nargs="+", help="run directories")
    p_cmp.add_argument("--out", help="output directory")
    p_cmp.set_defaults(func=cmd_compare)

    p_list = sub.add_parser("problems", help="list benchmarks and their default parameters")
    p_list.set_defaults(func=cmd_problems)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sdnbi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, ValueError, OSError) as exc:
        print(f"sdnbi: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
