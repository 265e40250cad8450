"""Command-line driver.

Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 acceptance failure.

Every output file gets a ``<file>.manifest.json`` sidecar with the command
line, configuration, code version, seed and timestamps.  The data files
themselves carry only deterministic content, so equal seeds give
byte-identical outputs.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np

from . import __version__, densities
from .critpoints import FinderOptions, find_critical_points
from .ensembles import draw_section
from .experiments import KINDS, LIMIT_CDFS, ExperimentConfig, ks_statistic, run_experiment
from .oracle import MAX_DEGREE, IllConditioned, algebraic_oracle

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_ACCEPT = 0, 2, 3, 4

# thresholds used by ``compare``
KS_MAX = 0.05
MASS_TOL = {"saddle": 0.03, "max": 0.06}
MASS_TARGET = {"saddle": 4 / 3, "max": 1 / 3}
MAX_EXCLUDED = 0.01


def git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"],
                             cwd=Path(__file__).resolve().parent, capture_output=True,
                             text=True, timeout=5)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _manifest(args: argparse.Namespace, argv: list[str], **extra) -> dict:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in vars(args).items()
           if k != "func"}
    return {"command": ["cvlab", *argv], "config": cfg, "version": __version__,
            "git": git_describe(), "master_seed": getattr(args, "seed", None), **extra}


def _write_manifest(path: Path, manifest: dict, started: str) -> None:
    m = dict(manifest, started=started,
             finished=_dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))
    Path(str(path) + ".manifest.json").write_text(json.dumps(m, indent=2, sort_keys=True) + "\n")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


# -- CSV formats ----------------------------------------------------------------

def write_curve(path: Path | None, meta: dict, xs, values) -> None:
    head = "# " + ",".join(f"{k}={v}" for k, v in meta.items())
    lines = [head, "x,value"] + [f"{_fmt(x)},{_fmt(v)}" for x, v in zip(xs, values)]
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def read_curve(path: Path) -> tuple[dict, np.ndarray, np.ndarray]:
    meta, xs, vs = {}, [], []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            for item in line[1:].strip().split(","):
                k, _, v = item.partition("=")
                meta[k.strip()] = v.strip()
        elif line and line != "x,value":
            x, v = line.split(",")
            xs.append(float(x))
            vs.append(float(v))
    return meta, np.array(xs), np.array(vs)


SIM_COLUMNS = "sample_id,index_type,x_value,chart,re,im,residual"


def read_simulation(path: Path) -> tuple[dict, list[tuple]]:
    meta, rows = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            for item in line[1:].strip().split(","):
                k, _, v = item.partition("=")
                meta[k.strip()] = v.strip()
        elif line and line != SIM_COLUMNS:
            sid, kind, x, chart, re, im, res = line.split(",")
            rows.append((int(sid), kind, float(x), chart, float(re), float(im), float(res)))
    return meta, rows


# -- commands -------------------------------------------------------------------

def _grid(xmax: float, steps: int) -> np.ndarray:
    return np.linspace(0.0, xmax, steps + 1)


def cmd_theory(args, argv) -> int:
    started = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    xs = _grid(args.xmax, args.steps)
    try:
        c = densities.curve(args.curve, xs, convention=args.convention, chi=args.chi)
    except densities.ToleranceNotMet as err:
        print(f"quadrature failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    write_curve(args.out, {"curve": args.curve, "convention": args.convention, "chi": args.chi},
                c.xs, c.values)
    if args.out:
        _write_manifest(args.out, _manifest(args, argv), started)
    return EXIT_OK


def cmd_kacrice(args, argv) -> int:
    started = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    xs = _grid(args.xmax, args.steps)
    try:
        c = densities.curve("finite", xs, convention=args.convention, n=args.n)
    except densities.ToleranceNotMet as err:
        print(f"quadrature failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    write_curve(args.out, {"curve": "finite", "convention": args.convention, "n": args.n},
                c.xs, c.values)
    if args.out:
        _write_manifest(args.out, _manifest(args, argv), started)
    return EXIT_OK


def cmd_simulate(args, argv) -> int:
    started = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    cfg = ExperimentConfig(n=args.n, samples=args.samples, ensemble=args.ensemble,
                           master_seed=args.seed)
    summary = run_experiment(cfg, args.workers)
    excluded = [r.sample_id for r in summary.samples if r.status != "ok"]
    head = (f"# n={cfg.n},samples={cfg.samples},accepted={summary.accepted},"
            f"ensemble={cfg.ensemble},seed={cfg.master_seed}")
    lines = [head, SIM_COLUMNS]
    for r in summary.samples:
        if r.status != "ok":
            continue
        for kind, x, chart, re, im, res in r.rows:
            lines.append(f"{r.sample_id},{kind},{_fmt(x)},{chart},{_fmt(re)},{_fmt(im)},{_fmt(res)}")
    Path(args.out).write_text("\n".join(lines) + "\n")
    manifest = _manifest(args, argv)
    _write_manifest(args.out, manifest, started)
    if args.summary:
        d = summary.to_dict()
        d["excluded_samples"] = excluded
        # paths and worker count stay in the sidecar so the summary is run-independent
        d["manifest"] = {k: v for k, v in manifest.items() if k not in ("config", "command")}
        d["manifest"]["config"] = {k: v for k, v in manifest["config"].items()
                                   if k not in ("workers", "out", "summary")}
        Path(args.summary).write_text(json.dumps(d, indent=2, sort_keys=True) + "\n")
        _write_manifest(args.summary, dict(manifest, runtime=summary.runtime), started)
    if len(excluded) >= MAX_EXCLUDED * cfg.samples:
        print(f"{len(excluded)} of {cfg.samples} samples excluded", file=sys.stderr)
        return EXIT_ACCEPT
    return EXIT_OK


def compare_report(sim_path: Path, theory_path: Path | None = None) -> dict:
    meta, rows = read_simulation(sim_path)
    n = int(meta["n"])
    samples = int(meta["samples"])
    accepted = int(meta.get("accepted", samples))
    report = {"n": n, "samples": samples, "accepted": accepted, "checks": {}}
    checks = report["checks"]
    excluded = (samples - accepted) / samples
    checks["exclusions"] = {"value": excluded, "threshold": MAX_EXCLUDED,
                            "pass": excluded < MAX_EXCLUDED}
    for kind in KINDS:
        vals = np.array([r[2] for r in rows if r[1] == kind])
        ks = ks_statistic(vals, LIMIT_CDFS[kind]) if len(vals) >= 10 else float("nan")
        checks[f"ks_{kind}"] = {"value": ks, "threshold": KS_MAX, "pass": bool(ks < KS_MAX)}
        mass = len(vals) / (accepted * n)
        err = abs(mass / MASS_TARGET[kind] - 1.0)
        checks[f"mass_{kind}"] = {"value": mass, "target": MASS_TARGET[kind],
                                  "relative_error": err, "threshold": MASS_TOL[kind],
                                  "pass": bool(err < MASS_TOL[kind])}
    if theory_path is not None:
        tmeta, txs, tvs = read_curve(theory_path)
        if tmeta.get("convention", "count") == "paper":
            tvs = tvs * math.pi**3
        edges = np.linspace(0.0, float(txs[-1]), 41)
        allv = np.array([r[2] for r in rows])
        h, _ = np.histogram(allv, bins=edges)
        emp = h / (accepted * n * np.diff(edges))
        mids = 0.5 * (edges[1:] + edges[:-1])
        theory = np.interp(mids, txs, tvs)
        report["theory"] = {"curve": tmeta, "sup_hist_minus_theory": float(np.max(np.abs(emp - theory)))}
    report["pass"] = all(c["pass"] for c in checks.values())
    return report


def cmd_compare(args, argv) -> int:
    started = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    report = compare_report(args.sim, args.theory)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.report:
        Path(args.report).write_text(text)
        _write_manifest(args.report, _manifest(args, argv), started)
    else:
        sys.stdout.write(text)
    return EXIT_OK if report["pass"] else EXIT_ACCEPT


def oracle_check(n: int, samples: int, seed: int, tol: float = 1e-8) -> dict:
    worst, mismatches = 0.0, []
    for i in range(samples):
        s = draw_section(n, "gaussian", seed, i)
        a = find_critical_points(s, FinderOptions())
        b = algebraic_oracle(s)
        if len(a) != len(b):
            mismatches.append(i)
            continue
        if not a:
            continue
        va = np.array([p.location.unit_vector() for p in a])
        vb = np.array([p.location.unit_vector() for p in b])
        d = 0.5 * np.linalg.norm(va[:, None] - vb[None], axis=2)
        j = d.argmin(axis=1)
        dist = float(d.min(axis=1).max())
        worst = max(worst, dist)
        same_kind = all(a[k].morse_index == b[j[k]].morse_index for k in range(len(a)))
        if dist >= tol or len(set(j)) != len(a) or not same_kind:
            mismatches.append(i)
    return {"n": n, "samples": samples, "seed": seed, "max_pairing_distance": worst,
            "mismatched_samples": mismatches, "pass": not mismatches}


def cmd_oracle(args, argv) -> int:
    if not 1 <= args.n <= MAX_DEGREE:
        print(f"--n must be between 1 and {MAX_DEGREE}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rep = oracle_check(args.n, args.samples, args.seed)
    except IllConditioned as err:
        print(f"oracle failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(rep, sort_keys=True))
    return EXIT_OK if rep["pass"] else EXIT_ACCEPT


_GNUPLOT = """\
# generated by cvlab plot
set datafile separator ','
set datafile commentschars '#'
set xlabel 'x'
set ylabel 'density'
set key top right
set grid
"""


def cmd_plot(args, argv) -> int:
    parts = []
    for path in args.curves:
        meta, _, _ = read_curve(path)
        title = ", ".join(f"{k}={v}" for k, v in meta.items())
        parts.append(f"'{Path(path).resolve()}' using 1:2 every ::1 with lines lw 2 title '{title}'")
    script = _GNUPLOT
    if args.png:
        script += f"set terminal pngcairo size 900,600\nset output '{args.png}'\n"
    script += "plot " + ", \\\n     ".join(parts) + "\n"
    Path(args.out).write_text(script)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------

def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cvlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("theory", help="sample a limit density or the second-order term")
    t.add_argument("--curve", choices=["saddle", "max", "total", "finf"], required=True)
    t.add_argument("--chi", type=int, default=2)
    t.add_argument("--convention", choices=["paper", "count"], default="count")
    t.add_argument("--xmax", type=_positive_float, default=2.5)
    t.add_argument("--steps", type=_positive_int, default=250)
    t.add_argument("--out", type=Path)
    t.set_defaults(func=cmd_theory)

    k = sub.add_parser("kacrice", help="sample the exact finite-n density")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--convention", choices=["paper", "count"], default="count")
    k.add_argument("--xmax", type=_positive_float, default=2.5)
    k.add_argument("--steps", type=_positive_int, default=250)
    k.add_argument("--out", type=Path)
    k.set_defaults(func=cmd_kacrice)

    s = sub.add_parser("simulate", help="Monte Carlo critical values")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--samples", type=_positive_int, required=True)
    s.add_argument("--ensemble", choices=["gaussian", "spherical"], default="gaussian")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", type=Path, required=True)
    s.add_argument("--summary", type=Path)
    s.add_argument("--workers", type=_positive_int, default=None)
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("compare", help="check a simulation against the theory")
    c.add_argument("--sim", type=Path, required=True)
    c.add_argument("--theory", type=Path)
    c.add_argument("--report", type=Path)
    c.set_defaults(func=cmd_compare)

    o = sub.add_parser("oracle", help="cross-check Newton against resultant elimination")
    o.add_argument("--n", type=int, required=True)
    o.add_argument("--samples", type=_positive_int, default=50)
    o.add_argument("--seed", type=int, default=0)
    o.set_defaults(func=cmd_oracle)

    g = sub.add_parser("plot", help="emit a gnuplot script for theory curves")
    g.add_argument("--curves", type=Path, nargs="+", required=True)
    g.add_argument("--out", type=Path, required=True)
    g.add_argument("--png", type=str, default=None)
    g.set_defaults(func=cmd_plot)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("kacrice", "simulate") and args.n < 2:
        parser.error("--n must be >= 2")
    try:
        return args.func(args, argv)
    except (FloatingPointError, np.linalg.LinAlgError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
