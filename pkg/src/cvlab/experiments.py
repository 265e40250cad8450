"""Monte Carlo harness: sample sections, find critical points, compare with theory.

Samples are independent given (master_seed, sample_id), so they are farmed
out to worker processes in fixed chunks and reassembled in sample order; the
summary does not depend on the worker count.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, stats

from . import densities
from .critpoints import (MAX, SADDLE, DegenerateHessian, FinderOptions, IncompleteSearch,
                         find_critical_points)
from .ensembles import draw_section

KINDS = ("saddle", "max")
LIMIT_CDFS = {"saddle": densities.saddle_limit_cdf, "max": densities.max_limit_cdf}


@dataclass(frozen=True)
class ExperimentConfig:
    n: int
    samples: int
    ensemble: str = "gaussian"
    master_seed: int = 0
    finder: FinderOptions = field(default_factory=FinderOptions)
    bins: int = 80
    xmax: float = 2.5

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.ensemble not in ("gaussian", "spherical"):
            raise ValueError(f"unknown ensemble {self.ensemble!r}")

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(0.0, self.xmax, self.bins + 1)


@dataclass
class SampleResult:
    sample_id: int
    status: str  # "ok", "incomplete" or "degenerate"
    rows: list  # (index_type, value, chart, re, im, residual)

    def values(self, kind: str) -> list[float]:
        return [r[1] for r in self.rows if r[0] == kind]


@dataclass
class ExperimentSummary:
    config: ExperimentConfig
    accepted: int
    identity_failures: int
    degenerate_samples: int
    counts: dict
    histograms: dict
    ks: dict
    runtime: float = 0.0
    samples: list = field(default_factory=list, repr=False)

    def values(self, kind: str) -> np.ndarray:
        """All accepted critical values of one index type, in sample order."""
        return np.array([v for r in self.samples if r.status == "ok" for v in r.values(kind)])

    def to_dict(self, include_runtime: bool = False) -> dict:
        cfg = asdict(self.config)
        d = {
            "config": cfg,
            "accepted": self.accepted,
            "identity_failures": self.identity_failures,
            "degenerate_samples": self.degenerate_samples,
            "counts": self.counts,
            "histograms": self.histograms,
            "ks": self.ks,
        }
        if include_runtime:
            d["runtime"] = self.runtime
        return d


def process_sample(cfg: ExperimentConfig, sample_id: int) -> SampleResult:
    s = draw_section(cfg.n, cfg.ensemble, cfg.master_seed, sample_id)
    status = "ok"
    try:
        pts = find_critical_points(s, cfg.finder)
    except IncompleteSearch as err:
        pts, status = err.points, "incomplete"
    except DegenerateHessian as err:
        pts, status = err.points, "degenerate"
    rows = [("saddle" if p.morse_index == SADDLE else "max", p.value, p.location.chart,
             p.location.coordinate.real, p.location.coordinate.imag, p.newton_residual)
            for p in pts]
    return SampleResult(sample_id, status, rows)


def _chunk(args):
    cfg, ids = args
    return [process_sample(cfg, i) for i in ids]


def default_workers() -> int:
    env = os.environ.get("CVLAB_THREADS")
    if env:
        return max(1, int(env))
    return 1


def simulate(cfg: ExperimentConfig, workers: int | None = None) -> list[SampleResult]:
    workers = workers or default_workers()
    ids = list(range(cfg.samples))
    if workers == 1 or cfg.samples < 2:
        return [process_sample(cfg, i) for i in ids]
    size = max(1, math.ceil(cfg.samples / (4 * workers)))
    chunks = [(cfg, ids[k:k + size]) for k in range(0, len(ids), size)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_chunk, chunks))
    return [r for part in parts for r in part]


def ks_statistic(values, cdf) -> float:
    """Kolmogorov-Smirnov distance sup |F_emp - F| between a sample and a CDF."""
    values = np.asarray(values, dtype=float)
    if len(values) < 10:
        raise ValueError("need at least 10 values")
    return float(stats.kstest(values, cdf).statistic)


def summarize(cfg: ExperimentConfig, results: list[SampleResult], runtime: float = 0.0):
    ok = [r for r in results if r.status == "ok"]
    accepted = len(ok)
    edges = cfg.edges
    width = np.diff(edges)
    counts, hists, ks = {}, {"edges": edges.tolist()}, {}
    for kind in KINDS:
        per = np.array([len(r.values(kind)) for r in ok], dtype=float)
        counts[kind] = {
            "total": int(per.sum()),
            "mean": float(per.mean()) if accepted else float("nan"),
            "var": float(per.var(ddof=1)) if accepted > 1 else float("nan"),
            "mean_over_n": float(per.mean() / cfg.n) if accepted else float("nan"),
        }
        vals = np.array([v for r in ok for v in r.values(kind)])
        h, _ = np.histogram(vals, bins=edges)
        norm = accepted * cfg.n
        hists[kind] = (h / (norm * width)).tolist() if accepted else [0.0] * cfg.bins
        ks[kind] = ks_statistic(vals, LIMIT_CDFS[kind]) if len(vals) >= 10 else float("nan")
    return ExperimentSummary(
        config=cfg,
        accepted=accepted,
        identity_failures=sum(r.status == "incomplete" for r in results),
        degenerate_samples=sum(r.status == "degenerate" for r in results),
        counts=counts,
        histograms=hists,
        ks=ks,
        runtime=runtime,
        samples=results,
    )


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentSummary:
    t0 = time.perf_counter()
    results = simulate(cfg, workers)
    return summarize(cfg, results, time.perf_counter() - t0)


def expected_counts(n: int) -> dict:
    """Exact expected numbers of saddles and maxima at degree n, from the Kac-Rice density.

    The total is n times the integral of the finite-n density; the Morse count
    #saddles - #maxima = n - 2 then splits it.
    """
    total = n * integrate.quad(lambda x: densities.kac_rice_finite(n, x), 0, np.inf,
                               epsabs=1e-12, limit=200)[0]
    return {"total": total, "saddle": 0.5 * (total + n - 2), "max": 0.5 * (total - n + 2)}


def bin_averages(f, edges) -> np.ndarray:
    """Average of f over each histogram bin."""
    edges = np.asarray(edges, dtype=float)
    return np.array([integrate.quad(f, a, b)[0] / (b - a) for a, b in zip(edges[:-1], edges[1:])])


def convergence_study(ns, template: ExperimentConfig | None = None, *, mc: bool = False,
                      chi: int = 2, xs=None, workers: int | None = None) -> list[dict]:
    """Scaled deviations n (D_n - D_inf) against the second-order term, per degree.

    Without Monte Carlo the finite-n density is the exact Kac-Rice curve.  With
    ``mc=True`` each degree is also simulated from ``template`` and the
    histogram of all critical values is compared with the bin-averaged
    Kac-Rice curve.
    """
    ns = list(ns)
    if any(b <= a for a, b in zip(ns, ns[1:])) or min(ns) < 2:
        raise ValueError("degrees must be increasing and >= 2")
    xs = np.linspace(0.0, 2.0, 201) if xs is None else np.asarray(xs, dtype=float)
    finf = np.array([densities.second_order(float(x), chi) for x in xs])
    rows = []
    for n in ns:
        dn = np.array([densities.kac_rice_finite(n, float(x)) for x in xs])
        dev = n * (dn - densities.dens_total_limit(xs, "count"))
        row = {"n": n, "sup_finf": float(np.max(np.abs(finf))),
               "sup_dev_minus_finf": float(np.max(np.abs(dev - finf)))}
        if mc:
            if template is None:
                raise ValueError("Monte Carlo mode needs a template config")
            cfg = ExperimentConfig(n, template.samples, template.ensemble, template.master_seed,
                                   template.finder, template.bins, template.xmax)
            summ = run_experiment(cfg, workers)
            emp = np.array(summ.histograms["saddle"]) + np.array(summ.histograms["max"])
            theory = bin_averages(lambda x: densities.kac_rice_finite(n, x), cfg.edges)
            row["sup_hist_minus_finite"] = float(np.max(np.abs(emp - theory)))
            row["identity_failures"] = summ.identity_failures
        rows.append(row)
    return rows
