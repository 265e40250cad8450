"""Acceptance suite: one pass/fail line per criterion, tolerances pinned."""

import math
import time

import numpy as np
from scipy import integrate, stats

from conftest import ACCEPTANCE_LINES
from cvlab import densities as D
from cvlab.cli import main as cli_main, oracle_check
from cvlab.experiments import KINDS, LIMIT_CDFS, ExperimentConfig, ks_statistic, run_experiment
from cvlab.geometry import bergman_diagonal, covariance_data, kernel_derivative_fd

PI = math.pi


def report(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_1_closed_form_vs_index_integral():
    quad = D.QuadratureSpec(method="quad")
    t0 = time.perf_counter()
    err = 0.0
    for x in np.linspace(0.0, 2.5, 400):
        w = x * math.exp(-PI * x * x)
        err = max(err,
                  abs(D.dens_max_limit(x, "paper") - D.index_integral_f1k(x, "max", quad) * w),
                  abs(D.dens_saddle_limit(x, "paper") - D.index_integral_f1k(x, "saddle", quad) * w))
    dt = time.perf_counter() - t0
    report(1, err < 1e-9 and dt < 5.0, f"max abs error {err:.2e} (< 1e-9), {dt:.2f} s (< 5 s)")


def test_criterion_2_masses():
    sad = integrate.quad(D.dens_saddle_limit, 0, np.inf, epsabs=1e-13, epsrel=1e-13)[0]
    mx = integrate.quad(D.dens_max_limit, 0, np.inf, epsabs=1e-13, epsrel=1e-13)[0]
    e1, e2, e3 = abs(sad - 4 / 3), abs(mx - 1 / 3), abs(sad / mx - 4)
    report(2, max(e1, e2, e3) < 1e-8,
           f"saddle {sad:.12f}, max {mx:.12f}, ratio {sad / mx:.12f} (tol 1e-8)")


def test_criterion_3_second_order_term():
    t0 = time.perf_counter()
    xs = np.linspace(0.0, 2.0, 401)
    finf = np.array([D.second_order(x, 2) for x in xs])
    r200 = D.second_order_residual(200, xs, chi=2)
    r400 = D.second_order_residual(400, xs, chi=2)
    zero = all(D.second_order(x, 0) == 0.0 for x in xs)
    dt = time.perf_counter() - t0
    bound = 0.05 * float(np.max(np.abs(finf)))
    ok = r400 < bound and r400 < r200 and zero and dt < 30.0
    report(3, ok, f"residual n=400 {r400:.2e} (< {bound:.3f}), n=200 {r200:.2e}, "
                  f"chi=0 zero {zero}, {dt:.1f} s (< 30 s)")


def test_criterion_4_monte_carlo_counts():
    t0 = time.perf_counter()
    s = run_experiment(ExperimentConfig(n=40, samples=500, ensemble="gaussian", master_seed=42),
                       workers=1)
    dt = time.perf_counter() - t0
    sad, mx = s.counts["saddle"]["mean_over_n"], s.counts["max"]["mean_over_n"]
    es, em = abs(sad / (4 / 3) - 1), abs(mx / (1 / 3) - 1)
    # samples whose Morse count is off are exactly the ones flagged incomplete
    good = sum(r.status == "ok" and
               sum(k == "saddle" for k, *_ in r.rows) - sum(k == "max" for k, *_ in r.rows) == 38
               for r in s.samples) / 500
    ok = es < 0.03 and em < 0.06 and good >= 0.99 and dt < 600
    report(4, ok, f"saddles/n {sad:.4f} (rel err {es:.4f} < 0.03), maxima/n {mx:.4f} "
                  f"(rel err {em:.4f} < 0.06), Morse count ok {good:.3f} (>= 0.99), {dt:.0f} s")


def test_criterion_5_distributional_fit():
    g = run_experiment(ExperimentConfig(n=60, samples=2000, ensemble="gaussian", master_seed=42),
                       workers=1)
    sp = run_experiment(ExperimentConfig(n=60, samples=2000, ensemble="spherical", master_seed=42),
                        workers=1)
    ks = {k: ks_statistic(g.values(k), LIMIT_CDFS[k]) for k in KINDS}
    ks2 = {k: float(stats.ks_2samp(g.values(k), sp.values(k)).statistic) for k in KINDS}
    ok = max(ks.values()) < 0.05 and max(ks2.values()) < 0.02
    report(5, ok, f"KS saddle {ks['saddle']:.4f}, max {ks['max']:.4f} (< 0.05); "
                  f"gaussian vs spherical saddle {ks2['saddle']:.4f}, max {ks2['max']:.4f} (< 0.02)")


def test_criterion_6_oracle_equivalence():
    t0 = time.perf_counter()
    reps = [oracle_check(n, 50, seed=2024) for n in range(3, 7)]
    dt = time.perf_counter() - t0
    worst = max(r["max_pairing_distance"] for r in reps)
    bad = sum(len(r["mismatched_samples"]) for r in reps)
    report(6, bad == 0 and worst < 1e-8 and dt < 60,
           f"mismatched sections {bad}/200, pairing distance {worst:.1e} (< 1e-8), {dt:.1f} s (< 60 s)")


def test_criterion_7_geometry_exactness():
    rel = 0.0
    for n in (5, 20, 50):
        c = covariance_data(n)
        rel = max(rel,
                  abs(kernel_derivative_fd(n, 2, 2) / c.Lambda_n[0, 0] - 1),
                  abs(kernel_derivative_fd(n, 0, 0) / c.Lambda_n[1, 1] - 1),
                  abs(kernel_derivative_fd(n, 1, 1) / c.A_n - 1))
    rr = 0.0
    for n in (1, 5, 20, 50):
        total = integrate.quad(lambda r: bergman_diagonal(n) * 2 * PI * r / (1 + r * r) ** 2,
                               0, np.inf, epsabs=1e-13, epsrel=1e-13)[0]
        rr = max(rr, abs(total - (n + 1)))
    report(7, rel < 1e-6 and rr < 1e-10,
           f"Lambda vs finite differences rel err {rel:.1e} (< 1e-6), "
           f"kernel integral err {rr:.1e} (< 1e-10)")


def test_criterion_8_determinism(tmp_path):
    blobs = []
    for workers in (1, 4, 16):
        d = tmp_path / f"w{workers}"
        d.mkdir()
        code = cli_main(["simulate", "--n", "20", "--samples", "48", "--seed", "42",
                         "--out", str(d / "sim.csv"), "--summary", str(d / "sum.json"),
                         "--workers", str(workers)])
        assert code == 0
        blobs.append(((d / "sim.csv").read_bytes(), (d / "sum.json").read_bytes()))
    same = all(b == blobs[0] for b in blobs)
    report(8, same, f"outputs byte-identical under 1, 4, 16 workers: {same}")
