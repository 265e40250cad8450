"""Algebraic ground truth for critical points at small degree.

Writing w for conj(z), the critical-point equation and its conjugate become
the polynomial system

    P(z, w) = (1 + z w) s'(z) - n w s(z) = 0
    R(z, w) = (1 + z w) t'(w) - n z t(w) = 0,     t = s with conjugated coefficients.

P is linear in w, w = -s'(z) / (z s'(z) - n s(z)) = N/D, so the resultant in
w is G(z) = sum_k r_k(z) N^k D^(n-k), where R = sum_k r_k(z) w^k.  G has degree
n^2 - n + 1; its roots (companion-matrix eigenvalues) are polished by complex
Newton on (P, R), and only solutions with w = conj(z) are real critical
points.  This is done in both charts, keeping roots in each closed unit disc.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.special import gammaln

from .critpoints import CriticalPoint, classify
from .ensembles import Section
from .geometry import ChartPoint, basis_weights, hermitian_value, monomial_coefficients

MAX_DEGREE = 8


class IllConditioned(RuntimeError):
    pass


def eliminant(a: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(G, N, D) for monomial coefficients ``a`` of s, all ascending."""
    s1 = P.polyder(a)
    N = -s1
    D = P.polysub(P.polymulx(s1), n * a)
    t = np.conj(a)
    t1 = np.concatenate([P.polyder(t), [0.0]])
    G = np.zeros(1, dtype=complex)
    Npow = [np.ones(1, dtype=complex)]
    Dpow = [np.ones(1, dtype=complex)]
    for _ in range(n):
        Npow.append(P.polymul(Npow[-1], N))
        Dpow.append(P.polymul(Dpow[-1], D))
    for k in range(n + 1):
        r_k = np.array([t1[k], (t1[k - 1] if k >= 1 else 0.0) - n * t[k]])
        G = P.polyadd(G, P.polymul(r_k, P.polymul(Npow[k], Dpow[n - k])))
    return G, N, D


def leading_weight(G: np.ndarray) -> float:
    """Leading coefficient of G relative to its largest Kostlan-weighted coefficient.

    Dividing g_k by sqrt(C(d, k)) removes the binomial growth that any
    polynomial with roots spread over the sphere has, so a small value
    really means a root near infinity.
    """
    d = len(G) - 1
    k = np.arange(d + 1)
    logw = 0.5 * (gammaln(d + 1) - gammaln(k + 1) - gammaln(d - k + 1))
    weighted = np.abs(G) * np.exp(-logw)
    return float(weighted[-1] / weighted.max())


def _system(a, n, z, w):
    s0 = P.polyval(z, a)
    s1 = P.polyval(z, P.polyder(a))
    s2 = P.polyval(z, P.polyder(a, 2)) if n >= 2 else 0.0
    t = np.conj(a)
    t0 = P.polyval(w, t)
    t1 = P.polyval(w, P.polyder(t))
    t2 = P.polyval(w, P.polyder(t, 2)) if n >= 2 else 0.0
    Pv = (1 + z * w) * s1 - n * w * s0
    Rv = (1 + z * w) * t1 - n * z * t0
    J = np.array([[w * s1 + (1 + z * w) * s2 - n * w * s1, z * s1 - n * s0],
                  [w * t1 - n * t0, z * t1 + (1 + z * w) * t2 - n * z * t1]])
    return np.array([Pv, Rv]), J


def _polish(a, n, z, w, iters=8):
    for _ in range(iters):
        F, J = _system(a, n, z, w)
        try:
            dz, dw = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            break
        z, w = z + dz, w + dw
        if abs(dz) + abs(dw) < 1e-15 * (1 + abs(z)):
            break
    return z, w


def _chart_solutions(s: Section, chart: str, tol: float, lead_tol: float):
    a = monomial_coefficients(s, chart)
    a = a / np.max(np.abs(a))
    n = s.n
    G, N, D = eliminant(a, n)
    if abs(leading_weight(G)) < lead_tol:
        raise IllConditioned(f"eliminant leading coefficient {abs(leading_weight(G)):.3g}")
    out = []
    for z in np.roots(G[::-1]):
        if abs(z) > 1.0 + 1e-6:
            continue
        d = P.polyval(z, D)
        if d == 0:
            continue
        w = P.polyval(z, N) / d
        z, w = _polish(a, n, complex(z), complex(w))
        if abs(w - np.conj(z)) < tol and abs(z) <= 1.0 + 1e-6:
            out.append(ChartPoint(chart, complex(0.5 * (z + np.conj(w)))))
    return out


def _merge(points: list[ChartPoint], radius: float = 1e-9) -> list[ChartPoint]:
    kept: list[ChartPoint] = []
    vecs: list[np.ndarray] = []
    for p in points:
        v = p.unit_vector()
        if all(0.5 * np.linalg.norm(v - q) > radius for q in vecs):
            kept.append(p.canonical())
            vecs.append(v)
    return kept


def _solve(s: Section, tol: float, lead_tol: float, band: float) -> list[CriticalPoint]:
    locs = _merge(_chart_solutions(s, "Z", tol, lead_tol) + _chart_solutions(s, "W", tol, lead_tol))
    pts = []
    floor = 1e-10 * math.sqrt(float(np.sum(np.abs(s.coeffs) ** 2)) * (s.n + 1) / math.pi)
    for loc in locs:
        val = hermitian_value(s, loc)
        if val <= floor:
            continue
        morse, topo, disc = classify(s, loc.coordinate, loc.chart, band)
        pts.append(CriticalPoint(loc, val, morse, topo, disc, 0.0))
    return pts


def rotate_section(s: Section, alpha: complex, beta: complex) -> Section:
    """Pull back s by the unitary Mobius map g(z) = (alpha z + beta)/(-conj(beta) z + conj(alpha)).

    Requires |alpha|^2 + |beta|^2 = 1.  Then |s o g|_h(z) = |s|_h(g(z)), so
    critical points of the result are g^{-1} of those of s, with equal values.
    """
    n = s.n
    a = monomial_coefficients(s, "Z")
    num = np.array([beta, alpha])
    den = np.array([np.conj(alpha), -np.conj(beta)])
    out = np.zeros(n + 1, dtype=complex)
    for j in range(n + 1):
        out = P.polyadd(out, a[j] * P.polymul(P.polypow(num, j), P.polypow(den, n - j)))
    out = np.concatenate([out, np.zeros(n + 1 - len(out))])
    return Section(n, out / basis_weights(n), s.ensemble, s.sample_id, s.seed_fingerprint)


def _mobius(alpha: complex, beta: complex, z: complex) -> complex:
    den = -np.conj(beta) * z + np.conj(alpha)
    if den == 0:
        return complex(math.inf)
    return (alpha * z + beta) / den


def algebraic_oracle(s: Section, *, tol: float = 1e-8, lead_tol: float = 1e-12,
                     band: float = 1e-9, retries: int = 5,
                     rng: np.random.Generator | None = None) -> list[CriticalPoint]:
    """Critical points of |s|_{h^n} by resultant elimination, for 1 <= n <= 8."""
    if not 1 <= s.n <= MAX_DEGREE:
        raise ValueError(f"oracle supports 1 <= n <= {MAX_DEGREE}, got {s.n}")
    try:
        return _solve(s, tol, lead_tol, band)
    except IllConditioned:
        if retries <= 0:
            raise
    rng = rng or np.random.default_rng(s.seed_fingerprint)
    for _ in range(retries):
        q = rng.standard_normal(4)
        q /= np.linalg.norm(q)
        alpha, beta = complex(q[0], q[1]), complex(q[2], q[3])
        try:
            pts = _solve(rotate_section(s, alpha, beta), tol, lead_tol, band)
        except IllConditioned:
            continue
        out = []
        for p in pts:
            z = _mobius(alpha, beta, p.location.to_z())
            loc = ChartPoint("W", 0j) if math.isinf(abs(z)) else ChartPoint("Z", complex(z)).canonical()
            morse, topo, disc = classify(s, loc.coordinate, loc.chart, band)
            out.append(CriticalPoint(loc, hermitian_value(s, loc), morse, topo, disc, 0.0))
        return out
    raise IllConditioned("eliminant ill-conditioned in every trial chart")
