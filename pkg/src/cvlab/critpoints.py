"""Critical points of |s|_{h^n} for sections of O(n) on the Riemann sphere.

In a chart with coordinate u, the Chern connection gives

    V(u) = (1 + |u|^2) s'(u) - n conj(u) s(u),

and nonvanishing critical points of |s|^2_{h^n} are exactly the zeros of V.
V is not holomorphic, so it is solved as a map R^2 -> R^2 with Newton's
method, using its two Wirtinger derivatives.  Newton basins for V are badly
fragmented, so random starts alone miss points.  Starts therefore come
mainly from a winding-number sweep: V is sampled on a polar grid over the
disc |u| <= 1.05 of each chart (one FFT per ring), and every grid cell
around which arg V winds is a start, together with its corners.  Random
Fubini-Study-uniform starts and the roots of s' are added on top.  The
result is certified by the Morse count on the sphere:
n zeros (minima) - #saddles + #maxima = 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P
from scipy.spatial import cKDTree

from .ensembles import Section, l2_norm, stream_seed, make_stream
from .geometry import ChartPoint, canonicalize, monomial_coefficients

SADDLE = 1
MAX = 2


class FinderError(RuntimeError):
    """Raised when a critical-point search cannot be certified.

    ``points`` holds whatever was found, so callers can still log it.
    """

    def __init__(self, msg: str, points=None):
        super().__init__(msg)
        self.points = points or []


class IncompleteSearch(FinderError):
    pass


class DegenerateHessian(FinderError):
    pass


@dataclass(frozen=True)
class FinderOptions:
    starts_per_degree: float = 6.0
    newton_tol: float = 1e-12
    max_iters: int = 60
    dedup_radius: float = 1e-7
    degeneracy_band: float = 1e-9
    retry_factor: float = 4.0
    grid_rings: int | None = None
    grid_angles: int | None = None
    grid_radius: float = 1.05

    def __post_init__(self):
        for name in ("starts_per_degree", "newton_tol", "max_iters", "dedup_radius",
                     "degeneracy_band"):
            if not getattr(self, name) > 0:
                raise ValueError(f"FinderOptions.{name} must be positive")


@dataclass(frozen=True)
class CriticalPoint:
    location: ChartPoint
    value: float
    morse_index: int
    topological_index: int
    discriminant: float
    newton_residual: float
    last_step: float = 0.0

    @property
    def kind(self) -> str:
        return "saddle" if self.morse_index == SADDLE else "max"


def _derivs(a: np.ndarray, u):
    a1 = P.polyder(a)
    a2 = P.polyder(a1) if len(a1) > 1 else np.zeros(1, complex)
    return P.polyval(u, a), P.polyval(u, a1), P.polyval(u, a2)


def _field(a: np.ndarray, n: int, u):
    s, s1, s2 = _derivs(a, u)
    ub = np.conj(u)
    rho = 1.0 + np.abs(u) ** 2
    V = rho * s1 - n * ub * s
    Vz = rho * s2 + ub * s1 - n * ub * s1
    Vzbar = u * s1 - n * s
    return V, Vz, Vzbar, s


def gradient_field(s: Section, z, chart: str = "Z"):
    """(V, dV/du, dV/d(conj u)) at ``z`` in the given chart."""
    V, Vz, Vzbar, _ = _field(monomial_coefficients(s, chart), s.n, z)
    return V, Vz, Vzbar


def _gradient_scale(s: Section) -> float:
    # typical size of |nabla s|_h for a unit-norm section: sqrt(A_n)
    return l2_norm(s) * math.sqrt(s.n / math.pi)


def relative_gradient(s: Section, z, chart: str = "Z"):
    """Chart-independent |nabla s|_{h^n} = |V| (1+|u|^2)^(-n/2), relative to ||s|| sqrt(n/pi)."""
    V, *_ = gradient_field(s, z, chart)
    return np.abs(V) * (1.0 + np.abs(z) ** 2) ** (-0.5 * s.n) / _gradient_scale(s)


def classify(s: Section, z: complex, chart: str = "Z", band: float = 1e-9):
    """Morse index, topological index and discriminant |Q|^2 - |Lambda|^2 at a critical point.

    Q = d^2/du^2 log|s|^2_h and Lambda = d^2/du d(conj u) log|s|^2_h = -n/(1+|u|^2)^2.
    The real Hessian has eigenvalues 2(Lambda +- |Q|), so the point is a local
    maximum iff |Q| < |Lambda| and a saddle otherwise; it is never a minimum.
    """
    a = monomial_coefficients(s, chart)
    sv, s1, s2 = _derivs(a, z)
    if sv == 0:
        raise ValueError("classification at a zero of s")
    rho = 1.0 + abs(z) ** 2
    Q = s2 / sv - (s1 / sv) ** 2 + s.n * np.conj(z) ** 2 / rho**2
    Lam = -s.n / rho**2
    disc = float(abs(Q) ** 2 - Lam**2)
    if abs(abs(Q) / abs(Lam) - 1.0) < band:
        raise DegenerateHessian(f"|Q|/|Lambda| = {abs(Q) / abs(Lam):.15g} at {z}")
    morse = SADDLE if abs(Q) > abs(Lam) else MAX
    _, Vz, Vzbar, _ = _field(a, s.n, z)
    topo = 1 if abs(Vz) ** 2 - abs(Vzbar) ** 2 > 0 else -1
    return morse, topo, disc


def fs_uniform_points(m: int, rng: np.random.Generator) -> np.ndarray:
    """m points uniform for the Fubini-Study area, as affine coordinates."""
    u = rng.random(m)
    theta = 2 * math.pi * rng.random(m)
    r = np.sqrt(u / (1.0 - u))
    return r * np.exp(1j * theta)


def default_grid(n: int) -> tuple[int, int]:
    rings = 4 * n + 64
    angles = 1 << int(math.ceil(math.log2(16 * n + 128)))
    return rings, angles


def _grid_field(a: np.ndarray, n: int, rs: np.ndarray, m: int) -> np.ndarray:
    """V on the polar grid rs x (2 pi k / m); row i is the ring of radius rs[i]."""
    j = np.arange(n + 1)
    powers = rs[:, None] ** j[None, :]
    buf = np.zeros((len(rs), m), dtype=complex)
    buf[:, : n + 1] = a[None, :] * powers
    s = m * np.fft.ifft(buf, axis=1)
    buf[:] = 0.0
    buf[:, :n] = (a[1:] * j[1:])[None, :] * powers[:, :n]
    s1 = m * np.fft.ifft(buf, axis=1)
    u = rs[:, None] * np.exp(2j * np.pi * np.arange(m) / m)[None, :]
    return (1.0 + rs[:, None] ** 2) * s1 - n * np.conj(u) * s


def winding_numbers(V: np.ndarray) -> tuple[np.ndarray, int]:
    """Winding of V around each polar grid cell, and around the innermost ring."""
    with np.errstate(invalid="ignore", divide="ignore"):
        ph = V / np.abs(V)
    ph = np.where(np.isfinite(ph), ph, 1.0)
    d_ang = np.angle(np.roll(ph, -1, axis=1) * np.conj(ph))
    d_rad = np.angle(ph[1:] * np.conj(ph[:-1]))
    # ccw around a cell: out along theta_k, along ring i+1, in along theta_{k+1}, back on ring i
    w = d_rad + d_ang[1:] - np.roll(d_rad, -1, axis=1) - d_ang[:-1]
    inner = int(np.rint(d_ang[0].sum() / (2 * np.pi)))
    return np.rint(w / (2 * np.pi)).astype(int), inner


def sweep_starts(s: Section, rings: int, angles: int, radius: float = 1.05):
    """Newton starts from every polar cell, in both charts, where V has nonzero winding."""
    rs = np.linspace(radius / rings, radius, rings)
    # fewer than n + 1 angles would alias the FFT
    angles = max(angles, s.n + 1)
    us, cs = [], []
    for flag, chart in ((False, "Z"), (True, "W")):
        V = _grid_field(monomial_coefficients(s, chart), s.n, rs, angles)
        w, inner = winding_numbers(V)
        if inner:
            us.append(np.zeros(1, dtype=complex))
            cs.append(np.array([flag]))
        ii, kk = np.nonzero(w)
        pts = [0.5 * (rs[ii] + rs[ii + 1]) * np.exp(2j * np.pi * (kk + 0.5) / angles)]
        for dr in (0, 1):
            for dk in (0, 1):
                pts.append(rs[ii + dr] * np.exp(2j * np.pi * (kk + dk) / angles))
        z = np.concatenate(pts)
        us.append(z)
        cs.append(np.full(z.shape, flag))
    return canonicalize(np.concatenate(us), np.concatenate(cs))


def _seed_points(s: Section, m: int, rng: np.random.Generator):
    pts = [fs_uniform_points(m, rng)]
    aZ = monomial_coefficients(s, "Z")
    for a, flip in ((aZ, False), (aZ[::-1], True)):
        d = P.polyder(a)
        d = np.trim_zeros(d, "b")
        if len(d) > 1:
            r = P.polyroots(d)
            r = r[np.isfinite(r)]
            if flip:
                r = r[r != 0]
                r = 1.0 / r
            pts.append(r)
    z = np.concatenate(pts)
    charts = np.zeros(z.shape, dtype=bool)
    return canonicalize(z, charts)


def _newton(s: Section, u: np.ndarray, charts: np.ndarray, opts: FinderOptions):
    n = s.n
    coeffs = {False: monomial_coefficients(s, "Z"), True: monomial_coefficients(s, "W")}
    scale = _gradient_scale(s)
    step = np.full(u.shape, np.inf)
    res = np.full(u.shape, np.inf)
    active = np.ones(u.shape, dtype=bool)
    for _ in range(opts.max_iters):
        if not active.any():
            break
        for c in (False, True):
            m = active & (charts == c)
            if not m.any():
                continue
            uu = u[m]
            V, Vz, Vzbar, _ = _field(coeffs[c], n, uu)
            rho = 1.0 + np.abs(uu) ** 2
            res[m] = np.abs(V) * rho ** (-0.5 * n) / scale
            det = np.abs(Vz) ** 2 - np.abs(Vzbar) ** 2
            with np.errstate(divide="ignore", invalid="ignore"):
                d = (-np.conj(Vz) * V + Vzbar * np.conj(V)) / det
            d = np.where(np.isfinite(d), d, 0.0)
            cap = 0.5 * rho
            big = np.abs(d) > cap
            d[big] *= cap[big] / np.abs(d[big])
            u[m] = uu + d
            # step measured in chordal units so both charts are comparable
            step[m] = np.abs(d) / rho
        u, charts = canonicalize(u, charts)
        done = (res < opts.newton_tol) & (step < opts.dedup_radius)
        active &= ~done
    # final residual at the returned location
    for c in (False, True):
        m = charts == c
        if m.any():
            V, *_ = _field(coeffs[c], n, u[m])
            res[m] = np.abs(V) * (1.0 + np.abs(u[m]) ** 2) ** (-0.5 * n) / scale
    return u, charts, res, step


def _unit_vectors(u: np.ndarray, charts: np.ndarray) -> np.ndarray:
    r2 = np.abs(u) ** 2
    v = np.stack([2 * u.real, 2 * u.imag, 1.0 - r2], axis=1) / (1.0 + r2)[:, None]
    v[charts, 1:] *= -1.0
    return v


def _dedup(u, charts, res, radius):
    if len(u) == 0:
        return np.zeros(0, dtype=int)
    order = np.argsort(res, kind="stable")
    vec = _unit_vectors(u[order], charts[order])
    tree = cKDTree(vec)
    taken = np.zeros(len(order), dtype=bool)
    keep = []
    for i in range(len(order)):
        if taken[i]:
            continue
        keep.append(order[i])
        # chordal distance is half the Euclidean distance in R^3
        taken[tree.query_ball_point(vec[i], 2 * radius)] = True
    return np.array(sorted(keep), dtype=int)


def _collect(s: Section, u, charts, res, step, opts: FinderOptions):
    ok = res < opts.newton_tol
    u, charts, res, step = u[ok], charts[ok], res[ok], step[ok]
    keep = _dedup(u, charts, res, opts.dedup_radius)
    value_floor = 1e-10 * l2_norm(s) * math.sqrt((s.n + 1) / math.pi)
    points, degenerate = [], []
    for i in keep:
        loc = ChartPoint("W" if charts[i] else "Z", complex(u[i]))
        val = _hvalue(s, loc)
        if val <= value_floor:
            continue
        try:
            morse, topo, disc = classify(s, loc.coordinate, loc.chart, opts.degeneracy_band)
        except DegenerateHessian as err:
            degenerate.append(str(err))
            continue
        points.append(CriticalPoint(loc, val, morse, topo, disc, float(res[i]), float(step[i])))
    points.sort(key=lambda p: (p.location.chart, p.location.coordinate.real,
                               p.location.coordinate.imag))
    return points, degenerate


def _hvalue(s: Section, p: ChartPoint) -> float:
    a = monomial_coefficients(s, p.chart)
    return float(abs(P.polyval(p.coordinate, a)) * (1.0 + abs(p.coordinate) ** 2) ** (-0.5 * s.n))


def morse_defect(points, n: int) -> int:
    """#saddles - #maxima - (n - 2); zero for a complete search."""
    saddles = sum(p.morse_index == SADDLE for p in points)
    return saddles - (len(points) - saddles) - (n - 2)


def find_critical_points(s: Section, opts: FinderOptions | None = None,
                         rng: np.random.Generator | None = None) -> list[CriticalPoint]:
    """All nonvanishing critical points of |s|_{h^n}, classified and canonicalized.

    Raises
    ------
    DegenerateHessian
        If some critical point has |Q| within the degeneracy band of |Lambda|.
    IncompleteSearch
        If the Morse count fails even after retrying with more starts.
    """
    opts = opts or FinderOptions()
    if not np.any(s.coeffs):
        raise ValueError("zero section has no critical values")
    if rng is None:
        rng = make_stream(stream_seed(s.seed_fingerprint, 0x5EED))
    m = int(math.ceil(opts.starts_per_degree * s.n))
    rings, angles = default_grid(s.n)
    rings = opts.grid_rings or rings
    angles = opts.grid_angles or angles
    u_r, c_r = _seed_points(s, m, rng)
    u_g, c_g = sweep_starts(s, rings, angles, opts.grid_radius)
    u, c, res, step = _newton(s, np.concatenate([u_g, u_r]), np.concatenate([c_g, c_r]), opts)
    points, degenerate = _collect(s, u, c, res, step, opts)
    if morse_defect(points, s.n) != 0 and not degenerate:
        # 4x the random starts and 4x the grid cells
        extra = fs_uniform_points(int(math.ceil(opts.retry_factor * m)), rng)
        eu, ec = canonicalize(extra, np.zeros(extra.shape, dtype=bool))
        gu, gc = sweep_starts(s, 2 * rings, 2 * angles, opts.grid_radius)
        eu, ec, eres, estep = _newton(s, np.concatenate([gu, eu]), np.concatenate([gc, ec]), opts)
        points, degenerate = _collect(s, np.concatenate([u, eu]), np.concatenate([c, ec]),
                                      np.concatenate([res, eres]),
                                      np.concatenate([step, estep]), opts)
    if degenerate:
        raise DegenerateHessian("; ".join(degenerate), points)
    if morse_defect(points, s.n) != 0:
        raise IncompleteSearch(
            f"Morse count off by {morse_defect(points, s.n)} with {len(points)} points", points)
    return points
