"""Riemann sphere with the Fubini-Study metric, normalized to total area pi.

The line bundle O(n) carries the Hermitian metric h^n = (1 + |z|^2)^(-n) in the
affine chart ``Z``; the second chart ``W`` uses w = 1/z.  Everything here is
exact for this constant-curvature model: the Bergman kernel is
((n+1)/pi) (1 + z conj(w))^n and all TYZ coefficients past a1 vanish.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

Chart = Literal["Z", "W"]


@dataclass(frozen=True)
class SurfaceModel:
    name: str
    euler_characteristic: int
    area: float
    scalar_curvature: float
    a1: float

    def gauss_bonnet_defect(self) -> float:
        """a1 * area - (pi/2) * chi; zero for a constant-curvature model."""
        return self.a1 * self.area - 0.5 * math.pi * self.euler_characteristic


CP1 = SurfaceModel(name="CP1", euler_characteristic=2, area=math.pi,
                   scalar_curvature=2.0, a1=1.0)


@dataclass(frozen=True)
class ChartPoint:
    chart: Chart
    coordinate: complex

    def to_z(self) -> complex:
        """Affine coordinate in chart Z (``inf`` for the pole of W)."""
        if self.chart == "Z":
            return self.coordinate
        if self.coordinate == 0:
            return complex(math.inf, 0.0)
        return 1.0 / self.coordinate

    def canonical(self) -> "ChartPoint":
        if abs(self.coordinate) <= 1.0:
            return self
        other: Chart = "W" if self.chart == "Z" else "Z"
        return ChartPoint(other, 1.0 / self.coordinate)

    def unit_vector(self) -> np.ndarray:
        """Point on the unit 2-sphere (inverse stereographic projection)."""
        u = self.coordinate
        r2 = abs(u) ** 2
        v = np.array([2 * u.real, 2 * u.imag, 1.0 - r2]) / (1.0 + r2)
        if self.chart == "W":
            # w = 1/z reflects through the equator and conjugates
            v = np.array([v[0], -v[1], -v[2]])
        return v


def fs_distance(p: ChartPoint, q: ChartPoint) -> float:
    """Chordal distance |z1 - z2| / sqrt((1+|z1|^2)(1+|z2|^2)), in [0, 1]."""
    return 0.5 * float(np.linalg.norm(p.unit_vector() - q.unit_vector()))


def canonicalize(coords: np.ndarray, charts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized chart canonicalization; ``charts`` is a boolean array, True = W."""
    coords = np.asarray(coords, dtype=complex).copy()
    charts = np.asarray(charts, dtype=bool).copy()
    out = np.abs(coords) > 1.0
    coords[out] = 1.0 / coords[out]
    charts[out] = ~charts[out]
    return coords, charts


def fs_potential(z: complex | np.ndarray) -> float | np.ndarray:
    """Local Kahler potential log(1 + |z|^2), so that h = exp(-phi)."""
    return np.log1p(np.abs(z) ** 2)


def basis_weights(n: int) -> np.ndarray:
    """b_j = sqrt((n+1) C(n, j) / pi); b_j z^j is an orthonormal basis of degree-n sections."""
    if n < 1:
        raise ValueError(f"degree must be >= 1, got {n}")
    j = np.arange(n + 1)
    if n > 500:
        from scipy.special import gammaln
        logc = gammaln(n + 1) - gammaln(j + 1) - gammaln(n - j + 1)
        return np.exp(0.5 * (np.log(n + 1) + logc - np.log(math.pi)))
    binom = np.array([math.comb(n, int(k)) for k in j], dtype=float)
    return np.sqrt((n + 1) * binom / math.pi)


def monomial_coefficients(s, chart: Chart = "Z") -> np.ndarray:
    """Ascending monomial coefficients a_j of s in the given chart."""
    a = np.asarray(s.coeffs, dtype=complex) * basis_weights(s.n)
    return a if chart == "Z" else a[::-1]


def chart_flip(s):
    """Representation w^n s(1/w) of s in the other chart.

    The basis weights are symmetric in j <-> n - j, so this just reverses
    the coefficient sequence.  Returns a new section of the same type.
    """
    return dataclasses.replace(s, coeffs=np.asarray(s.coeffs)[::-1].copy())


def hermitian_value(s, p: ChartPoint) -> float:
    """Pointwise norm |s(z)| (1 + |z|^2)^(-n/2), evaluated in the chart of ``p``."""
    a = monomial_coefficients(s, p.chart)
    u = complex(p.coordinate)
    val = np.polynomial.polynomial.polyval(u, a)
    return float(abs(val) * (1.0 + abs(u) ** 2) ** (-0.5 * s.n))


def bergman_kernel(n: int, z, w) -> complex:
    """Off-diagonal Bergman kernel ((n+1)/pi)(1 + z conj(w))^n in the chart-Z frame."""
    return (n + 1) / math.pi * (1.0 + z * np.conj(w)) ** n


def bergman_diagonal(n: int) -> float:
    """h^n-normalized diagonal kernel (n+1)/pi, i.e. (n/pi)(1 + a1/n) with a1 = 1."""
    if n < 1:
        raise ValueError(f"degree must be >= 1, got {n}")
    return (n + CP1.a1) / math.pi


def section_dimension(n: int, chi: int = CP1.euler_characteristic) -> int:
    """Riemann-Roch in complex dimension one: d_n = n + chi/2."""
    return n + chi // 2


@dataclass(frozen=True)
class CovarianceData:
    n: int
    A_n: float
    Lambda_n: np.ndarray
    LambdaTilde_n: np.ndarray
    d_n: int


def covariance_data(n: int) -> CovarianceData:
    """Exact Kac-Rice covariance data at degree n.

    ``A_n`` is the variance of the first covariant derivative, ``Lambda_n``
    the joint covariance of (second covariant derivative, value) given a
    critical point, for coefficients of variance 1/d_n.  ``LambdaTilde_n``
    is Lambda_n after rescaling the second-derivative slot by n and the
    whole matrix by pi d_n / n.
    """
    if n < 2:
        raise ValueError(f"covariance data degenerates for n < 2, got {n}")
    d_n = section_dimension(n)
    a1 = CP1.a1
    S = CP1.scalar_curvature
    pref = n / (math.pi * d_n)
    A = pref * (n + a1)
    lam = pref * np.diag([(2.0 * n * n - n * S) * (1.0 + a1 / n), 1.0 + a1 / n])
    scale = math.pi * d_n / n
    lam_tilde = scale * np.diag([lam[0, 0] / n**2, lam[1, 1]])
    return CovarianceData(n=n, A_n=A, Lambda_n=lam, LambdaTilde_n=lam_tilde, d_n=d_n)


LAMBDA0 = np.diag([2.0, 1.0])
LAMBDA1 = np.diag([2.0 * CP1.a1 - CP1.scalar_curvature, CP1.a1])


def kernel_derivative_fd(n: int, p: int, q: int, h: float | None = None) -> float:
    """d^p/du^p d^q/dv^q of (1 + u v)^n / pi at u = v = 0 by 4th-order central differences.

    This is the normalized covariance kernel Pi_n / d_n with v = conj(w), so
    e.g. (p, q) = (2, 2) gives Lambda_n[0, 0] and (1, 1) gives A_n.
    """
    if h is None:
        h = 0.05 / math.sqrt(n)
    stencils = {
        0: ([0], [1.0]),
        1: ([-2, -1, 1, 2], [1 / 12, -8 / 12, 8 / 12, -1 / 12]),
        2: ([-2, -1, 0, 1, 2], [-1 / 12, 16 / 12, -30 / 12, 16 / 12, -1 / 12]),
    }
    pu, wu = stencils[p]
    pv, wv = stencils[q]
    total = 0.0
    for i, a in zip(pu, wu):
        for k, b in zip(pv, wv):
            total += a * b * (1.0 + (i * h) * (k * h)) ** n
    return total / (math.pi * h ** (p + q))
