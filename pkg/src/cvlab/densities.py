"""Theory curves for the density of critical values of |s|_{h^n} on Riemann surfaces.

Two normalizations are exposed.  ``"paper"`` is the classical form of the limit
densities of saddle and maximum values, which integrate to (4/3)/pi^3 and
(1/3)/pi^3.  ``"count"`` multiplies by pi^3, so that the densities integrate to
the expected number of critical points per unit degree (4/3 and 1/3); the
finite-n Kac-Rice density and the second-order term are in this form.

Every xi-integral is radial: with t = |xi|^2, d(xi) = pi dt, and kernels of the
form |t - a| are split at t = a.  The closed-form route evaluates the pieces
with regularized incomplete gamma functions; the quadrature route uses
adaptive Gauss-Kronrod on each piece and serves as an independent check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np
from scipy import integrate, special

from .geometry import covariance_data

Convention = Literal["paper", "count"]
PI = math.pi
PI3 = PI**3


class ToleranceNotMet(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-11
    method: Literal["closed", "quad"] = "closed"

    def __post_init__(self):
        if not 0 < self.abs_tol < 1e-6:
            raise ValueError("abs_tol must lie in (0, 1e-6)")
        if self.method not in ("closed", "quad"):
            raise ValueError(f"unknown method {self.method!r}")


DEFAULT_QUAD = QuadratureSpec()


@dataclass
class DensityCurve:
    name: str
    convention: str
    xs: np.ndarray
    values: np.ndarray
    n: int | None = None
    chi: int | None = None
    meta: dict = field(default_factory=dict)


def _scale(convention: Convention) -> float:
    if convention == "paper":
        return 1.0
    if convention == "count":
        return PI3
    raise ValueError(f"unknown convention {convention!r}")


# -- closed-form limit densities ------------------------------------------------

def dens_max_limit(x, convention: Convention = "count"):
    """Limit density of values of |s| at local maxima."""
    x = np.asarray(x, dtype=float)
    # 1 - exp(-u) via expm1 keeps the x^5 behaviour near 0 accurate
    bracket = 2 * x**2 / PI + 4 / PI**2 * np.expm1(-PI * x**2 / 2)
    return _scale(convention) * x * bracket * np.exp(-PI * x**2)


def dens_saddle_limit(x, convention: Convention = "count"):
    """Limit density of values of |s| at saddle points."""
    x = np.asarray(x, dtype=float)
    return _scale(convention) * 4 * x / PI**2 * np.exp(-1.5 * PI * x**2)


def dens_total_limit(x, convention: Convention = "count"):
    return dens_max_limit(x, convention) + dens_saddle_limit(x, convention)


def saddle_limit_cdf(x):
    """CDF of the saddle-value law normalized to unit mass."""
    x = np.asarray(x, dtype=float)
    return -np.expm1(-1.5 * PI * x**2)


def max_limit_cdf(x):
    """CDF of the local-maximum-value law normalized to unit mass."""
    u = PI * np.asarray(x, dtype=float) ** 2
    mass = (-np.expm1(-u) - u * np.exp(-u)) + 2 * np.expm1(-u) - (4 / 3) * np.expm1(-1.5 * u)
    return 3 * mass


# -- radial moments -------------------------------------------------------------

def _radial_pieces_closed(beta: float, a: float, k: int) -> tuple[float, float]:
    """(lower, upper) = int_0^a and int_a^inf of t^k e^{-beta t} dt."""
    g = math.gamma(k + 1) / beta ** (k + 1)
    return g * special.gammainc(k + 1, beta * a), g * special.gammaincc(k + 1, beta * a)


def _abs_moment_closed(beta: float, a: float, k: int) -> float:
    """int_0^inf t^k e^{-beta t} |t - a| dt."""
    lo_k, up_k = _radial_pieces_closed(beta, a, k)
    lo_k1, up_k1 = _radial_pieces_closed(beta, a, k + 1)
    return (a * lo_k - lo_k1) + (up_k1 - a * up_k)


def _abs_moment_quad(beta: float, a: float, k: int, tol: float) -> float:
    f = lambda t: t**k * math.exp(-beta * t) * abs(t - a)
    total, err = 0.0, 0.0
    if a > 0:
        v, e = integrate.quad(f, 0.0, a, epsabs=tol / 4, epsrel=1e-13, limit=200)
        total, err = total + v, err + e
    v, e = integrate.quad(f, a, np.inf, epsabs=tol / 4, epsrel=1e-13, limit=200)
    total, err = total + v, err + e
    if err > tol:
        raise ToleranceNotMet(f"radial quadrature error {err:.3g} exceeds {tol:.3g}")
    return total


def abs_moment(beta: float, a: float, k: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    if quad.method == "closed":
        return _abs_moment_closed(beta, a, k)
    return _abs_moment_quad(beta, a, k, quad.abs_tol)


# -- index-restricted integral ---------------------------------------------------

def index_integral_f1k(x: float, k: str, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """(2/pi) int e^{-pi|xi|^2} |2|xi|^2 - x^2| over the index-k region of xi.

    The region is |xi|^2 < x^2/2 for ``k="max"`` and |xi|^2 > x^2/2 for
    ``k="saddle"``.  Radially this is 2 int e^{-pi t} |2t - x^2| dt.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    c = 0.5 * x * x
    if k not in ("max", "saddle"):
        raise ValueError(f"k must be 'max' or 'saddle', got {k!r}")
    if quad.method == "closed":
        (lo0, up0), (lo1, up1) = (_radial_pieces_closed(PI, c, 0),
                                  _radial_pieces_closed(PI, c, 1))
        if k == "max":
            return 2 * (x * x * lo0 - 2 * lo1)
        return 2 * (2 * up1 - x * x * up0)
    f = lambda t: 2 * math.exp(-PI * t) * abs(2 * t - x * x)
    if k == "max":
        if c == 0:
            return 0.0
        v, e = integrate.quad(f, 0.0, c, epsabs=quad.abs_tol / 2, epsrel=1e-13, limit=200)
    else:
        v, e = integrate.quad(f, c, np.inf, epsabs=quad.abs_tol / 2, epsrel=1e-13, limit=200)
    if e > quad.abs_tol:
        raise ToleranceNotMet(f"quadrature error {e:.3g} exceeds {quad.abs_tol:.3g}")
    return v


# -- second-order term and finite-n density --------------------------------------

def second_order(x: float, chi: int, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Coefficient of 1/n in the expansion of the critical-value density.

    -(chi pi^2 x / 4) int_C e^{-pi|xi|^2/2 - pi x^2} (pi|xi|^2 - 2) ||xi|^2 - x^2| d(xi),
    which depends on the surface only through its Euler characteristic.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if chi == 0 or x == 0:
        return 0.0
    a = x * x
    beta = PI / 2
    inner = PI * (PI * abs_moment(beta, a, 1, quad) - 2 * abs_moment(beta, a, 0, quad))
    return -chi * PI**2 * x / 4 * math.exp(-PI * a) * inner


def kac_rice_finite(n: int, x: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Exact expected density of critical values (count form) at degree n on CP^1.

    Obtained from the rescaled Kac-Rice integral with the exact covariance
    data: the Gaussian weight is exp(-beta |xi|^2 - pi x^2) with
    beta = pi n / (2(n-1)).
    """
    if n < 2:
        raise ValueError(f"finite-n density needs n >= 2, got {n}")
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0:
        return 0.0
    cov = covariance_data(n)
    # (pi d_n / n) * LambdaTilde^{-1}: Gaussian weights on |xi|^2 and on x^2
    w = (PI * cov.d_n / n) / np.diag(cov.LambdaTilde_n)
    beta, gamma_x = float(w[0]), float(w[1])
    area = PI
    pref = 2 * n**3 * x / PI**2 * area / (cov.A_n * np.linalg.det(cov.Lambda_n))
    radial = PI * abs_moment(beta, x * x, 0, quad)
    return float(pref * math.exp(-gamma_x * x * x) * radial)


def kac_rice_finite_simplified(n: int, x: float) -> float:
    """Same density via (pi^2 n x/(n-1)) e^{-pi x^2} pi (a/b - 1/b^2 + 2e^{-ab}/b^2)."""
    beta = PI * n / (2 * (n - 1))
    a = x * x
    j = a / beta - 1 / beta**2 + 2 * math.exp(-beta * a) / beta**2
    return PI**2 * n * x / (n - 1) * math.exp(-PI * a) * PI * j


# -- curves ---------------------------------------------------------------------

_LIMITS: dict[str, Callable] = {
    "saddle": dens_saddle_limit,
    "max": dens_max_limit,
    "total": dens_total_limit,
}


def curve(name: str, xs, *, convention: Convention = "count", n: int | None = None,
          chi: int | None = None, quad: QuadratureSpec = DEFAULT_QUAD) -> DensityCurve:
    """Sample a named theory curve on the grid ``xs``.

    Names: ``saddle``, ``max``, ``total`` (limit densities), ``finf``
    (second-order term, needs ``chi``), ``finite`` (Kac-Rice at degree ``n``).
    """
    xs = np.asarray(xs, dtype=float)
    if name in _LIMITS:
        vals = _LIMITS[name](xs, convention)
    elif name == "finf":
        if chi is None:
            raise ValueError("finf curve needs chi")
        vals = np.array([second_order(float(x), chi, quad) for x in xs])
        if convention == "paper":
            vals = vals / PI3
    elif name == "finite":
        if n is None:
            raise ValueError("finite curve needs n")
        vals = np.array([kac_rice_finite(n, float(x), quad) for x in xs])
        if convention == "paper":
            vals = vals / PI3
    else:
        raise ValueError(f"unknown curve {name!r}")
    return DensityCurve(name=name, convention=convention, xs=xs, values=np.asarray(vals, float),
                        n=n, chi=chi)


def second_order_residual(n: int, xs, chi: int = 2) -> float:
    """sup_x |n (D_n - D_inf) - F_inf| over the grid, in count form."""
    xs = np.asarray(xs, dtype=float)
    dn = np.array([kac_rice_finite(n, float(x)) for x in xs])
    finf = np.array([second_order(float(x), chi) for x in xs])
    return float(np.max(np.abs(n * (dn - dens_total_limit(xs, "count")) - finf)))
