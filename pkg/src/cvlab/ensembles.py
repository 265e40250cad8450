"""Random holomorphic sections of O(n) on the Riemann sphere.

Two ensembles are supported: the normalized Gaussian ensemble, with i.i.d.
complex Gaussian coefficients of variance 1/(n+1) (so E||s||^2 = 1), and the
spherical ensemble, uniform on the unit L2 sphere.

Per-sample streams are seeded by ``stream_seed(master_seed, sample_id)``, a
SplitMix64 finalizer applied to ``master_seed + (sample_id + 1) * GOLDEN``.
A sample therefore depends only on (master_seed, sample_id), never on
evaluation order or worker count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .geometry import basis_weights

Ensemble = Literal["gaussian", "spherical"]

_MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def stream_seed(master_seed: int, sample_id: int) -> int:
    return splitmix64(master_seed + (sample_id + 1) * GOLDEN)


def make_stream(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


@dataclass(frozen=True, eq=False)
class Section:
    """A degree-n section, coefficients in the orthonormal basis b_j z^j."""

    n: int
    coeffs: np.ndarray
    ensemble: str = "custom"
    sample_id: int = -1
    seed_fingerprint: int = 0
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} coefficients, got shape {c.shape}")
        object.__setattr__(self, "coeffs", c)

    def scaled(self, c: complex) -> "Section":
        return Section(self.n, c * self.coeffs, self.ensemble, self.sample_id,
                       self.seed_fingerprint)

    def monomials(self) -> np.ndarray:
        return self.coeffs * basis_weights(self.n)


def basis_section(n: int, j: int) -> Section:
    """The j-th orthonormal basis element e_j."""
    c = np.zeros(n + 1, dtype=complex)
    c[j] = 1.0
    return Section(n, c)


def orthonormal_basis_weights(n: int) -> np.ndarray:
    return basis_weights(n)


def _gaussian_coeffs(n: int, stream: np.random.Generator) -> np.ndarray:
    z = stream.standard_normal((n + 1, 2))
    return (z[:, 0] + 1j * z[:, 1]) * np.sqrt(0.5 / (n + 1))


def sample_gaussian(n: int, stream: np.random.Generator, *, sample_id: int = -1,
                    seed_fingerprint: int = 0) -> Section:
    if n < 1:
        raise ValueError(f"degree must be >= 1, got {n}")
    return Section(n, _gaussian_coeffs(n, stream), "gaussian", sample_id, seed_fingerprint)


def sample_spherical(n: int, stream: np.random.Generator, *, sample_id: int = -1,
                     seed_fingerprint: int = 0) -> Section:
    if n < 1:
        raise ValueError(f"degree must be >= 1, got {n}")
    c = _gaussian_coeffs(n, stream)
    norm = np.sqrt(np.sum(np.abs(c) ** 2))
    if norm == 0.0:
        raise ValueError("zero Gaussian draw cannot be normalized")
    return Section(n, c / norm, "spherical", sample_id, seed_fingerprint)


def draw_section(n: int, ensemble: Ensemble, master_seed: int, sample_id: int) -> Section:
    """Section number ``sample_id`` of the run seeded by ``master_seed``."""
    seed = stream_seed(master_seed, sample_id)
    stream = make_stream(seed)
    if ensemble == "gaussian":
        return sample_gaussian(n, stream, sample_id=sample_id, seed_fingerprint=seed)
    if ensemble == "spherical":
        return sample_spherical(n, stream, sample_id=sample_id, seed_fingerprint=seed)
    raise ValueError(f"unknown ensemble {ensemble!r}")


def l2_norm(s: Section) -> float:
    return float(np.sqrt(np.sum(np.abs(s.coeffs) ** 2)))
