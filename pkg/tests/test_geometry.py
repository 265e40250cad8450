import math

import numpy as np
import pytest
from scipy import integrate

from cvlab.ensembles import Section, basis_section, draw_section
from cvlab.geometry import (CP1, LAMBDA0, LAMBDA1, ChartPoint, basis_weights, bergman_diagonal,
                            chart_flip, covariance_data, fs_distance, fs_potential,
                            hermitian_value, kernel_derivative_fd, section_dimension)


def test_fs_potential_values():
    assert fs_potential(0) == 0.0
    assert fs_potential(1.0) == pytest.approx(math.log(2), abs=1e-15)
    assert fs_potential(1j) == pytest.approx(0.693147, abs=1e-6)


def test_surface_model_cp1():
    assert CP1.area == math.pi
    assert CP1.a1 == CP1.scalar_curvature / 2 == 1.0
    assert CP1.euler_characteristic == 2
    assert CP1.gauss_bonnet_defect() == 0.0


@pytest.mark.parametrize("n", [1, 4, 10])
def test_hermitian_value_of_e0_at_origin(n):
    s = basis_section(n, 0)
    assert hermitian_value(s, ChartPoint("Z", 0j)) == pytest.approx(math.sqrt((n + 1) / math.pi))


def test_hermitian_value_vanishes_at_zero_of_section():
    s = basis_section(3, 2)
    assert hermitian_value(s, ChartPoint("Z", 0j)) == 0.0


def test_chart_flip_reverses_and_is_involution():
    s = Section(3, [1, 2j, 3, 4 - 1j])
    f = chart_flip(s)
    np.testing.assert_array_equal(f.coeffs, [4 - 1j, 3, 2j, 1])
    np.testing.assert_array_equal(chart_flip(f).coeffs, s.coeffs)


def test_chart_invariance_random():
    rng = np.random.default_rng(11)
    worst = 0.0
    for k in range(1000):
        n = int(rng.integers(1, 40))
        s = draw_section(n, "gaussian", 5, k)
        r = rng.uniform(0.5, 2.0)
        z = r * np.exp(2j * math.pi * rng.random())
        a = hermitian_value(s, ChartPoint("Z", z))
        b = hermitian_value(s, ChartPoint("W", 1 / z))
        worst = max(worst, abs(a - b) / a)
    assert worst < 1e-10


def test_flip_value_on_unit_circle():
    rng = np.random.default_rng(2)
    s = draw_section(12, "gaussian", 1, 0)
    f = chart_flip(s)
    for _ in range(20):
        z = np.exp(2j * math.pi * rng.random())
        assert abs(hermitian_value(s, ChartPoint("Z", z))
                   - hermitian_value(f, ChartPoint("Z", 1 / z))) < 1e-12


def test_canonical_chart():
    p = ChartPoint("Z", 3 + 4j).canonical()
    assert p.chart == "W" and abs(p.coordinate) <= 1
    assert fs_distance(p, ChartPoint("Z", 3 + 4j)) < 1e-15
    assert ChartPoint("W", 0.5).canonical() == ChartPoint("W", 0.5)


def test_basis_weights_examples():
    np.testing.assert_allclose(basis_weights(1), [math.sqrt(2 / math.pi)] * 2)
    assert basis_weights(2)[1] == pytest.approx(math.sqrt(6 / math.pi))


def test_basis_weights_loggamma_branch_continuous():
    # n > 500 switches to log-gamma; compare relative to exact integers
    w = basis_weights(501)
    exact = math.sqrt(502 * math.comb(501, 250) / math.pi)
    assert w[250] == pytest.approx(exact, rel=1e-12)


def _gram_entry(n, j, k):
    # Fubini-Study area form dA / (1 + |z|^2)^2, total area pi
    b = basis_weights(n)

    def f(r, t):
        z = r * np.exp(1j * t)
        val = b[j] * b[k] * z**j * np.conj(z) ** k * (1 + r * r) ** (-n - 2) * r
        return val

    re = integrate.dblquad(lambda t, r: f(r, t).real, 0, np.inf, 0, 2 * math.pi,
                           epsabs=1e-11, epsrel=1e-11)[0]
    im = integrate.dblquad(lambda t, r: f(r, t).imag, 0, np.inf, 0, 2 * math.pi,
                           epsabs=1e-11, epsrel=1e-11)[0]
    return re + 1j * im


@pytest.mark.parametrize("n", [1, 3, 8])
def test_gram_matrix_is_identity(n):
    idx = [0, 1, n // 2, n] if n > 1 else [0, 1]
    for j in idx:
        for k in idx:
            g = _gram_entry(n, j, k)
            assert abs(g - (1.0 if j == k else 0.0)) < 1e-8


def test_bergman_diagonal_examples():
    assert bergman_diagonal(1) == pytest.approx(2 / math.pi)
    assert bergman_diagonal(10) == pytest.approx(11 / math.pi)


@pytest.mark.parametrize("n", [1, 5, 20])
def test_bergman_diagonal_is_sum_over_basis(n):
    b = basis_weights(n)
    for z in (0.0, 0.3 + 0.4j, 2.0 - 1j):
        val = np.sum(b**2 * abs(z) ** (2 * np.arange(n + 1))) / (1 + abs(z) ** 2) ** n
        assert val == pytest.approx(bergman_diagonal(n), rel=1e-13)


@pytest.mark.parametrize("n", [1, 7, 30])
def test_riemann_roch_integral(n):
    # constant kernel times the area form integrates to d_n
    total = integrate.quad(lambda r: bergman_diagonal(n) * 2 * math.pi * r / (1 + r * r) ** 2,
                           0, np.inf, epsabs=1e-13)[0]
    assert total == pytest.approx(n + 1, abs=1e-10)
    assert section_dimension(n) == n + 1


def test_covariance_n2():
    c = covariance_data(2)
    assert c.A_n == pytest.approx(2 / math.pi)
    np.testing.assert_allclose(c.Lambda_n, np.diag([4 / math.pi, 1 / math.pi]), atol=1e-15)
    assert c.d_n == 3


def test_covariance_n10_tilde():
    c = covariance_data(10)
    np.testing.assert_allclose(c.LambdaTilde_n, np.diag([198 / 100, 11 / 10]), rtol=1e-14)


def test_covariance_rejects_small_degree():
    with pytest.raises(ValueError):
        covariance_data(1)


@pytest.mark.parametrize("n", [2, 3, 17, 100])
def test_covariance_closed_forms(n):
    c = covariance_data(n)
    assert c.A_n == pytest.approx(n / math.pi)
    np.testing.assert_allclose(np.diag(c.Lambda_n), [2 * n * (n - 1) / math.pi, 1 / math.pi])
    np.testing.assert_allclose(np.diag(c.LambdaTilde_n), [2 * (n * n - 1) / n**2, (n + 1) / n])
    assert np.all(np.linalg.eigvalsh(c.Lambda_n) > 0)


def test_lambda_tilde_asymptotics():
    errs = []
    for n in (10, 100, 1000):
        lt = covariance_data(n).LambdaTilde_n
        errs.append(np.linalg.norm(n * (lt - LAMBDA0) - LAMBDA1))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 3e-3
    np.testing.assert_allclose(LAMBDA1, np.diag([0.0, 1.0]))


@pytest.mark.parametrize("n", [5, 20, 50])
def test_lambda_matches_finite_differences(n):
    c = covariance_data(n)
    fd22 = kernel_derivative_fd(n, 2, 2)
    fd00 = kernel_derivative_fd(n, 0, 0)
    fd11 = kernel_derivative_fd(n, 1, 1)
    assert fd22 == pytest.approx(c.Lambda_n[0, 0], rel=1e-6)
    assert fd00 == pytest.approx(c.Lambda_n[1, 1], rel=1e-6)
    assert fd11 == pytest.approx(c.A_n, rel=1e-6)
    # off-diagonal block: d^2/du^2 of the kernel at the origin vanishes
    assert abs(kernel_derivative_fd(n, 2, 0)) < 1e-6 * c.Lambda_n[0, 0]
