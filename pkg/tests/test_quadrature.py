import math

import numpy as np
import pytest
from scipy.integrate import quad

from galspin import closed_forms
from galspin.form_factors import FormFactor
from galspin.quadrature import (
    QuadratureConfig,
    QuadratureError,
    integrate_radial,
    kernel_integral,
    pv_kernel_integral,
    pv_log,
    threshold_integral,
    upper_limit,
    zeta_integral,
)


@pytest.mark.parametrize("kappa", [0.05, 0.5, 2.0])
@pytest.mark.parametrize("lam", [1.0, 4.0])
def test_sharp_kernel_and_zeta_closed_forms(kappa, lam):
    ff, m = FormFactor("sharp", lam), 1.7
    omega = -kappa**2 / m
    assert kernel_integral(ff, m, omega).value == pytest.approx(closed_forms.kernel(lam, m, kappa), rel=1e-12)
    assert zeta_integral(ff, m, omega).value == pytest.approx(closed_forms.zeta(lam, m, kappa), rel=1e-11)


@pytest.mark.parametrize("k", [0.05, 0.4, 0.9])
def test_sharp_pv_real_part_closed_form(k):
    val = pv_kernel_integral(FormFactor("sharp"), 1.0, k).value
    assert val.real == pytest.approx(closed_forms.pv_kernel_real(1.0, 1.0, k), rel=1e-10)


def test_zeta_is_minus_derivative_of_kernel(family):
    # finite-difference oracle: zeta = -dI/dOmega
    ff, m, omega = FormFactor(family, 1.0), 1.0, -0.3
    h = 1e-5 * abs(omega)
    fd = -(kernel_integral(ff, m, omega + h).value - kernel_integral(ff, m, omega - h).value) / (2 * h)
    assert zeta_integral(ff, m, omega).value == pytest.approx(fd, rel=1e-6)


def _direct_boundary_value(ff, m, k, eps):
    # I(U + i eps) straight from the definition, no subtraction
    U = k * k / m
    top = ff.cutoff if ff.compact else 12 * ff.cutoff
    f = lambda q: q**4 * ff.sq(q) / (U + 1j * eps - q * q / m)
    val, _ = quad(f, 0, top, points=[k], limit=2000, epsabs=0, epsrel=1e-12, complex_func=True)
    if not ff.compact:
        tail, _ = quad(f, top, np.inf, limit=200, epsabs=0, epsrel=1e-12, complex_func=True)
        val += tail
    return val / (2 * math.pi**2)


@pytest.mark.parametrize("k", [0.3, 0.7])
def test_boundary_value_from_epsilon_extrapolation(family, k):
    ff, m = FormFactor(family, 1.0), 1.3
    eps = 2e-4
    a, b = _direct_boundary_value(ff, m, k, eps), _direct_boundary_value(ff, m, k, eps / 2)
    extrapolated = 2 * b - a  # error linear in eps
    got = pv_kernel_integral(ff, m, k).value
    assert got.imag == pytest.approx(-m * k**3 * ff.sq(k) / (4 * math.pi), rel=1e-14)
    assert abs(got - extrapolated) <= 1e-6 * abs(got)


def test_boundary_value_tends_to_threshold(family):
    ff, m = FormFactor(family, 1.0), 1.0
    thr = threshold_integral(ff, m)
    for k in (1e-2, 1e-3):
        val = pv_kernel_integral(ff, m, k).value
        assert abs(val - thr) <= 5 * k * k * abs(thr)


def test_kernel_tends_to_threshold_from_below(family):
    ff = FormFactor(family, 1.0)
    thr = threshold_integral(ff, 1.0)
    assert kernel_integral(ff, 1.0, -1e-9).value == pytest.approx(thr, rel=1e-6)


def test_tolerance_halving_is_consistent(family):
    ff = FormFactor(family, 1.0)
    coarse = kernel_integral(ff, 1.0, -0.2, QuadratureConfig(rel_tol=1e-6))
    fine = kernel_integral(ff, 1.0, -0.2, QuadratureConfig(rel_tol=5e-7))
    ref = kernel_integral(ff, 1.0, -0.2, QuadratureConfig(rel_tol=1e-13))
    assert coarse.converged and fine.converged
    assert abs(fine.value - ref.value) <= abs(coarse.value - ref.value) + 1e-6 * abs(ref.value)
    assert abs(coarse.value - ref.value) <= 1e-6 * abs(ref.value)


def test_compact_and_mapped_routes_agree():
    ff = FormFactor("sharp", 1.0)
    a = kernel_integral(ff, 1.0, -0.3, QuadratureConfig(mapping="compact")).value
    b = kernel_integral(ff, 1.0, -0.3, QuadratureConfig(mapping="semi_infinite")).value
    assert a == pytest.approx(b, rel=1e-10)
    assert upper_limit(ff) == 1.0
    assert math.isinf(upper_limit(FormFactor("gauss")))


def test_compact_mapping_rejected_for_infinite_support():
    with pytest.raises(ValueError):
        kernel_integral(FormFactor("gauss"), 1.0, -0.3, QuadratureConfig(mapping="compact"))


def test_domain_errors():
    ff = FormFactor("sharp")
    with pytest.raises(ValueError):
        kernel_integral(ff, 1.0, 0.1)
    with pytest.raises(ValueError):
        zeta_integral(ff, 1.0, 0.0)
    with pytest.raises(ValueError):
        pv_kernel_integral(ff, 1.0, 1.0)
    with pytest.raises(ValueError):
        pv_kernel_integral(ff, 1.0, -0.1)


def test_non_convergence_is_reported():
    # an integrand quad cannot resolve within one subinterval
    ff = FormFactor("sharp")
    _, _, ok = integrate_radial(lambda q: math.sin(1e5 * q) / max(q, 1e-300) ** 0.5, ff, QuadratureConfig(rel_tol=1e-12, max_refinements=2))
    assert not ok
    assert issubclass(QuadratureError, ArithmeticError)


def test_pv_log():
    assert pv_log(math.inf, 0.3) == 0.0
    # numerical principal value of int_0^L dq / (k^2 - q^2)
    k, L = 0.3, 2.0
    val, _ = quad(lambda q: -1.0 / (q + k), 0, L, weight="cauchy", wvar=k)
    assert pv_log(L, k) == pytest.approx(val, rel=1e-10)
