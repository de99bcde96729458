"""Exact sharp-cutoff expressions (f = 1 for q <= Lambda, 0 beyond).

Used to tune couplings to a prescribed binding momentum and as independent
references for the quadrature-based routines.
"""

import math

TWO_PI_SQ = 2.0 * math.pi**2


def kernel(cutoff, m, kappa):
    """I(Omega) at Omega = -kappa^2/m."""
    lam = cutoff
    return -(m / TWO_PI_SQ) * (lam**3 / 3.0 - kappa**2 * lam + kappa**3 * math.atan(lam / kappa))


def zeta(cutoff, m, kappa):
    lam = cutoff
    k2 = kappa * kappa
    bracket = lam - 1.5 * kappa * math.atan(lam / kappa) + k2 * lam / (2.0 * (lam * lam + k2))
    return m * m * bracket / TWO_PI_SQ


def pv_kernel_real(cutoff, m, k):
    """Re I(k^2/m + i0) for k < Lambda."""
    lam = cutoff
    return (m / TWO_PI_SQ) * (-(lam**3) / 3.0 - k * k * lam + 0.5 * k**3 * math.log((lam + k) / (lam - k)))


def coupling_for_kappa(cutoff, m, kappa):
    """lambda_eff = lambda 2^{2s} placing the bound state at Omega = -kappa^2/m."""
    return -3.0 / kernel(cutoff, m, kappa)


def critical_coupling(cutoff, m):
    """lambda_eff at which the bound state reaches threshold: 18 pi^2 / (m Lambda^3)."""
    return 18.0 * math.pi**2 / (m * cutoff**3)


def k3_cot_delta(cutoff, kappa, k):
    """Exact unitary k^3 cot(delta_1) for a bound state at kappa (mass drops out)."""
    lam = cutoff
    return (2.0 / math.pi) * (
        kappa**3 * math.atan(lam / kappa) - kappa**2 * lam - k * k * lam
        + 0.5 * k**3 * math.log((lam + k) / (lam - k))
    )


def effective_range(cutoff, kappa):
    """Exact (-1/a, r0) of the unitary amplitude."""
    lam = cutoff
    inv_a = (2.0 / math.pi) * (kappa**3 * math.atan(lam / kappa) - kappa**2 * lam)
    return inv_a, -4.0 * lam / math.pi
