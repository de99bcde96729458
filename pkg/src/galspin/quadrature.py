"""Radial integrals of the separable two-body problem.

Three integrals appear, all of the form (1/2 pi^2) int_0^inf dq q^4 |f(q)|^2 (...):

* the kernel integral ``I(Omega)`` below threshold (Omega < 0),
* its boundary value ``I(U + i0)`` above threshold, U = k^2/m,
* ``zeta(Omega) = -dI/dOmega``.

Semi-infinite ranges are mapped to [0, 1) through q = Lambda t / (1 - t) before
adaptive Gauss-Kronrod refinement (scipy's QUADPACK).  The principal value is
taken with the subtraction method, relying on PV int_0^inf dq / (k^2 - q^2) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy.integrate import quad

from .form_factors import FormFactor

TWO_PI_SQ = 2.0 * math.pi**2


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    max_refinements: int = 200
    # None picks "compact" for compactly supported f, "semi_infinite" otherwise
    mapping: str | None = None

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_refinements < 1:
            raise ValueError("max_refinements must be >= 1")
        if self.mapping not in (None, "compact", "semi_infinite"):
            raise ValueError(f"unknown mapping {self.mapping!r}")


DEFAULT_CONFIG = QuadratureConfig()


@dataclass(frozen=True)
class RadialIntegralResult:
    value: float | complex
    abs_error_estimate: float
    converged: bool


class QuadratureError(ArithmeticError):
    """Raised when a radial integral diverges or fails to converge."""


def _mapping(ff: FormFactor, cfg: QuadratureConfig) -> str:
    if cfg.mapping is None:
        return "compact" if ff.compact else "semi_infinite"
    if cfg.mapping == "compact" and not ff.compact:
        raise ValueError(f"compact mapping needs a compactly supported form factor, got {ff.family.value}")
    return cfg.mapping


def upper_limit(ff: FormFactor, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """Upper end of the radial integration range (inf for the semi-infinite map)."""
    return ff.cutoff if _mapping(ff, cfg) == "compact" else math.inf


def integrate_radial(
    func: Callable[[float], float],
    ff: FormFactor,
    cfg: QuadratureConfig = DEFAULT_CONFIG,
    breakpoints: tuple[float, ...] = (),
) -> tuple[float, float, bool]:
    """Integrate ``func(q)`` over the support of ``ff``.

    Returns ``(value, abs_error_estimate, converged)``.
    """
    lam = ff.cutoff
    mapping = _mapping(ff, cfg)
    if mapping == "compact":
        pts = [b for b in breakpoints if 0.0 < b < lam]
        g = func
        lo, hi = 0.0, lam
    else:
        pts = [b / (b + lam) for b in breakpoints if b > 0.0]
        if ff.compact:
            pts.append(0.5)  # discontinuity of f at q = Lambda

        def g(t):
            if t >= 1.0:
                return 0.0
            s = 1.0 - t
            return func(lam * t / s) * lam / (s * s)

        lo, hi = 0.0, 1.0
    out = quad(
        g,
        lo,
        hi,
        epsabs=0.0,
        epsrel=cfg.rel_tol,
        limit=cfg.max_refinements,
        points=sorted(set(pts)) or None,
        full_output=1,
    )
    val, err = out[0], out[1]
    # a fourth element (QUADPACK message) is present only when ier > 0
    ok = len(out) == 3
    converged = ok and err <= cfg.rel_tol * abs(val) + 1e-300
    return val, err, converged


def _require(result: RadialIntegralResult, what: str) -> RadialIntegralResult:
    if not result.converged:
        raise QuadratureError(
            f"{what} did not converge: value={result.value!r}, err={result.abs_error_estimate:.3g}"
        )
    return result


def kernel_integral(
    ff: FormFactor, m: float, omega: float, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> RadialIntegralResult:
    """I(Omega) = (1/2 pi^2) int q^4 |f|^2 / (Omega - q^2/m) dq for Omega < 0."""
    if not omega < 0:
        raise ValueError(f"kernel_integral needs Omega < 0, got {omega!r}; use pv_kernel_integral")
    if not ff.moment_converges(2):
        raise QuadratureError("kernel integral diverges for this form factor")

    def f(q):
        return q**4 * ff.sq(q) / (omega - q * q / m)

    val, err, ok = integrate_radial(f, ff, cfg)
    return _require(RadialIntegralResult(val / TWO_PI_SQ, err / TWO_PI_SQ, ok), "kernel integral")


def threshold_integral(ff: FormFactor, m: float, cfg: QuadratureConfig = DEFAULT_CONFIG) -> float:
    """I(0^-) = -(m / 2 pi^2) int q^2 |f|^2 dq."""
    val, err, ok = integrate_radial(lambda q: q * q * ff.sq(q), ff, cfg)
    _require(RadialIntegralResult(val, err, ok), "threshold integral")
    return -m * val / TWO_PI_SQ


def pv_log(upper: float, k: float) -> float:
    """PV int_0^upper dq / (k^2 - q^2); zero for an infinite range."""
    if math.isinf(upper):
        return 0.0
    return math.log((upper + k) / (upper - k)) / (2.0 * k)


def pv_kernel_integral(
    ff: FormFactor, m: float, k: float, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> RadialIntegralResult:
    """Boundary value I(U + i0) at U = k^2/m > 0 (complex).

    Real part by subtraction of the on-shell value, imaginary part from the
    residue: Im = -(m k^3 / 4 pi) |f(k)|^2.
    """
    if not k > 0:
        raise ValueError(f"on-shell momentum must be positive, got {k!r}")
    if ff.compact and not k < ff.cutoff:
        raise ValueError(f"k={k} is not below the sharp cutoff {ff.cutoff}; f is discontinuous there")
    if not ff.moment_converges(2):
        raise QuadratureError("kernel integral diverges for this form factor")

    k2 = k * k
    on_shell = k2 * k2 * ff.sq(k)
    eps = 1e-7 * k

    def f(q):
        if abs(q - k) < eps:
            # removable singularity; symmetric average of neighbours
            a, b = k - eps, k + eps
            return 0.5 * ((a**4 * ff.sq(a) - on_shell) / (k2 - a * a) + (b**4 * ff.sq(b) - on_shell) / (k2 - b * b))
        return (q**4 * ff.sq(q) - on_shell) / (k2 - q * q)

    val, err, ok = integrate_radial(f, ff, cfg, breakpoints=(k,))
    upper = upper_limit(ff, cfg)
    re = m * (val + on_shell * pv_log(upper, k)) / TWO_PI_SQ
    im = -m * k**3 * ff.sq(k) / (4.0 * math.pi)
    res = RadialIntegralResult(complex(re, im), m * err / TWO_PI_SQ, ok)
    if not ok:
        raise QuadratureError(f"PV kernel integral did not converge at k={k}")
    return res


def zeta_integral(
    ff: FormFactor, m: float, omega: float, cfg: QuadratureConfig = DEFAULT_CONFIG
) -> RadialIntegralResult:
    """zeta(Omega) = (1/2 pi^2) int q^4 |f|^2 / (Omega - q^2/m)^2 dq, Omega < 0."""
    if not omega < 0:
        raise ValueError(f"zeta_integral needs Omega < 0, got {omega!r}")
    # integrand ~ m^2 |f|^2 at large q
    if not ff.moment_converges(0):
        raise QuadratureError(f"zeta diverges for the {ff.family.value} form factor")

    def f(q):
        d = omega - q * q / m
        return q**4 * ff.sq(q) / (d * d)

    val, err, ok = integrate_radial(f, ff, cfg)
    return _require(RadialIntegralResult(val / TWO_PI_SQ, err / TWO_PI_SQ, ok), "zeta integral")
