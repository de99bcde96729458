"""Rotationally invariant regulators f(p) for the vector-vector interaction.

All families are real and non-negative, so |f|^2 = f^2 and f* = f.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad


class Family(str, enum.Enum):
    SHARP = "sharp"
    GAUSSIAN = "gauss"
    RATIONAL = "rational"


@dataclass(frozen=True)
class FormFactor:
    """Regulator ``f(p)`` with momentum scale ``cutoff`` (Lambda)."""

    family: Family
    cutoff: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if not (self.cutoff > 0 and math.isfinite(self.cutoff)):
            raise ValueError(f"cutoff must be positive and finite, got {self.cutoff!r}")

    @property
    def compact(self) -> bool:
        return self.family is Family.SHARP

    def __call__(self, p):
        return evaluate(self, p)

    def sq(self, p):
        """|f(p)|^2, vectorised."""
        return evaluate(self, p) ** 2

    def moment_converges(self, n: int) -> bool:
        """Whether the radial moment int_0^inf p^n |f(p)|^2 dp is finite."""
        if n <= -1:
            return False
        if self.family is Family.RATIONAL:
            # |f|^2 ~ Lambda^4 / p^4 at large p
            return n < 3
        return True


def evaluate(ff: FormFactor, p):
    p_arr = np.asarray(p, dtype=float)
    if np.any(p_arr < 0):
        raise ValueError("form factor evaluated at negative momentum")
    x = p_arr / ff.cutoff
    if ff.family is Family.SHARP:
        out = np.where(p_arr <= ff.cutoff, 1.0, 0.0)
    elif ff.family is Family.GAUSSIAN:
        out = np.exp(-x * x)
    else:
        out = 1.0 / (1.0 + x * x)
    if np.ndim(p) == 0:
        return float(out)
    return out


def norm_sq_closed_form(ff: FormFactor) -> float:
    """Exact value of int d^3p/(2 pi)^3 |f(p)|^2."""
    lam3 = ff.cutoff**3
    if ff.family is Family.SHARP:
        return lam3 / (6.0 * math.pi**2)
    if ff.family is Family.GAUSSIAN:
        return lam3 / (16.0 * math.sqrt(2.0) * math.pi**1.5)
    return lam3 / (8.0 * math.pi)


def norm_sq_integral(ff: FormFactor, rel_tol: float = 1e-12) -> float:
    """int d^3p/(2 pi)^3 |f(p)|^2 = (1/2 pi^2) int_0^inf p^2 |f|^2 dp by quadrature.

    Raises ``ArithmeticError`` when the moment diverges or quad does not converge.
    """
    if not ff.moment_converges(2):
        raise ArithmeticError(f"int p^2 |f|^2 diverges for {ff.family.value}")
    lam = ff.cutoff
    if ff.compact:
        val, err = quad(lambda p: p * p, 0.0, lam, epsabs=0.0, epsrel=rel_tol)
    else:
        # p = lam * t / (1 - t)
        def integrand(t):
            if t >= 1.0:
                return 0.0
            p = lam * t / (1.0 - t)
            return p * p * ff.sq(p) * lam / (1.0 - t) ** 2

        val, err = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=rel_tol, limit=200)
    if not err <= max(10 * rel_tol * abs(val), 1e-300):
        raise ArithmeticError(f"norm integral did not converge (err={err:.3g})")
    return val / (2.0 * math.pi**2)
