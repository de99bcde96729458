"""Exact solution of the two-particle sector.

The separable vector-vector interaction acts only in the relative P wave.  In
momentum space the potential is V(p, q) = -lambda_eff f(p) f(q) p.q with
lambda_eff = lambda 2^{2s}, and everything follows from the single function

    D(U) = 1 + (lambda_eff / 3) I(U),

with I the radial kernel integral of :mod:`galspin.quadrature`.  D vanishes at
the bound-state energy and the P-wave amplitude is N(k) / D(k^2/m).

Units: hbar = 1; lambda > 0 is attractive.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from . import quadrature as quad_mod
from .form_factors import FormFactor, norm_sq_integral
from .quadrature import DEFAULT_CONFIG, QuadratureConfig
from .spinor_algebra import SpinLabel


class NoBoundState(ArithmeticError):
    pass


class BracketFailure(ArithmeticError):
    """The eigenvalue condition was not monotone on the bracketing scan."""


class DenominatorZero(ArithmeticError):
    pass


class IllConditioned(ValueError):
    pass


class Normalization(str, enum.Enum):
    # numerator m lambda_eff k^3 / 3 exactly as printed
    PAPER = "paper"
    # numerator (lambda_eff/3)(m k^3 / 4 pi)|f(k)|^2, fixed by Im D
    UNITARY = "unitary"


@dataclass(frozen=True)
class ModelParams:
    m: float
    lam: float
    spin: SpinLabel
    ff: FormFactor
    u0: float = 0.0
    P_total: tuple = (0.0, 0.0, 0.0)
    quad: QuadratureConfig = field(default=DEFAULT_CONFIG, compare=False)

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ValueError(f"mass must be positive, got {self.m!r}")
        if not math.isfinite(self.lam):
            raise ValueError("coupling must be finite")
        if not isinstance(self.spin, SpinLabel):
            object.__setattr__(self, "spin", SpinLabel(self.spin))
        P = tuple(float(c) for c in self.P_total)
        if len(P) != 3:
            raise ValueError("P_total must be a 3-vector")
        object.__setattr__(self, "P_total", P)

    @property
    def lambda_eff(self) -> float:
        return self.lam * self.spin.spin_factor

    def with_spin(self, two_s: int) -> "ModelParams":
        """Same lambda_eff at a different spin."""
        spin = SpinLabel(two_s)
        return replace(self, spin=spin, lam=self.lam * 2.0 ** (self.spin.two_s - spin.two_s))

    def with_lambda_eff(self, lambda_eff: float) -> "ModelParams":
        return replace(self, lam=lambda_eff / self.spin.spin_factor)

    @property
    def cm_energy(self) -> float:
        return float(np.dot(self.P_total, self.P_total)) / (4.0 * self.m)


class Existence(NamedTuple):
    exists: bool
    margin: float


@dataclass(frozen=True)
class BoundState:
    omega: float
    residual: float
    kappa: float
    params: ModelParams = field(repr=False, compare=False, default=None)

    @property
    def total_energy(self) -> float:
        """E = Omega + P^2/4m (+ 2 U0 when the internal energy is kept)."""
        return self.omega + self.params.cm_energy + 2.0 * self.params.u0


@dataclass(frozen=True)
class PhaseShiftPoint:
    k: float
    delta1: float
    t_on_shell: complex
    k3_cot_delta: float
    unitarity_residual: float

    @property
    def sin2_delta(self) -> float:
        return math.sin(self.delta1) ** 2


@dataclass(frozen=True)
class EffectiveRange:
    inv_a: float  # -1/a, momentum^3
    r0: float
    source: str  # "closed_form" | "fit"
    fit_residual: float | None = None
    covariance: np.ndarray | None = field(default=None, compare=False)


def existence_check(params: ModelParams) -> Existence:
    """margin = m lambda_eff/3 int d^3p/(2pi)^3 |f|^2 - 1; a bound state exists iff margin > 0."""
    margin = params.m * params.lambda_eff / 3.0 * norm_sq_integral(params.ff) - 1.0
    return Existence(margin > 0, margin)


def _kernel(params: ModelParams, omega: float) -> float:
    return quad_mod.kernel_integral(params.ff, params.m, omega, params.quad).value


def solve_bound_state(params: ModelParams, tol: float = 1e-12) -> BoundState:
    """Root of 1 + (lambda_eff/3) I(Omega) = 0 for Omega < 0 (unique when it exists)."""
    ok, margin = existence_check(params)
    if not ok:
        raise NoBoundState(f"no bound state: existence margin {margin:.6g} <= 0")
    c = params.lambda_eff / 3.0

    def g(omega):
        return -c * _kernel(params, omega) - 1.0

    scale = params.ff.cutoff**2 / params.m
    visited = []
    omega = -scale
    val = g(omega)
    visited.append((omega, val))
    step = 0.25 if val < 0 else 4.0
    for _ in range(80):
        nxt = omega * step
        nval = g(nxt)
        visited.append((nxt, nval))
        if (val < 0) != (nval < 0):
            break
        omega, val = nxt, nval
    else:
        raise BracketFailure(f"no sign change of the eigenvalue condition found; last {visited[-3:]}")
    visited.sort()
    gs = [v for _, v in visited]
    if any(b < a for a, b in zip(gs, gs[1:])):
        raise BracketFailure(f"eigenvalue condition not monotone on scan: {visited}")
    a, b = sorted((omega, nxt))
    root = brentq(g, a, b, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    residual = abs(1.0 + c * _kernel(params, root))
    if residual > tol:
        raise ArithmeticError(f"bound-state residual {residual:.3g} exceeds tol {tol:.3g}")
    return BoundState(omega=root, residual=residual, kappa=math.sqrt(-params.m * root), params=params)


def scattering_denominator(params: ModelParams, U: float) -> complex:
    """D(U) = 1 + (lambda_eff/3) I(U + i0)."""
    c = params.lambda_eff / 3.0
    if c == 0:
        return complex(1.0)
    if U < 0:
        return complex(1.0 + c * _kernel(params, U))
    if U == 0:
        return complex(1.0 + c * quad_mod.threshold_integral(params.ff, params.m, params.quad))
    k = math.sqrt(params.m * U)
    return 1.0 + c * quad_mod.pv_kernel_integral(params.ff, params.m, k, params.quad).value


def numerator(params: ModelParams, k: float, norm=Normalization.UNITARY) -> float:
    norm = Normalization(norm)
    base = params.m * params.lambda_eff * k**3 / 3.0
    if norm is Normalization.PAPER:
        return base
    return base * params.ff.sq(k) / (4.0 * math.pi)


def phase_shift(params: ModelParams, k: float, norm=Normalization.UNITARY) -> PhaseShiftPoint:
    """P-wave amplitude t = N/D and delta_1 in (-pi/2, pi/2] from cot(delta) = Re(1/t)."""
    if not k > 0:
        raise ValueError(f"k must be positive, got {k!r}")
    D = scattering_denominator(params, k * k / params.m)
    if D == 0:
        raise DenominatorZero(f"D(k^2/m) = 0 at k={k}")
    N = numerator(params, k, norm)
    t = N / D
    if N == 0:
        delta, k3cot = 0.0, math.inf
    else:
        cot = D.real / N  # Re(1/t)
        k3cot = k**3 * cot
        delta = math.pi / 2 if cot == 0 else math.atan(1.0 / cot)
    unitarity = abs(abs(1 + 2j * t) - 1.0)
    return PhaseShiftPoint(k=k, delta1=delta, t_on_shell=complex(t), k3_cot_delta=k3cot, unitarity_residual=unitarity)


def phase_shift_sweep(params, ks, norm=Normalization.UNITARY, unwrap=False) -> list[PhaseShiftPoint]:
    pts = [phase_shift(params, float(k), norm) for k in ks]
    if unwrap and pts:
        deltas = np.unwrap([p.delta1 for p in pts], period=math.pi)
        pts = [replace(p, delta1=float(d)) for p, d in zip(pts, deltas)]
    return pts


def position_wavefunction(params: ModelParams, k: float, x, k_dir=(0.0, 0.0, 1.0), norm=Normalization.UNITARY):
    """Odd relative wavefunction: incident (e^{ik.x} - e^{-ik.x})/2 plus outgoing P wave.

    The outgoing part is (3N / k^3 D) (k.grad / i) e^{ikr}/r, with N the
    amplitude numerator of the chosen normalization.  ``x`` may be (..., 3).
    """
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0):
        raise ValueError("wavefunction evaluated at r = 0")
    kvec = k * np.asarray(k_dir, dtype=float) / np.linalg.norm(k_dir)
    kx = x @ kvec
    incident = 0.5 * (np.exp(1j * kx) - np.exp(-1j * kx))
    D = scattering_denominator(params, k * k / params.m)
    coeff = 3.0 * numerator(params, k, norm) / (k**3 * D)
    # (k.grad / i) e^{ikr}/r = (k.xhat) e^{ikr} (k/r + i/r^2)
    scattered = coeff * (kx / r) * np.exp(1j * k * r) * (k / r + 1j / r**2)
    return incident + scattered


def partial_wave_projection(params: ModelParams, k: float, l: int, norm=Normalization.UNITARY, n_nodes=64) -> complex:
    """k a_l from the full angular amplitude F(theta) = sum_l (2l+1) a_l P_l(cos theta).

    F is built from the on-shell T matrix between k zhat and k (sin th, 0, cos th).
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    mu, w = np.polynomial.legendre.leggauss(n_nodes)
    D = scattering_denominator(params, k * k / params.m)
    k_in = np.array([0.0, 0.0, k])
    k_out = k * np.stack([np.sqrt(1 - mu**2), np.zeros_like(mu), mu], axis=-1)
    # large-r outgoing coefficient of the P wave: f(theta) = (3N / k^3 D) k_out.k_in
    amp = 3.0 * numerator(params, k, norm) / (k**3 * D) * (k_out @ k_in)
    Pl = np.polynomial.legendre.Legendre.basis(l)(mu)
    return complex(0.5 * k * np.sum(w * amp * Pl))


def effective_range_closed_form(params: ModelParams, bound: BoundState | None = None) -> EffectiveRange:
    """-1/a = 4 pi zeta Omega / m - (-m Omega)^{3/2}/2,  r0 = -8 pi zeta / m^2 - 3 (-m Omega)^{1/2}."""
    bs = bound or solve_bound_state(params)
    m, omega = params.m, bs.omega
    zeta = quad_mod.zeta_integral(params.ff, m, omega, params.quad).value
    kap = math.sqrt(-m * omega)
    inv_a = 4.0 * math.pi * zeta * omega / m - 0.5 * kap**3
    r0 = -8.0 * math.pi * zeta / m**2 - 3.0 * kap
    return EffectiveRange(inv_a=inv_a, r0=r0, source="closed_form")


def default_k_grid(params: ModelParams, n=16, lo=0.01, hi=0.1) -> np.ndarray:
    return np.linspace(lo, hi, n) * params.ff.cutoff


def effective_range_fit(params: ModelParams, k_grid=None, norm=Normalization.UNITARY) -> EffectiveRange:
    """Least-squares k^3 cot(delta_1) = -1/a + (r0/2) k^2.

    ``fit_residual`` is the largest absolute deviation; ``covariance`` is that of
    (-1/a, r0/2) from the residual variance.
    """
    ks = default_k_grid(params) if k_grid is None else np.asarray(k_grid, dtype=float)
    if ks.size < 3:
        raise IllConditioned("need at least 3 momenta for a two-parameter fit")
    if ks.min() <= 0 or ks.max() < 2 * ks.min():
        raise IllConditioned("k grid must span at least a factor 2")
    y = np.array([phase_shift(params, k, norm).k3_cot_delta for k in ks])
    if not np.all(np.isfinite(y)):
        raise IllConditioned("k^3 cot(delta) is not finite on the grid (non-interacting?)")
    A = np.column_stack([np.ones_like(ks), ks**2])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    dof = max(len(ks) - 2, 1)
    cov = float(res @ res) / dof * np.linalg.inv(A.T @ A)
    return EffectiveRange(
        inv_a=float(coef[0]),
        r0=2.0 * float(coef[1]),
        source="fit",
        fit_residual=float(np.max(np.abs(res))),
        covariance=cov,
    )
