"""Brute-force checks of the analytic two-body solution.

* ``ls_phase_shift``: P-wave Lippmann-Schwinger equation solved as a dense
  linear system on a momentum grid augmented by the on-shell point
  (Haftel-Tabakin subtraction).  Never uses the N/D closed form.
* ``grid_bound_state``: relative-momentum Hamiltonian diagonalised on the grid.
* ``exchange_selection_rule``: explicit spin-index contraction of the
  two-particle state with the imposed statistics.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import two_body
from .form_factors import FormFactor, norm_sq_integral
from .spinor_algebra import SpinLabel, build_sigma2_tensor, transpose_sign
from .two_body import ModelParams, Normalization

TWO_PI_SQ = 2.0 * math.pi**2

PHASE_TOL = 1e-4  # rad, at n = 200
BOUND_REL_TOL = 1e-3  # at n = 400
SELECTION_TOL = 1e-14


@dataclass(frozen=True)
class GridSpec:
    n_points: int = 200
    q_max: float | None = None  # default: Lambda for sharp, 5 Lambda otherwise
    scheme: str = "gauss_legendre_mapped"  # or "uniform"

    def resolve(self, ff: FormFactor) -> "GridSpec":
        q_max = self.q_max
        if q_max is None:
            q_max = ff.cutoff if ff.compact else 5.0 * ff.cutoff
        if self.n_points < 16:
            raise ValueError("grid needs n_points >= 16")
        if self.scheme not in ("gauss_legendre_mapped", "uniform"):
            raise ValueError(f"unknown grid scheme {self.scheme!r}")
        if ff.compact:
            if not math.isclose(q_max, ff.cutoff, rel_tol=1e-12):
                raise ValueError("sharp cutoff grids must end at q_max = Lambda")
        elif q_max < 5.0 * ff.cutoff * (1 - 1e-12):
            raise ValueError(f"q_max must be >= 5 Lambda, got {q_max}")
        return GridSpec(self.n_points, q_max, self.scheme)


@dataclass
class OracleReport:
    quantity: str  # phase_shift | bound_state_energy | selection_rule
    oracle_value: float | None
    analytic_value: float | None
    abs_diff: float
    tolerance: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.abs_diff <= self.tolerance)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d


def momentum_grid(ff: FormFactor, grid: GridSpec):
    """Nodes, weights and the upper end of the integration range.

    Gauss-Legendre: [0, Lambda] for the sharp cutoff; otherwise half the nodes
    on [0, q_max] and half on [q_max, inf) through q = q_max / t.
    Uniform: trapezoid on [0, q_max] (non-compact tails are truncated).
    """
    g = grid.resolve(ff)
    n, qm = g.n_points, g.q_max
    if g.scheme == "uniform":
        q = np.linspace(0.0, qm, n)
        w = np.full(n, qm / (n - 1))
        w[[0, -1]] *= 0.5
        return q, w, qm
    if ff.compact:
        x, wx = np.polynomial.legendre.leggauss(n)
        return 0.5 * qm * (x + 1), 0.5 * qm * wx, qm
    n1 = n // 2
    x1, w1 = np.polynomial.legendre.leggauss(n1)
    x2, w2 = np.polynomial.legendre.leggauss(n - n1)
    t = 0.5 * (x2 + 1)
    q = np.concatenate([0.5 * qm * (x1 + 1), qm / t])
    w = np.concatenate([0.5 * qm * w1, 0.5 * w2 * qm / t**2])
    order = np.argsort(q)
    return q[order], w[order], math.inf


def _v1(params: ModelParams, p, q):
    """P-wave projection of -lambda_eff f(p) f(q) p.q."""
    ff = params.ff
    return -params.lambda_eff * np.outer(p * ff(p), q * ff(q)) / 3.0


def _ls_delta(params: ModelParams, k: float, grid: GridSpec):
    q, w, upper = momentum_grid(params.ff, grid)
    if k <= 0 or (math.isfinite(upper) and k >= upper):
        raise ValueError(f"k={k} outside the grid range")
    if np.min(np.abs(q - k)) < 1e-12 * max(k, 1.0):
        raise ValueError(f"k={k} coincides with a grid node; shift k or change n_points")
    m, k2 = params.m, k * k
    pv_term = 0.0 if math.isinf(upper) else math.log((upper + k) / (upper - k)) / (2.0 * k)
    A = np.empty(q.size + 1, dtype=complex)
    A[:-1] = m / TWO_PI_SQ * w * q**2 / (k2 - q**2)
    A[-1] = m / TWO_PI_SQ * (-k2 * np.sum(w / (k2 - q**2)) + k2 * pv_term - 0.5j * math.pi * k)
    p_all = np.append(q, k)
    V = _v1(params, p_all, p_all)
    M = np.eye(p_all.size) - V * A[None, :]
    T = np.linalg.solve(M, V[:, -1])
    t = -m * k / (4.0 * math.pi) * T[-1]
    S = 1.0 + 2j * t
    delta = 0.5 * math.atan2(S.imag, S.real)
    if delta > math.pi / 2:
        delta -= math.pi
    elif delta <= -math.pi / 2:
        delta += math.pi
    return delta, abs(abs(S) - 1.0)


def ls_phase_shift(params: ModelParams, k: float, grid: GridSpec = GridSpec()) -> OracleReport:
    """delta_1 from the grid T matrix against two_body.phase_shift (unitary)."""
    delta, s_unit = _ls_delta(params, k, grid)
    details = {"k": k, "n_points": grid.n_points, "scheme": grid.scheme, "S_unitarity": s_unit}
    half = GridSpec(grid.n_points // 2, grid.q_max, grid.scheme)
    if half.n_points >= 16:
        try:
            d_half, _ = _ls_delta(params, k, half)
            details["richardson_error_estimate"] = abs(delta - d_half)
        except ValueError:
            pass
    analytic = two_body.phase_shift(params, k, Normalization.UNITARY).delta1
    return OracleReport("phase_shift", delta, analytic, abs(delta - analytic), PHASE_TOL, details)


def grid_hamiltonian(params: ModelParams, grid: GridSpec) -> np.ndarray:
    q, w, _ = momentum_grid(params.ff, grid)
    sw = np.sqrt(w) * q
    return np.diag(q**2 / params.m) + _v1(params, q, q) * np.outer(sw, sw) / TWO_PI_SQ


def grid_bound_state(params: ModelParams, grid: GridSpec = GridSpec(400)) -> OracleReport:
    """Lowest eigenvalue of the discretised relative Hamiltonian vs the eigenvalue condition."""
    ev = np.linalg.eigvalsh(grid_hamiltonian(params, grid))
    # eigenvalues are only resolved to ~ eps * ||H||; the mapped tail makes ||H|| large
    floor = 16 * np.finfo(float).eps * np.abs(ev).max()
    negative = ev[ev < -floor]
    exists = two_body.existence_check(params).exists
    details = {
        "n_points": grid.n_points,
        "n_negative": int(negative.size),
        "existence_check": exists,
        "resolution_floor": float(floor),
    }
    if negative.size > 1:
        raise AssertionError(f"rank-1 attraction produced {negative.size} bound states")
    if negative.size == 0 or not exists:
        consistent = (negative.size == 0) == (not exists)
        details["consistent_with_existence"] = consistent
        omega = float(negative[0]) if negative.size else None
        return OracleReport("bound_state_energy", omega, None, 0.0 if consistent else math.inf, BOUND_REL_TOL, details)
    omega_grid = float(negative[0])
    omega = two_body.solve_bound_state(params).omega
    rel = abs(omega_grid - omega) / abs(omega)
    details["relative_diff"] = rel
    return OracleReport("bound_state_energy", omega_grid, omega, abs(omega_grid - omega), BOUND_REL_TOL * abs(omega), details)


def refinement_study(params: ModelParams, k: float, ns=(16, 32, 64), scheme="gauss_legendre_mapped", noise=1e-13):
    """abs_diff of the LS phase shift under repeated doubling, with observed orders.

    Orders are computed only between levels whose error is above ``noise``.
    """
    diffs = [ls_phase_shift(params, k, GridSpec(n, None, scheme)).abs_diff for n in ns]
    orders = [
        math.log2(a / b) if b > noise else math.inf
        for a, b in zip(diffs, diffs[1:])
        if a > noise
    ]
    return {"n_points": list(ns), "abs_diff": diffs, "observed_order": orders}


def _symmetric_cloud(n, half_width):
    h = 2.0 * half_width / (n - 1)
    xs = h * np.arange(-(n // 2), n // 2 + 1)  # exactly antisymmetric
    X = np.stack(np.meshgrid(xs, xs, xs, indexing="ij"), axis=-1).reshape(-1, 3)
    # the grid is symmetric, so -r sits at the mirrored flat index
    return X, np.arange(X.shape[0])[::-1], h**3


def _contract(two_s, lam, psi, X, refl, h3, cutoff, wrong_statistics=True):
    S = build_sigma2_tensor(two_s)
    tsign = transpose_sign(two_s)
    stat_coeff = tsign if wrong_statistics else -tsign  # phi phi' + c phi' phi = 0
    exch = -stat_coeff  # phi phi' = exch phi' phi
    A = S[:, :, None] * psi[None, None, :]
    A_phys = 0.5 * (A + exch * np.transpose(A, (1, 0, 2))[:, :, refl])
    # grad f for a radial Gaussian f(r) = exp(-cutoff^2 r^2 / 4)
    grad_f = -0.5 * cutoff**2 * X * np.exp(-0.25 * cutoff**2 * np.sum(X * X, axis=1))[:, None]
    spin_sum = np.einsum("cd,cdp->p", S, A_phys)
    J = h3 * spin_sum @ grad_f
    norm2 = h3 * float(np.sum(np.abs(A_phys) ** 2))
    raw = 0.5 * lam * float(np.sum(np.abs(J) ** 2))
    return {
        "statistics_coefficient": stat_coeff,
        "transpose_sign": tsign,
        "J": J,
        "raw_element": raw,
        "norm2": norm2,
        "normalised_element": raw / norm2 if norm2 > 0 else 0.0,
        "max_abs_amplitude": float(np.abs(A_phys).max()),
    }


def exchange_selection_rule(params: ModelParams, spins=(1, 2), n_grid=15, half_width=4.0) -> OracleReport:
    """Even relative states decouple from the vector current under the imposed statistics.

    For each 2s: even trial -> projected amplitude and <0|J|2> vanish identically;
    odd trial -> normalised interaction element equals the scalar reduced one,
    (lambda 2^{2s}/2) |int grad f psi|^2 / ||psi||^2.
    """
    two_s_list = sorted({params.spin.two_s, *spins})
    if max(two_s_list) > 4:
        raise ValueError("explicit spin contraction limited to 2s <= 4")
    X, refl, h3 = _symmetric_cloud(n_grid, half_width)
    r2 = np.sum(X * X, axis=1)
    env = np.exp(-0.5 * r2)
    even = env * (1.0 + 0.3 * r2)
    odd = (X @ np.array([0.3, -0.5, 0.8]) + 0.5j * X[:, 0]) * env
    cutoff = params.ff.cutoff
    grad_f = -0.5 * cutoff**2 * X * np.exp(-0.25 * cutoff**2 * r2)[:, None]
    K = h3 * odd @ grad_f
    per_spin = []
    worst_even = 0.0
    worst_odd_rel = 0.0
    for n in two_s_list:
        lam = params.lambda_eff / 2**n
        e = _contract(n, lam, even, X, refl, h3, cutoff)
        o = _contract(n, lam, odd, X, refl, h3, cutoff)
        o_usual = _contract(n, lam, odd, X, refl, h3, cutoff, wrong_statistics=False)
        reduced = 0.5 * params.lambda_eff * float(np.sum(np.abs(K) ** 2)) / (h3 * float(np.sum(np.abs(odd) ** 2)))
        rel = abs(o["normalised_element"] - reduced) / abs(reduced) if reduced else abs(o["normalised_element"])
        worst_even = max(worst_even, e["raw_element"], e["max_abs_amplitude"])
        worst_odd_rel = max(worst_odd_rel, rel)
        per_spin.append({
            "two_s": n,
            "statistics_coefficient": e["statistics_coefficient"],
            "transpose_sign": e["transpose_sign"],
            "sign_product": e["statistics_coefficient"] * e["transpose_sign"],
            "even_element": e["raw_element"],
            "even_amplitude_max": e["max_abs_amplitude"],
            "odd_element": o["normalised_element"],
            "odd_reduced_element": reduced,
            "odd_relative_diff": rel,
            "odd_element_usual_statistics": o_usual["raw_element"],
        })
    details = {
        "spins": per_spin,
        "odd_max_relative_diff": worst_odd_rel,
        "odd_nonzero": all(s["odd_element"] > 0 for s in per_spin),
    }
    return OracleReport("selection_rule", worst_even, 0.0, worst_even, SELECTION_TOL, details)


def default_cases(m=1.0, cutoff=1.0, two_s=1, strength=1.5):
    """One bound-state configuration per form-factor family at ``strength`` x critical coupling."""
    cases = []
    for fam in ("sharp", "gauss", "rational"):
        ff = FormFactor(fam, cutoff)
        lam_eff = strength * 3.0 / (m * norm_sq_integral(ff))
        cases.append(ModelParams(m, 1.0, SpinLabel(two_s), ff).with_lambda_eff(lam_eff))
    return cases


def run_all(m=1.0, cutoff=1.0, two_s=1, ls_n=200, grid_n=400, ks=(0.1, 0.3, 0.6)) -> list[OracleReport]:
    reports = []
    for params in default_cases(m, cutoff, two_s):
        for kf in ks:
            r = ls_phase_shift(params, kf * cutoff, GridSpec(ls_n))
            r.details["family"] = params.ff.family.value
            reports.append(r)
        r = grid_bound_state(params, GridSpec(grid_n))
        r.details["family"] = params.ff.family.value
        reports.append(r)
    reports.append(exchange_selection_rule(default_cases(m, cutoff, two_s)[0]))
    return reports
