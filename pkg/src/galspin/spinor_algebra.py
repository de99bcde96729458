"""Finite-dimensional spinor structure of the Galilean spin-s field.

Index convention for the four-spinor: components 0, 1 are the upper (phi)
block and 2, 3 the lower (chi) block, i.e. the usual labels 1, 2 | 3, 4
shifted down by one.  The rho matrices act on the block label and sigma on the
position inside a block, so rho_i -> kron(pauli_i, 1) and sigma_i -> kron(1, pauli_i).

The free operator is written in momentum space with the component equations

    (E - U0) phi + (sigma.p) chi = 0,    (sigma.p) phi + 2m chi = 0,

so G(E, p) = Gamma (E - U0) + rho_1 (sigma.p) + m (1 - rho_3).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.spatial.transform import Rotation

I2 = np.eye(2, dtype=complex)
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
RHO = np.array([np.kron(P, I2) for P in PAULI])
SIGMA4 = np.array([np.kron(I2, P) for P in PAULI])

MAX_TWO_S_TENSOR = 16
MAX_TWO_S_SYMMETRIZER = 5
MAX_TWO_S_BW = 8


@dataclass(frozen=True)
class SpinLabel:
    """Spin s >= 1/2 stored as the integer 2s."""

    two_s: int

    def __post_init__(self):
        if isinstance(self.two_s, bool) or int(self.two_s) != self.two_s:
            raise ValueError(f"two_s must be an integer, got {self.two_s!r}")
        object.__setattr__(self, "two_s", int(self.two_s))
        if self.two_s < 1:
            raise ValueError("spin zero cannot be built from a symmetric multispinor; need two_s >= 1")

    @property
    def s(self) -> float:
        return self.two_s / 2

    @property
    def spin_factor(self) -> int:
        """2^{2s}, the multiplicity carried by the Sigma^2 contraction."""
        return 2**self.two_s


def _label(s) -> SpinLabel:
    return s if isinstance(s, SpinLabel) else SpinLabel(s)


def sigma_dot(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return np.einsum("i,ijk->jk", v, PAULI)


def symmetric_dim(s) -> int:
    n = _label(s).two_s
    return (n + 3) * (n + 2) * (n + 1) // 6


def build_gamma() -> np.ndarray:
    """Gamma = (1 + rho_3)/2, projector on the upper block."""
    return 0.5 * (np.eye(4, dtype=complex) + RHO[2])


def build_G(E, p, m, u0=0.0) -> np.ndarray:
    """Free operator G(E, p) acting on four-spinors."""
    sp_ = np.kron(I2, sigma_dot(p))
    return build_gamma() * (E - u0) + RHO[0] @ sp_ + m * (np.eye(4) - RHO[2])


def rotation_spinor(R) -> np.ndarray:
    """D^{1/2}(R) = exp(-i theta n.sigma / 2), defined up to overall sign."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3):
        raise ValueError("rotation must be a 3x3 matrix")
    if not np.allclose(R @ R.T, np.eye(3), atol=1e-10) or not abs(np.linalg.det(R) - 1) < 1e-10:
        raise ValueError("R is not a proper rotation (orthogonal with det +1)")
    rotvec = Rotation.from_matrix(R).as_rotvec()
    theta = np.linalg.norm(rotvec)
    if theta == 0:
        return I2.copy()
    n = rotvec / theta
    return math.cos(theta / 2) * I2 - 1j * math.sin(theta / 2) * sigma_dot(n)


def build_boost(v, R=None) -> np.ndarray:
    """Delta^{1/2}(v, R) = [[1, 0], [-sigma.v/2, 1]] . diag(D(R), D(R))."""
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise ValueError("velocity must be a 3-vector")
    D = rotation_spinor(np.eye(3) if R is None else R)
    lower = np.eye(4, dtype=complex)
    lower[2:, :2] = -0.5 * sigma_dot(v)
    return lower @ np.kron(I2, D)


def build_sigma2_tensor(s) -> np.ndarray:
    """2s-fold tensor power of sigma^2 on the 2^{2s}-dimensional upper-index space."""
    n = _label(s).two_s
    if n > MAX_TWO_S_TENSOR:
        raise MemoryError(f"Sigma^2 for two_s={n} would be a {2**n}x{2**n} dense matrix")
    out = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        out = np.kron(out, PAULI[1])
    return out


def transpose_sign(s) -> int:
    """(-1)^{2s}, checked elementwise against the explicit Sigma^2."""
    n = _label(s).two_s
    sign = -1 if n % 2 else 1
    S = build_sigma2_tensor(n)
    if not np.array_equal(S.T, sign * S):
        raise AssertionError(f"(Sigma^2)^T != {sign:+d} Sigma^2 for two_s={n}")
    return sign


def _perm_matrix(perm, n, d=4) -> sp.csr_matrix:
    """Permutation of the n tensor factors of (C^d)^{otimes n}."""
    dim = d**n
    idx = np.arange(dim).reshape((d,) * n)
    dest = np.transpose(idx, perm).ravel()
    return sp.csr_matrix((np.ones(dim), (dest, np.arange(dim))), shape=(dim, dim))


def symmetrizer(s, d=4) -> sp.csr_matrix:
    """Average of all (2s)! factor permutations on (C^d)^{otimes 2s}."""
    n = _label(s).two_s
    if n > MAX_TWO_S_SYMMETRIZER:
        raise MemoryError(f"explicit symmetrizer limited to two_s <= {MAX_TWO_S_SYMMETRIZER}")
    perms = list(itertools.permutations(range(n)))
    total = sum((_perm_matrix(p, n, d) for p in perms), sp.csr_matrix((d**n, d**n)))
    return total / len(perms)


def symmetrizer_rank(s) -> int:
    S = symmetrizer(s).toarray()
    return int(np.linalg.matrix_rank(S))


@dataclass
class SymmetricBasis:
    two_s: int
    basis_vectors: sp.csc_matrix  # columns, shape (4^{2s}, dim)
    multisets: list
    dim: int


def symmetric_basis(s, d=4) -> SymmetricBasis:
    """Orthonormal basis of the totally symmetric subspace.

    One vector per multiset of indices: the normalised sum over its distinct
    orderings.  Built sparse; every index tuple belongs to exactly one multiset.
    """
    n = _label(s).two_s
    groups: dict[tuple, list[int]] = {}
    for flat, tup in enumerate(itertools.product(range(d), repeat=n)):
        groups.setdefault(tuple(sorted(tup)), []).append(flat)
    keys = sorted(groups)
    rows, cols, vals = [], [], []
    for j, key in enumerate(keys):
        members = groups[key]
        w = 1.0 / math.sqrt(len(members))
        rows.extend(members)
        cols.extend([j] * len(members))
        vals.extend([w] * len(members))
    B = sp.csc_matrix((vals, (rows, cols)), shape=(d**n, len(keys)), dtype=complex)
    return SymmetricBasis(two_s=n, basis_vectors=B, multisets=keys, dim=len(keys))


def _slot_operator(op, i, n) -> sp.csr_matrix:
    """Gamma x ... x op (slot i) x ... x Gamma."""
    gamma = sp.csr_matrix(build_gamma())
    out = sp.csr_matrix(np.ones((1, 1)))
    for j in range(n):
        out = sp.kron(out, sp.csr_matrix(op) if j == i else gamma, format="csr")
    return out


def _gram_rank(blocks, tol=1e-10) -> int:
    K = sum((b.conj().T @ b).toarray() for b in blocks)
    ev = np.linalg.eigvalsh(0.5 * (K + K.conj().T))
    return int(np.sum(ev > tol * max(ev.max(), 1.0)))


def _reduced_dispersion_residual(n, p, m, E, u0, rng) -> float:
    """Eliminate chi from the reduced component equations for a random symmetric phi.

    phi has n upper indices (each 0/1); chi^r has n-1 upper indices plus r.
    Returns the relative residual against (E - U0 - p^2/2m) phi.
    """
    phi = rng.normal(size=(2,) * n) + 1j * rng.normal(size=(2,) * n)
    phi = sum(np.transpose(phi, perm) for perm in itertools.permutations(range(n))) / math.factorial(n)
    sp_ = sigma_dot(p)
    # chi^r_{a1..a_{n-1}} = -(1/2m) (sigma.p)_{r b} phi_{a1..a_{n-1} b}; r stored last
    chi = -np.tensordot(phi, sp_, axes=([n - 1], [1])) / (2 * m)
    # (1/2s) sum_i (sigma.p)_{a_i r} chi^r_{a without i}
    acc = np.zeros_like(phi)
    for i in range(n):
        term = np.tensordot(chi, sp_, axes=([n - 1], [1]))  # last axis now a_i
        acc += np.moveaxis(term, n - 1, i)
    lhs = (E - u0) * phi + acc / n
    rhs = (E - u0 - float(np.dot(p, p)) / (2 * m)) * phi
    return float(np.linalg.norm(lhs - rhs) / max(np.linalg.norm(rhs), np.linalg.norm(phi)))


def bw_reduction_check(s, seed=0, n_samples=20, tol=1e-12) -> dict:
    """Count independent/constrained components of the Bargmann-Wigner system.

    independent_phi: rank of Gamma^{otimes 2s} (the coefficient of E) on the
    symmetric subspace.  chi_components: remaining rank of the stacked per-index
    operators at a generic numeric (E, p, m).  Components with two or more lower
    indices lie in the common kernel and drop out.
    """
    label = _label(s)
    n = label.two_s
    if n > MAX_TWO_S_BW:
        raise MemoryError(f"bw_reduction_check limited to two_s <= {MAX_TWO_S_BW}")
    rng = np.random.default_rng(seed)
    basis = symmetric_basis(n).basis_vectors

    gamma_all = _slot_operator(build_gamma(), 0, n)
    n_phi = _gram_rank([gamma_all @ basis])

    E, m, u0 = rng.uniform(0.5, 2.0, 3)
    p = rng.normal(size=3)
    G = build_G(E, p, m, u0)
    n_active = _gram_rank([_slot_operator(G, i, n) @ basis for i in range(n)])
    n_chi = n_active - n_phi

    # expected kernel: basis vectors with >= 2 lower indices
    n_dropped = symmetric_basis(n).dim - n_active
    expected_dropped = sum(1 for ms in symmetric_basis(n).multisets if sum(a >= 2 for a in ms) >= 2)

    residuals = []
    for _ in range(n_samples):
        p = rng.normal(size=3) * rng.uniform(0.1, 10.0)
        m = rng.uniform(0.1, 10.0)
        E = rng.normal() * 5
        u0 = rng.normal()
        residuals.append(_reduced_dispersion_residual(n, p, m, E, u0, rng))
    max_res = max(residuals)

    ok = n_phi == n + 1 and n_chi == 2 * n and n_dropped == expected_dropped and max_res <= tol
    report = {
        "two_s": n,
        "independent_phi": n_phi,
        "chi_components": n_chi,
        "dropped_components": n_dropped,
        "dispersion_residual": max_res,
        "dispersion_ok": bool(max_res <= tol),
    }
    if not ok:
        raise AssertionError(f"Bargmann-Wigner reduction failed: {report}")
    return report


def random_rotation(rng) -> np.ndarray:
    return Rotation.random(random_state=rng).as_matrix()


def check_all(max_two_s=4, seed=0) -> dict:
    """Run every spinor identity for 1 <= 2s <= max_two_s; returns a JSON-ready report."""
    rng = np.random.default_rng(seed)
    gamma = build_gamma()
    checks = {
        "gamma_idempotent": bool(np.array_equal(gamma @ gamma, gamma)),
        "gamma_trace": float(np.trace(gamma).real),
    }
    inv_err = 0.0
    comp_err = 0.0
    det_err = 0.0
    for _ in range(20):
        v, R = rng.normal(size=3), random_rotation(rng)
        D = build_boost(v, R)
        inv_err = max(inv_err, np.abs(D.conj().T @ gamma @ D - gamma).max())
        inv_err = max(inv_err, np.abs(gamma @ D @ (np.eye(4) - gamma)).max())
    for _ in range(50):
        v1, R1, v2, R2 = rng.normal(size=3), random_rotation(rng), rng.normal(size=3), random_rotation(rng)
        lhs = build_boost(v2, R2) @ build_boost(v1, R1)
        rhs = build_boost(v2 + R2 @ v1, R2 @ R1)
        comp_err = max(comp_err, min(np.abs(lhs - rhs).max(), np.abs(lhs + rhs).max()))
        det_err = max(det_err, abs(np.linalg.det(lhs) - 1))
    checks["boost_gamma_invariance_max_err"] = float(inv_err)
    checks["boost_composition_max_err"] = float(comp_err)
    checks["boost_det_max_err"] = float(det_err)

    per_spin = []
    for n in range(1, max_two_s + 1):
        S = build_sigma2_tensor(n)
        entry = {
            "two_s": n,
            "symmetric_dim": symmetric_dim(n),
            "transpose_sign": transpose_sign(n),
            "sigma2_squared_is_identity": bool(np.array_equal(S @ S, np.eye(S.shape[0]))),
        }
        if n <= MAX_TWO_S_SYMMETRIZER:
            entry["symmetrizer_rank"] = symmetrizer_rank(n)
        if n <= MAX_TWO_S_BW:
            entry["bw_reduction"] = bw_reduction_check(n, seed=seed)
        per_spin.append(entry)
    checks["spins"] = per_spin
    return checks
