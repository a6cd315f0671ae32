"""Named two-party states, Bloch decomposition and the PPT test."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qmath import (
    TOL,
    DensityMatrix,
    InvalidStateError,
    PureState,
    kron,
    partial_transpose,
    projector,
)

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SX, SY, SZ)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)
KET_MINUS = np.array([1, -1], dtype=complex) / np.sqrt(2)
PHI_PLUS = PureState(4, np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2))


def bloch_op(v) -> np.ndarray:
    """v . sigma for a real 3-vector."""
    v = np.asarray(v, dtype=float)
    return v[0] * SX + v[1] * SY + v[2] * SZ


def qubit_state(v) -> np.ndarray:
    """Qubit density matrix with Bloch vector ``v`` (|v| <= 1)."""
    return 0.5 * (I2 + bloch_op(v))


def theta_phi_ket(theta: float, phi: float) -> np.ndarray:
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], dtype=complex)


def phi_plus() -> DensityMatrix:
    return DensityMatrix.from_pure(PHI_PLUS, 2, 2)


def product_state(rho_a, rho_b) -> DensityMatrix:
    rho_a = np.asarray(rho_a, dtype=complex)
    rho_b = np.asarray(rho_b, dtype=complex)
    return DensityMatrix(rho_a.shape[0], rho_b.shape[0], kron(rho_a, rho_b))


def maximally_mixed(dimA: int, dimB: int) -> DensityMatrix:
    n = dimA * dimB
    return DensityMatrix(dimA, dimB, np.eye(n, dtype=complex) / n)


def werner(p: float) -> DensityMatrix:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner parameter must lie in [0, 1], got {p}")
    mat = p * PHI_PLUS.projector() + (1 - p) * np.eye(4) / 4
    return DensityMatrix(2, 2, mat)


def bell_diagonal_eigenvalues(c) -> np.ndarray:
    """Weights of the four Bell projectors for correlation triple ``c``.

    Order: Phi+, Phi-, Psi+, Psi-.
    """
    c1, c2, c3 = (float(x) for x in c)
    return 0.25 * np.array(
        [
            1 + c1 - c2 + c3,
            1 - c1 + c2 + c3,
            1 + c1 + c2 - c3,
            1 - c1 - c2 - c3,
        ]
    )


def bell_diagonal(c) -> DensityMatrix:
    """(1/4)(I + sum_i c_i sigma_i (x) sigma_i); rejects c outside the tetrahedron."""
    c = np.asarray(c, dtype=float)
    lam = bell_diagonal_eigenvalues(c)
    if lam.min() < -TOL.psd:
        raise InvalidStateError(f"c={c.tolist()} lies outside the Bell-diagonal tetrahedron")
    mat = np.eye(4, dtype=complex)
    for ci, s in zip(c, PAULIS):
        mat = mat + ci * np.kron(s, s)
    return DensityMatrix(2, 2, mat / 4)


def _check_orthonormal(basis: np.ndarray, name: str) -> np.ndarray:
    basis = np.asarray(basis, dtype=complex)
    gram = basis.conj().T @ basis
    if basis.shape[0] != basis.shape[1] or np.max(np.abs(gram - np.eye(basis.shape[1]))) > 1e-10:
        raise ValueError(f"{name} is not an orthonormal basis")
    return basis


def _as_basis(vectors, dim: int | None = None) -> np.ndarray:
    """Accept a matrix of column vectors or a sequence of kets."""
    if vectors is None:
        return np.eye(dim, dtype=complex)
    arr = np.asarray(vectors, dtype=complex)
    if isinstance(vectors, (list, tuple)):
        arr = np.column_stack([np.asarray(v, dtype=complex).reshape(-1) for v in vectors])
    return arr


def _check_distribution(p, name: str = "distribution") -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p < -1e-12) or abs(p.sum() - 1.0) > 1e-10:
        raise ValueError(f"{name} must be nonnegative and sum to 1")
    return np.clip(p, 0.0, None)


def cc_state(p, basisA=None, basisB=None) -> DensityMatrix:
    """sum_ij p_ij |i><i| (x) |j><j| in the given orthonormal bases."""
    p = _check_distribution(p, "joint distribution")
    if p.ndim != 2:
        raise ValueError("p must be a dA x dB table")
    dA, dB = p.shape
    ua = _check_orthonormal(_as_basis(basisA, dA), "basisA")
    ub = _check_orthonormal(_as_basis(basisB, dB), "basisB")
    mat = np.zeros((dA * dB, dA * dB), dtype=complex)
    for i in range(dA):
        for j in range(dB):
            if p[i, j]:
                mat += p[i, j] * np.kron(projector(ua[:, i]), projector(ub[:, j]))
    return DensityMatrix(dA, dB, mat)


def cq_state(weights, alice_basis, bob_states: Sequence) -> DensityMatrix:
    """sum_i p_i |i><i|_A (x) rho_i^B with {|i>} orthonormal."""
    w = _check_distribution(weights, "weights")
    ua = _check_orthonormal(_as_basis(alice_basis), "alice_basis")
    if len(bob_states) != len(w) or ua.shape[1] != len(w):
        raise ValueError("weights, alice_basis and bob_states must have equal length")
    bob = [s.mat if isinstance(s, DensityMatrix) else np.asarray(s, dtype=complex) for s in bob_states]
    mat = sum(wi * np.kron(projector(ua[:, i]), bob[i]) for i, wi in enumerate(w))
    return DensityMatrix(ua.shape[0], bob[0].shape[0], mat)


def qc_state(weights, alice_states: Sequence, bob_basis) -> DensityMatrix:
    """sum_i p_i rho_i^A (x) |i><i|_B with {|i>} orthonormal."""
    w = _check_distribution(weights, "weights")
    ub = _check_orthonormal(_as_basis(bob_basis), "bob_basis")
    if len(alice_states) != len(w) or ub.shape[1] != len(w):
        raise ValueError("weights, alice_states and bob_basis must have equal length")
    alice = [s.mat if isinstance(s, DensityMatrix) else np.asarray(s, dtype=complex) for s in alice_states]
    mat = sum(wi * np.kron(alice[i], projector(ub[:, i])) for i, wi in enumerate(w))
    return DensityMatrix(alice[0].shape[0], ub.shape[0], mat)


TRINE_ANGLES = ((0.0, 0.0), (2 * np.pi / 3, 0.0), (2 * np.pi / 3, np.pi))


def trine_qc() -> DensityMatrix:
    """(1/3) sum_l W_l (x) |l><l| on C^2 (x) C^3 with the trine kets W."""
    alice = [projector(theta_phi_ket(t, f)) for t, f in TRINE_ANGLES]
    return qc_state(np.full(3, 1 / 3), alice, np.eye(3))


def giorgi_state() -> DensityMatrix:
    mat = (
        np.kron(I2, I2)
        + 0.4 * np.kron(SX, I2)
        + 0.4 * (np.kron(I2, SX) - np.kron(I2, SZ))
        + 0.2 * np.kron(SZ, SZ)
    ) / 4
    return DensityMatrix(2, 2, mat)


def cc_example() -> DensityMatrix:
    """(1/2)(|00><00| + |11><11|)."""
    return cc_state(np.diag([0.5, 0.5]))


def local_coherent_example() -> DensityMatrix:
    """(1/2)(|00><00| + |++><++|)."""
    mat = 0.5 * (np.kron(projector(KET0), projector(KET0)) + np.kron(projector(KET_PLUS), projector(KET_PLUS)))
    return DensityMatrix(2, 2, mat)


@dataclass(frozen=True, eq=False)
class BlochForm:
    a: np.ndarray
    b: np.ndarray
    T: np.ndarray

    def reconstruct(self) -> DensityMatrix:
        mat = np.kron(I2, I2) + np.kron(bloch_op(self.a), I2) + np.kron(I2, bloch_op(self.b))
        for i in range(3):
            for j in range(3):
                mat = mat + self.T[i, j] * np.kron(PAULIS[i], PAULIS[j])
        return DensityMatrix(2, 2, mat / 4)


def bloch_decompose(rho: DensityMatrix) -> BlochForm:
    if (rho.dimA, rho.dimB) != (2, 2):
        raise ValueError("Bloch decomposition needs a two-qubit state")
    m = rho.mat
    a = np.array([np.trace(m @ np.kron(s, I2)).real for s in PAULIS])
    b = np.array([np.trace(m @ np.kron(I2, s)).real for s in PAULIS])
    T = np.array([[np.trace(m @ np.kron(si, sj)).real for sj in PAULIS] for si in PAULIS])
    return BlochForm(a, b, T)


def is_ppt(rho: DensityMatrix, tol: float = TOL.psd) -> tuple[bool, float]:
    """PPT verdict and smallest eigenvalue of the partial transpose.

    Only states with dimA * dimB <= 6 are accepted, where PPT coincides
    with separability.
    """
    if rho.dimA * rho.dimB > 6:
        raise ValueError(
            f"PPT does not decide separability in {rho.dimA}x{rho.dimB}; only dA*dB <= 6 is supported"
        )
    lam_min = float(np.linalg.eigvalsh(partial_transpose(rho, "B"))[0])
    return lam_min >= -tol, lam_min


def is_separable(rho: DensityMatrix) -> bool:
    return is_ppt(rho)[0]


# random sampling for property tests


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_pure(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_density(dimA: int, dimB: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Ginibre-distributed mixed state (full rank unless ``rank`` is given)."""
    n = dimA * dimB
    k = n if rank is None else rank
    g = rng.normal(size=(n, k)) + 1j * rng.normal(size=(n, k))
    m = g @ g.conj().T
    return DensityMatrix(dimA, dimB, m / np.trace(m).real)


def random_bloch(rng: np.random.Generator, radius: float | None = None) -> np.ndarray:
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    r = rng.random() ** (1 / 3) if radius is None else radius
    return r * v


def random_cq(rng: np.random.Generator) -> DensityMatrix:
    """Random two-qubit CQ state in a random Alice basis."""
    p0 = rng.random()
    u = haar_unitary(2, rng)
    bob = [qubit_state(random_bloch(rng)), qubit_state(random_bloch(rng))]
    return cq_state([p0, 1 - p0], u, bob)


def random_qc(rng: np.random.Generator) -> DensityMatrix:
    p0 = rng.random()
    u = haar_unitary(2, rng)
    alice = [qubit_state(random_bloch(rng)), qubit_state(random_bloch(rng))]
    return qc_state([p0, 1 - p0], alice, u)


def random_separable(rng: np.random.Generator, terms: int = 4) -> DensityMatrix:
    w = rng.dirichlet(np.ones(terms))
    mat = sum(wi * np.kron(qubit_state(random_bloch(rng)), qubit_state(random_bloch(rng))) for wi in w)
    return DensityMatrix(2, 2, mat)


def random_local_unitary(rho: DensityMatrix, rng: np.random.Generator) -> DensityMatrix:
    u = np.kron(haar_unitary(rho.dimA, rng), haar_unitary(rho.dimB, rng))
    return DensityMatrix(rho.dimA, rho.dimB, u @ rho.mat @ u.conj().T)
