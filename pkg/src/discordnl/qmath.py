"""Dense complex linear algebra and entropic primitives for small systems.

Everything here works on plain ``numpy`` arrays. Dimensions stay small
(at most 6 per side), so no attempt is made at sparse storage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np


@dataclass(frozen=True)
class Tolerances:
    herm: float = 1e-10
    trace: float = 1e-10
    psd: float = 1e-9
    rank: float = 1e-7
    pure_norm: float = 1e-12
    entropy_cutoff: float = 1e-12
    support: float = 1e-9


TOL = Tolerances()

Subsystem = Literal["A", "B"]


class NotHermitianError(ValueError):
    pass


class InvalidStateError(ValueError):
    pass


def _as_matrix(m) -> np.ndarray:
    arr = np.asarray(m, dtype=complex)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix has non-finite entries")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conjugate(np.transpose(m))


def is_hermitian(m: np.ndarray, tol: float = TOL.herm) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and float(np.max(np.abs(m - dagger(m)))) <= tol


def kron(a, b) -> np.ndarray:
    return np.kron(_as_matrix(a), _as_matrix(b))


def ket(amplitudes) -> np.ndarray:
    v = np.asarray(amplitudes, dtype=complex).reshape(-1)
    return v


def projector(v) -> np.ndarray:
    v = ket(v)
    return np.outer(v, np.conjugate(v))


def eig_hermitian(m, tol: float = TOL.herm) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors (as columns).

    Raises ``NotHermitianError`` when ``m`` deviates from its adjoint by
    more than ``tol`` in any entry.
    """
    m = _as_matrix(m)
    if m.shape[0] != m.shape[1]:
        raise NotHermitianError(f"matrix is not square: {m.shape}")
    if not is_hermitian(m, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    return np.linalg.eigh(0.5 * (m + dagger(m)))


@dataclass(frozen=True, eq=False)
class PureState:
    dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = ket(self.amplitudes)
        if amps.shape[0] != self.dim:
            raise ValueError(f"expected {self.dim} amplitudes, got {amps.shape[0]}")
        if abs(np.linalg.norm(amps) - 1.0) > TOL.pure_norm:
            raise InvalidStateError("pure state is not normalised")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, amplitudes) -> "PureState":
        amps = ket(amplitudes)
        return cls(amps.shape[0], amps / np.linalg.norm(amps))

    def projector(self) -> np.ndarray:
        return projector(self.amplitudes)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A bipartite density matrix on C^dimA (x) C^dimB.

    Single systems are represented with ``dimB == 1``.
    """

    dimA: int
    dimB: int
    mat: np.ndarray

    def __post_init__(self):
        mat = _as_matrix(self.mat)
        n = self.dimA * self.dimB
        if mat.shape != (n, n):
            raise InvalidStateError(f"expected a {n}x{n} matrix, got {mat.shape}")
        if not is_hermitian(mat, TOL.herm):
            raise InvalidStateError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > TOL.trace:
            raise InvalidStateError(f"trace {np.trace(mat).real!r} differs from 1")
        lam_min = float(np.linalg.eigvalsh(0.5 * (mat + dagger(mat)))[0])
        if lam_min < -TOL.psd:
            raise InvalidStateError(f"density matrix has eigenvalue {lam_min:.3e} < 0")
        mat = 0.5 * (mat + dagger(mat))
        mat.setflags(write=False)
        object.__setattr__(self, "mat", mat)

    @property
    def dim(self) -> int:
        return self.dimA * self.dimB

    @classmethod
    def single(cls, mat) -> "DensityMatrix":
        mat = _as_matrix(mat)
        return cls(mat.shape[0], 1, mat)

    @classmethod
    def from_pure(cls, psi, dimA: int, dimB: int = 1) -> "DensityMatrix":
        if isinstance(psi, PureState):
            psi = psi.amplitudes
        return cls(dimA, dimB, projector(psi))

    def eigvals(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.mat)

    def __repr__(self) -> str:
        return f"DensityMatrix(dimA={self.dimA}, dimB={self.dimB})"


def _matrix_of(rho) -> np.ndarray:
    return rho.mat if isinstance(rho, DensityMatrix) else _as_matrix(rho)


def partial_trace(rho: DensityMatrix, keep: Subsystem) -> DensityMatrix:
    """Reduced state on the kept subsystem ``"A"`` or ``"B"``."""
    if keep not in ("A", "B"):
        raise ValueError(f"unknown subsystem tag {keep!r}; use 'A' or 'B'")
    t = rho.mat.reshape(rho.dimA, rho.dimB, rho.dimA, rho.dimB)
    if keep == "A":
        red = np.einsum("ijkj->ik", t)
    else:
        red = np.einsum("ijil->jl", t)
    return DensityMatrix.single(red)


def partial_transpose(rho: DensityMatrix, sys: Subsystem = "B") -> np.ndarray:
    t = rho.mat.reshape(rho.dimA, rho.dimB, rho.dimA, rho.dimB)
    if sys == "B":
        t = t.transpose(0, 3, 2, 1)
    elif sys == "A":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"unknown subsystem tag {sys!r}")
    return t.reshape(rho.dim, rho.dim)


def _clamped_spectrum(m: np.ndarray) -> np.ndarray:
    lam = np.linalg.eigvalsh(0.5 * (m + dagger(m)))
    if lam[0] < -TOL.psd:
        raise InvalidStateError(f"operator is not PSD (eigenvalue {lam[0]:.3e})")
    return np.clip(lam, 0.0, None)


def shannon(probs) -> float:
    p = np.asarray(probs, dtype=float)
    p = p[p > TOL.entropy_cutoff]
    return float(-np.sum(p * np.log2(p)))


def entropy(rho) -> float:
    """Von Neumann entropy in bits; eigenvalues below 1e-12 contribute nothing."""
    return max(shannon(_clamped_spectrum(_matrix_of(rho))), 0.0)


def relative_entropy(rho, sigma) -> float:
    """S(rho || sigma) in bits; ``inf`` when supp(rho) is not inside supp(sigma)."""
    r = _matrix_of(rho)
    s = _matrix_of(sigma)
    lam_s, vec_s = np.linalg.eigh(0.5 * (s + dagger(s)))
    if lam_s[0] < -TOL.psd:
        raise InvalidStateError("second argument is not PSD")
    inside = lam_s > TOL.support
    # weight of rho on the kernel of sigma
    kernel = vec_s[:, ~inside]
    leak = float(np.real(np.trace(dagger(kernel) @ r @ kernel))) if kernel.size else 0.0
    if leak > TOL.support:
        return float("inf")
    log_s = (vec_s[:, inside] * np.log2(lam_s[inside])) @ dagger(vec_s[:, inside])
    cross = -float(np.real(np.trace(r @ log_s)))
    return max(cross - entropy(r), 0.0)


def trace_distance(a, b) -> float:
    d = _matrix_of(a) - _matrix_of(b)
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(0.5 * (d + dagger(d))))))


def fidelity_pure(rho, psi) -> float:
    """<psi| rho |psi> for a pure reference state."""
    v = psi.amplitudes if isinstance(psi, PureState) else ket(psi)
    return float(np.real(np.conjugate(v) @ _matrix_of(rho) @ v))
