"""Kraus channels: generic application, the discord-creating local map,
basis-decohering maps and measurement conjugation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qmath import DensityMatrix, PureState, dagger, projector
from .states import KET0, KET1, KET_PLUS, _as_basis, _check_orthonormal

CPTP_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class KrausChannel:
    dim_in: int
    dim_out: int
    kraus_ops: tuple

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.kraus_ops)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        for k in ops:
            if k.shape != (self.dim_out, self.dim_in):
                raise ValueError(f"Kraus operator of shape {k.shape}, expected {(self.dim_out, self.dim_in)}")
        completeness = sum(dagger(k) @ k for k in ops)
        if np.max(np.abs(completeness - np.eye(self.dim_in))) > CPTP_TOL:
            raise ValueError("Kraus operators do not satisfy sum K^dag K = I")
        object.__setattr__(self, "kraus_ops", ops)

    @classmethod
    def from_ops(cls, ops: Sequence) -> "KrausChannel":
        ops = [np.asarray(k, dtype=complex) for k in ops]
        return cls(ops[0].shape[1], ops[0].shape[0], tuple(ops))

    def __call__(self, rho):
        return apply(self, rho)

    def adjoint(self, effect: np.ndarray) -> np.ndarray:
        """Heisenberg-picture image sum_i K_i^dag E K_i."""
        return sum(dagger(k) @ effect @ k for k in self.kraus_ops)


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel(dim, dim, (np.eye(dim, dtype=complex),))


def depolarizing(dim: int) -> KrausChannel:
    """Fully depolarising channel rho -> tr(rho) I/d (d^2 Kraus operators)."""
    ops = []
    for i in range(dim):
        for j in range(dim):
            k = np.zeros((dim, dim), dtype=complex)
            k[i, j] = 1 / np.sqrt(dim)
            ops.append(k)
    return KrausChannel(dim, dim, tuple(ops))


def dephasing(basis=None, dim: int = 2) -> KrausChannel:
    u = _check_orthonormal(_as_basis(basis, dim), "basis")
    return KrausChannel(u.shape[0], u.shape[0], tuple(projector(u[:, i]) for i in range(u.shape[1])))


def apply(ch: KrausChannel, rho) -> DensityMatrix:
    """Apply a channel to a single system (``rho`` as DensityMatrix or array)."""
    m = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    if m.shape != (ch.dim_in, ch.dim_in):
        raise ValueError(f"channel expects a {ch.dim_in}-dimensional input, got {m.shape}")
    out = sum(k @ m @ dagger(k) for k in ch.kraus_ops)
    return DensityMatrix.single(out)


def local_apply(ch_a: KrausChannel | None, ch_b: KrausChannel | None, rho: DensityMatrix) -> DensityMatrix:
    """(Phi_A (x) Phi_B)(rho); ``None`` stands for the identity on that side."""
    ch_a = ch_a or identity_channel(rho.dimA)
    ch_b = ch_b or identity_channel(rho.dimB)
    if ch_a.dim_in != rho.dimA or ch_b.dim_in != rho.dimB:
        raise ValueError("channel input dimensions do not match the state")
    out = np.zeros((ch_a.dim_out * ch_b.dim_out,) * 2, dtype=complex)
    for ka in ch_a.kraus_ops:
        for kb in ch_b.kraus_ops:
            k = np.kron(ka, kb)
            out += k @ rho.mat @ dagger(k)
    return DensityMatrix(ch_a.dim_out, ch_b.dim_out, out)


def discord_creating_phi() -> KrausChannel:
    """rho -> |0><0| rho |0><0| + |+><1| rho |1><+|."""
    return KrausChannel(2, 2, (np.outer(KET0, KET0.conj()), np.outer(KET_PLUS, KET1.conj())))


def decohering_map(phi_basis, chi_basis) -> KrausChannel:
    """Channel with Kraus operators K_i = |chi_i><phi_i|.

    The pairwise orthogonality K_i^dag K_j = K_i K_j^dag = 0 (i != j) is
    checked on construction.
    """
    phi = _check_orthonormal(_as_basis(phi_basis), "phi_basis")
    chi = _check_orthonormal(_as_basis(chi_basis), "chi_basis")
    if phi.shape != chi.shape:
        raise ValueError("phi and chi bases must have the same cardinality")
    ops = tuple(np.outer(chi[:, i], phi[:, i].conj()) for i in range(phi.shape[1]))
    for i, ki in enumerate(ops):
        for j, kj in enumerate(ops):
            if i != j:
                if np.max(np.abs(dagger(ki) @ kj)) > CPTP_TOL or np.max(np.abs(ki @ dagger(kj))) > CPTP_TOL:
                    raise ValueError("Kraus operators are not mutually orthogonal")
    return KrausChannel(phi.shape[0], chi.shape[0], ops)


def conjugate_measurements(ch: KrausChannel, povms):
    """New family with every effect E replaced by sum_i K_i^dag E K_i."""
    from .boxes import MeasurementFamily

    if povms.dim != ch.dim_out:
        raise ValueError(f"measurements act on dimension {povms.dim}, channel outputs {ch.dim_out}")
    return MeasurementFamily([[ch.adjoint(e) for e in setting] for setting in povms.settings])


CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


def cnot_convert(state) -> DensityMatrix:
    """Conjugate a two-qubit input (system (x) ancilla) by the CNOT gate."""
    if isinstance(state, PureState):
        mat = state.projector()
    elif isinstance(state, DensityMatrix):
        mat = state.mat
    else:
        arr = np.asarray(state, dtype=complex)
        mat = projector(arr) if arr.ndim == 1 else arr
    if mat.shape != (4, 4):
        raise ValueError("CNOT conversion needs a two-qubit input")
    return DensityMatrix(2, 2, CNOT @ mat @ CNOT.conj().T)
