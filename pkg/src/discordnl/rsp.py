"""Two-qubit canonical form, RSP-fidelity, Bell-diagonal Schrodinger
strengths and the maximal entangled-fraction decomposition."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial.transform import Rotation

from .qmath import DensityMatrix, PureState
from .states import I2, PAULIS, PHI_PLUS, bloch_decompose

BELL_DIAGONAL_TOL = 1e-8
FRACTION_TOL = 1e-14
EXISTS_TOL = 1e-12


def _require_two_qubit(rho: DensityMatrix) -> None:
    if not isinstance(rho, DensityMatrix) or (rho.dimA, rho.dimB) != (2, 2):
        raise ValueError("expected a two-qubit DensityMatrix")


def rotation_to_unitary(rot: np.ndarray) -> np.ndarray:
    """SU(2) element U with U (n.sigma) U^dag = (rot n).sigma."""
    v = Rotation.from_matrix(rot).as_rotvec()
    angle = float(np.linalg.norm(v))
    if angle < 1e-15:
        return I2.copy()
    n = v / angle
    gen = sum(ni * s for ni, s in zip(n, PAULIS))
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * gen


@dataclass(frozen=True, eq=False)
class CanonicalForm:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    localU_A: np.ndarray
    localU_B: np.ndarray

    def state(self) -> DensityMatrix:
        """The canonical state with T = diag(c)."""
        mat = np.kron(I2, I2)
        for i, s in enumerate(PAULIS):
            mat = mat + self.a[i] * np.kron(s, I2) + self.b[i] * np.kron(I2, s) + self.c[i] * np.kron(s, s)
        return DensityMatrix(2, 2, mat / 4)

    def reconstruct(self) -> DensityMatrix:
        """Undo the local unitaries to recover the input state."""
        u = np.kron(self.localU_A, self.localU_B)
        return DensityMatrix(2, 2, u.conj().T @ self.state().mat @ u)

    def as_dict(self) -> dict:
        return {"a": self.a.tolist(), "b": self.b.tolist(), "c": self.c.tolist()}


def _proper(q: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if np.linalg.det(q) < 0:
        q = q.copy()
        q[:, -1] *= -1
        s = s.copy()
        s[-1] *= -1
    return q, s


def canonical_form(rho: DensityMatrix) -> CanonicalForm:
    """Local-unitary normal form with diagonal correlation matrix.

    T = U diag(c) V^T with U, V in SO(3) (a column and the matching
    singular value flip sign when needed); the local unitaries realise
    the rotations U^T on A and V^T on B.
    """
    _require_two_qubit(rho)
    form = bloch_decompose(rho)
    u, s, vt = np.linalg.svd(form.T)
    u, s = _proper(u, s)
    v, s = _proper(vt.T, s)
    # singular values are already sorted by magnitude, sign flips keep that order
    c = s
    ua = rotation_to_unitary(u.T)
    ub = rotation_to_unitary(v.T)
    return CanonicalForm(u.T @ form.a, v.T @ form.b, c, ua, ub)


def rsp_fidelity(rho: DensityMatrix) -> float:
    c = canonical_form(rho).c
    return float(0.5 * (c[1] ** 2 + c[2] ** 2))


def schrodinger_strength_bd(tau: DensityMatrix, n: int = 2) -> float:
    """|c_2| or |c_3| of a Bell-diagonal state with c ordered by square."""
    _require_two_qubit(tau)
    if n not in (2, 3):
        raise ValueError("n must be 2 or 3")
    form = bloch_decompose(tau)
    if max(np.max(np.abs(form.a)), np.max(np.abs(form.b))) > BELL_DIAGONAL_TOL:
        raise ValueError("state is not Bell-diagonal (nonzero local Bloch vectors)")
    c = canonical_form(tau).c
    return float(abs(c[n - 1]))


@dataclass
class DecompositionResult:
    p_max: float
    entangled_part: PureState
    residual: DensityMatrix
    residual_ppt: bool
    residual_gamma_sup: float | None = None
    residual_min_eigenvalue: float = 0.0
    residual_min_pt_eigenvalue: float = 0.0

    def reconstruct(self) -> np.ndarray:
        return self.p_max * self.entangled_part.projector() + (1 - self.p_max) * self.residual.mat

    def as_dict(self) -> dict:
        return {
            "p_max": self.p_max,
            "residual_ppt": self.residual_ppt,
            "residual_gamma_sup": self.residual_gamma_sup,
            "residual_min_eigenvalue": self.residual_min_eigenvalue,
            "residual_min_pt_eigenvalue": self.residual_min_pt_eigenvalue,
        }


def _pt(m: np.ndarray) -> np.ndarray:
    return m.reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)


def _feasibility(rho: np.ndarray, proj: np.ndarray, p: float) -> float:
    """min(lambda_min(rho - p P), lambda_min(PT(rho - p P))); concave in p."""
    m = rho - p * proj
    pt = _pt(m)
    return float(min(np.linalg.eigvalsh(m)[0], np.linalg.eigvalsh(pt)[0]))


def max_entangled_fraction(
    rho: DensityMatrix,
    psi_e: PureState | None = None,
    check_gamma: bool = False,
    *,
    tol: float = FRACTION_TOL,
    restarts: int = 128,
    seed: int = 0,
) -> DecompositionResult:
    """Largest p with rho = p |psi_e><psi_e| + (1 - p) sigma, sigma PSD and PPT.

    The feasibility margin is concave in p, so its maximiser is located
    first and the upper edge of the feasible interval is then found by
    bisection. ``check_gamma`` adds a best-found max Gamma of sigma over
    projective settings (a search result, not a proof of zero).
    """
    _require_two_qubit(rho)
    psi = PHI_PLUS if psi_e is None else psi_e
    if psi.dim != 4:
        raise ValueError("psi_e must be a two-qubit pure state")
    proj = psi.projector()
    if np.linalg.eigvalsh(_pt(proj))[0] >= -EXISTS_TOL:
        raise ValueError("psi_e is not entangled")
    m = rho.mat
    if np.max(np.abs(m - proj)) <= EXISTS_TOL:
        sigma = DensityMatrix(2, 2, np.eye(4) / 4)
        return DecompositionResult(1.0, psi, sigma, True, 0.0 if check_gamma else None, 0.25, 0.25)

    peak = minimize_scalar(lambda p: -_feasibility(m, proj, p), bounds=(0.0, 1.0), method="bounded", options={"xatol": 1e-13})
    p_star = float(peak.x)
    for cand in (0.0, 1.0):
        if _feasibility(m, proj, cand) > _feasibility(m, proj, p_star):
            p_star = cand
    if _feasibility(m, proj, p_star) < -EXISTS_TOL:
        raise ValueError("no decomposition with a PSD and PPT residual exists for this entangled part")
    lo, hi = (p_star, 1.0) if _feasibility(m, proj, p_star) >= -tol else (p_star, p_star)
    while hi - lo > 1e-14:
        mid = 0.5 * (lo + hi)
        if _feasibility(m, proj, mid) >= -tol:
            lo = mid
        else:
            hi = mid
    p = lo
    raw = (m - p * proj) / (1 - p)
    lam = float(np.linalg.eigvalsh(raw)[0])
    lam_pt = float(np.linalg.eigvalsh(_pt(raw))[0])
    sigma = DensityMatrix(2, 2, raw)
    gamma = None
    if check_gamma:
        from .optimize import witness_max

        gamma = witness_max(sigma, "Gamma", restarts=restarts, seed=seed).value
    return DecompositionResult(p, psi, sigma, lam_pt >= -1e-9, gamma, lam, lam_pt)
