"""Mutual information, classical correlation and discord, coherence,
correlation rank and the state hierarchy."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize

from .boxes import BlochParam, angles_to_direction
from .optimize import SearchSpec, minimize_multistart
from .qmath import TOL, DensityMatrix, entropy, partial_trace, projector
from .states import PAULIS, is_ppt

Direction = Literal["A->B", "B->A"]

DISCORD_ZERO = 1e-6
GRID_SHAPE = (18, 36)
REFINE_STARTS = 32


class NotSeparableError(ValueError):
    pass


def swap_parties(rho: DensityMatrix) -> DensityMatrix:
    t = rho.mat.reshape(rho.dimA, rho.dimB, rho.dimA, rho.dimB).transpose(1, 0, 3, 2)
    return DensityMatrix(rho.dimB, rho.dimA, t.reshape(rho.dim, rho.dim))


def mutual_information(rho: DensityMatrix) -> float:
    return entropy(partial_trace(rho, "A")) + entropy(partial_trace(rho, "B")) - entropy(rho)


def _batched_entropy(mats: np.ndarray) -> np.ndarray:
    """Entropies (bits) of a stack of PSD matrices, treated as unnormalised weights."""
    lam = np.clip(np.linalg.eigvalsh(mats), 0.0, None)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(lam > TOL.entropy_cutoff, -lam * np.log2(lam), 0.0)
    return terms.sum(axis=-1)


def _reduced_after(rho: DensityMatrix, effects: np.ndarray) -> np.ndarray:
    """Unnormalised B states tr_A[(E (x) I) rho] for a stack of A effects."""
    t = rho.mat.reshape(rho.dimA, rho.dimB, rho.dimA, rho.dimB)
    return np.einsum("...ji,ikjl->...kl", effects, t)


def _conditional_entropy_from_effects(rho: DensityMatrix, effects: np.ndarray) -> np.ndarray:
    """sum_i p_i S(rho^B_i) for one or more rank-one projective measurements.

    ``effects`` has shape (..., n_outcomes, dA, dA).
    """
    sub = _reduced_after(rho, effects)
    p = np.einsum("...kk->...", sub).real
    # S(sub/p) * p = H(sub) + p log p
    h = _batched_entropy(sub)
    with np.errstate(divide="ignore", invalid="ignore"):
        corr = np.where(p > TOL.entropy_cutoff, p * np.log2(p), 0.0)
    return (h + corr).sum(axis=-1)


def _qubit_effects(theta, phi) -> np.ndarray:
    theta = np.atleast_1d(theta)
    phi = np.atleast_1d(phi)
    n = np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)
    ns = np.einsum("...k,kij->...ij", n, np.stack(PAULIS))
    eye = np.eye(2)
    return np.stack([0.5 * (eye + ns), 0.5 * (eye - ns)], axis=-3)


def _unitary_from_params(x: np.ndarray, d: int) -> np.ndarray:
    h = np.zeros((d, d), dtype=complex)
    iu = np.triu_indices(d, 1)
    k = len(iu[0])
    h[iu] = x[:k] + 1j * x[k : 2 * k]
    h = h + h.conj().T
    h[np.diag_indices(d)] = x[2 * k : 2 * k + d]
    return expm(1j * h)


def _basis_effects(u: np.ndarray) -> np.ndarray:
    return np.stack([projector(u[:, i]) for i in range(u.shape[1])])


@dataclass
class MeasurementChoice:
    """Optimal rank-one projective measurement on the measured side."""

    basis: np.ndarray
    bloch: BlochParam | None = None
    angles: tuple | None = None


def _h2(w: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(w > TOL.entropy_cutoff, -w * np.log2(w), 0.0)


def _qubit_pair_objective(rho: DensityMatrix):
    """Closed-form conditional entropy for a two-qubit state measured on A.

    Outcome +-n has probability (1 +- n.a)/2 and unnormalised Bloch
    vector (b +- T^T n)/2 on B.
    """
    from .states import bloch_decompose

    form = bloch_decompose(rho)
    a, b, t = form.a, form.b, form.T

    def f(n: np.ndarray) -> np.ndarray:
        na = n @ a
        tn = n @ t
        total = 0.0
        for sgn in (1.0, -1.0):
            p = 0.5 * (1 + sgn * na)
            v = 0.5 * np.linalg.norm(b + sgn * tn, axis=-1)
            lam_hi, lam_lo = 0.5 * (p + v), np.clip(0.5 * (p - v), 0.0, None)
            total = total + _h2(lam_hi) + _h2(lam_lo) + np.where(p > TOL.entropy_cutoff, p * np.log2(np.where(p > 0, p, 1)), 0.0)
        return total

    def scalar(theta: float, phi: float) -> float:
        st = math.sin(theta)
        n = (st * math.cos(phi), st * math.sin(phi), math.cos(theta))
        na = n[0] * a[0] + n[1] * a[1] + n[2] * a[2]
        tn = [n[0] * t[0, j] + n[1] * t[1, j] + n[2] * t[2, j] for j in range(3)]
        total = 0.0
        for sgn in (1.0, -1.0):
            p = 0.5 * (1 + sgn * na)
            v = 0.5 * math.sqrt(sum((b[j] + sgn * tn[j]) ** 2 for j in range(3)))
            for lam in (0.5 * (p + v), 0.5 * (p - v)):
                if lam > TOL.entropy_cutoff:
                    total -= lam * math.log2(lam)
            if p > TOL.entropy_cutoff:
                total += p * math.log2(p)
        return total

    f.scalar = scalar
    return f


def _directions(theta, phi) -> np.ndarray:
    theta, phi = np.asarray(theta), np.asarray(phi)
    return np.stack([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)], axis=-1)


def _min_conditional_entropy_qubit(rho: DensityMatrix, refine: int) -> tuple[float, float, float]:
    nt, nph = GRID_SHAPE
    th = np.linspace(0.0, np.pi, nt)
    ph = np.linspace(0.0, 2 * np.pi, nph, endpoint=False)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    if rho.dimB == 2:
        pair = _qubit_pair_objective(rho)

        def batch(th, ph):
            return pair(_directions(th, ph))

        single = pair.scalar
    else:

        def batch(th, ph):
            return _conditional_entropy_from_effects(rho, _qubit_effects(th, ph))

        def single(th, ph):
            return float(batch(np.atleast_1d(th), np.atleast_1d(ph))[0])

    grid_vals = batch(tt.ravel(), pp.ravel())
    # stable sort: ties resolved by lowest grid index
    order = np.argsort(grid_vals, kind="stable")[:refine]
    best = (float(grid_vals[order[0]]), float(tt.ravel()[order[0]]), float(pp.ravel()[order[0]]))

    def f(x):
        return single(float(x[0]), float(x[1]))

    for idx in order:
        x0 = np.array([tt.ravel()[idx], pp.ravel()[idx]])
        res = minimize(
            f,
            x0,
            method="Nelder-Mead",
            options={"xatol": 1e-7, "fatol": 1e-13, "maxiter": 2000},
        )
        if res.fun < best[0]:
            best = (float(res.fun), float(res.x[0]), float(res.x[1]))
    return best


def _min_conditional_entropy_general(rho: DensityMatrix, restarts: int, seed: int):
    d = rho.dimA
    npar = d * d
    spec = SearchSpec(npar, [(-np.pi, np.pi)] * npar, restarts=restarts, max_iters=3000, tol=1e-10, seed=seed)

    def f(x):
        u = _unitary_from_params(x, d)
        return float(_conditional_entropy_from_effects(rho, _basis_effects(u)))

    res = minimize_multistart(f, spec, extra_starts=[np.zeros(npar)])
    return res.best_value, _unitary_from_params(res.best_point, d)


def classical_correlation(
    rho: DensityMatrix,
    direction: Direction = "A->B",
    *,
    refine: int = REFINE_STARTS,
    restarts: int = 16,
    seed: int = 0,
) -> tuple[float, MeasurementChoice]:
    """Classical correlation for projective measurements on the measuring side.

    ``"A->B"`` measures A. A qubit measured side is searched on an 18x36
    (theta, phi) grid followed by Nelder-Mead refinement of the best
    ``refine`` grid points; a qutrit side uses multi-start search over
    unitaries, always including the computational basis.
    """
    if direction not in ("A->B", "B->A"):
        raise ValueError(f"unknown direction {direction!r}")
    r = rho if direction == "A->B" else swap_parties(rho)
    if r.dimA not in (2, 3):
        raise ValueError(f"measured side has dimension {r.dimA}; only qubits and qutrits are supported")
    s_b = entropy(partial_trace(r, "B"))
    if r.dimA == 2:
        h_min, theta, phi = _min_conditional_entropy_qubit(r, refine)
        n = angles_to_direction(theta, phi)
        eff = _qubit_effects(theta, phi)[0]
        u = np.column_stack([np.linalg.eigh(e)[1][:, -1] for e in eff])
        choice = MeasurementChoice(u, BlochParam(0.5, 1.0, tuple(n)), (theta, phi))
    else:
        h_min, u = _min_conditional_entropy_general(r, restarts, seed)
        choice = MeasurementChoice(u)
    return max(s_b - h_min, 0.0), choice


@dataclass
class DiscordReport:
    mutual_information: float
    classical_correlation: float
    discord: float
    optimal_measurement: MeasurementChoice
    direction: str

    def as_dict(self) -> dict:
        m = self.optimal_measurement
        out = {
            "direction": self.direction,
            "mutual_information": self.mutual_information,
            "classical_correlation": self.classical_correlation,
            "discord": self.discord,
        }
        if m.angles is not None:
            out["optimal_theta"], out["optimal_phi"] = m.angles
        return out


def discord(rho: DensityMatrix, direction: Direction = "A->B", **search) -> DiscordReport:
    mi = mutual_information(rho)
    cc, choice = classical_correlation(rho, direction, **search)
    return DiscordReport(mi, cc, mi - cc, choice, direction)


def coherence_rel_entropy(rho, basis=None) -> float:
    """Relative entropy of coherence S(dephased rho) - S(rho).

    ``basis`` is a unitary whose columns form the reference basis
    (computational by default).
    """
    m = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)
    u = np.eye(m.shape[0], dtype=complex) if basis is None else np.asarray(basis, dtype=complex)
    if np.max(np.abs(u.conj().T @ u - np.eye(u.shape[1]))) > 1e-10:
        raise ValueError("reference basis is not orthonormal")
    in_basis = u.conj().T @ m @ u
    return max(entropy(np.diag(np.diag(in_basis))) - entropy(m), 0.0)


def hermitian_basis(d: int) -> list[np.ndarray]:
    """Orthonormal (Hilbert-Schmidt) Hermitian basis, identity/sqrt(d) first."""
    ops = [np.eye(d, dtype=complex) / np.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=complex)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            a = np.zeros((d, d), dtype=complex)
            a[j, k], a[k, j] = -1j / np.sqrt(2), 1j / np.sqrt(2)
            ops += [s, a]
    for l in range(1, d):
        diag = np.zeros(d)
        diag[:l] = 1
        diag[l] = -l
        ops.append(np.diag(diag / np.sqrt(l * (l + 1))).astype(complex))
    return ops


@dataclass
class OperatorSchmidt:
    singular_values: np.ndarray
    left_ops: list
    right_ops: list
    rank: int
    traceless_rank: int
    correlation_matrix: np.ndarray = field(repr=False)

    def reconstruct(self) -> np.ndarray:
        return sum(c * np.kron(s, f) for c, s, f in zip(self.singular_values, self.left_ops, self.right_ops))

    def as_dict(self) -> dict:
        return {
            "L_R": self.rank,
            "L_R_traceless": self.traceless_rank,
            "singular_values": self.singular_values.tolist(),
        }


def _rank(m: np.ndarray, tol: float) -> int:
    if m.size == 0:
        return 0
    return int(np.sum(np.linalg.svd(m, compute_uv=False) > tol))


def correlation_rank(rho: DensityMatrix, tol: float = TOL.rank) -> OperatorSchmidt:
    """Operator Schmidt decomposition rho = sum_n c_n S_n (x) F_n.

    ``rank`` counts singular values above ``tol`` over complete bases
    (identity included); ``traceless_rank`` is the rank of the block
    with both identity components removed.
    """
    ba = hermitian_basis(rho.dimA)
    bb = hermitian_basis(rho.dimB)
    r = np.array([[np.trace(rho.mat @ np.kron(a, b)).real for b in bb] for a in ba])
    u, s, vt = np.linalg.svd(r)
    left = [sum(u[n, k] * ba[n] for n in range(len(ba))) for k in range(len(s))]
    right = [sum(vt[k, m] * bb[m] for m in range(len(bb))) for k in range(len(s))]
    return OperatorSchmidt(s, left, right, int(np.sum(s > tol)), _rank(r[1:, 1:], tol), r)


def superseparable(rho: DensityMatrix, convention: Literal["full", "traceless"] = "full") -> bool:
    """L_R > d_min for a separable state; raises NotSeparableError otherwise."""
    ppt, lam = is_ppt(rho)
    if not ppt:
        raise NotSeparableError(f"state is entangled (partial transpose eigenvalue {lam:.3e})")
    osd = correlation_rank(rho)
    lr = osd.rank if convention == "full" else osd.traceless_rank
    return lr > min(rho.dimA, rho.dimB)


LABELS = ("CC", "CQ", "QC", "locally-creatable", "superseparable", "entangled")


@dataclass
class Classification:
    label: str
    ppt: bool
    min_pt_eigenvalue: float
    discord_ab: float | None
    discord_ba: float | None
    L_R: int
    L_R_traceless: int
    d_min: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def classify(rho: DensityMatrix, threshold: float = DISCORD_ZERO, **search) -> Classification:
    """Place a 2x2 or 2x3 state in the correlation hierarchy."""
    dims = tuple(sorted((rho.dimA, rho.dimB)))
    if dims not in ((2, 2), (2, 3)):
        raise ValueError(f"classification supports 2x2 and 2x3 states, got {rho.dimA}x{rho.dimB}")
    ppt, lam = is_ppt(rho)
    osd = correlation_rank(rho)
    d_min = min(rho.dimA, rho.dimB)
    if not ppt:
        return Classification("entangled", False, lam, None, None, osd.rank, osd.traceless_rank, d_min)
    d_ab = discord(rho, "A->B", **search).discord
    d_ba = discord(rho, "B->A", **search).discord
    zero_ab, zero_ba = d_ab <= threshold, d_ba <= threshold
    if zero_ab and zero_ba:
        label = "CC"
    elif zero_ab:
        label = "CQ"
    elif zero_ba:
        label = "QC"
    elif osd.rank > d_min:
        label = "superseparable"
    else:
        label = "locally-creatable"
    return Classification(label, True, lam, d_ab, d_ba, osd.rank, osd.traceless_rank, d_min)
