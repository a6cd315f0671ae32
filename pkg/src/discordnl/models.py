"""Hidden-variable models with bounded cardinality, local-polytope
membership and the combined box verdict."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares, linprog

from .boxes import Box, MeasurementFamily, _require_2222, born_box, steering_f2, witnesses
from .optimize import restart_rng
from .qmath import DensityMatrix, partial_trace
from .states import PAULIS, qubit_state

REPRESENTABLE = 1e-6
WITNESS_TAU = 1e-6
LHS_PENALTY = 1e3
EXACT_FIT = 1e-12
_EPS = 1e-300


@dataclass
class LhvModel:
    d_lambda: int
    weights: np.ndarray
    alice_responses: np.ndarray  # [lambda, x, a]
    bob_responses: np.ndarray  # [lambda, y, b]

    def box_table(self) -> np.ndarray:
        return np.einsum("l,lxa,lyb->xyab", self.weights, self.alice_responses, self.bob_responses)

    def as_dict(self) -> dict:
        return {
            "type": "lhv",
            "d_lambda": self.d_lambda,
            "weights": self.weights.tolist(),
            "alice_responses": self.alice_responses.tolist(),
            "bob_responses": self.bob_responses.tolist(),
        }


@dataclass
class LhvLhsModel:
    d_lambda: int
    weights: np.ndarray
    alice_responses: np.ndarray  # [lambda, x, a]
    bob_hidden_states: list  # qubit DensityMatrix per lambda
    bob_povms: MeasurementFamily
    lhs_residual: float = 0.0

    def box_table(self) -> np.ndarray:
        eb = np.array(self.bob_povms.settings)  # [y, b, i, j]
        bob = np.array([np.einsum("ybji,ij->yb", eb, s.mat).real for s in self.bob_hidden_states])
        return np.einsum("l,lxa,lyb->xyab", self.weights, self.alice_responses, bob)

    def as_dict(self) -> dict:
        return {
            "type": "lhvlhs",
            "d_lambda": self.d_lambda,
            "weights": self.weights.tolist(),
            "alice_responses": self.alice_responses.tolist(),
            "bob_hidden_bloch": [
                [float(np.trace(s.mat @ p).real) for p in PAULIS] for s in self.bob_hidden_states
            ],
            "lhs_residual": self.lhs_residual,
        }


@dataclass
class FitResult:
    model: LhvModel | LhvLhsModel
    residual: float
    converged: bool
    restarts_used: int
    seed: int
    restart_residuals: list = field(default_factory=list, repr=False)

    @property
    def representable(self) -> bool:
        return self.residual <= REPRESENTABLE

    def as_dict(self) -> dict:
        return {
            "residual": self.residual,
            "representable": self.representable,
            "converged": self.converged,
            "restarts_used": self.restarts_used,
            "seed": self.seed,
            "model": self.model.as_dict(),
        }


def _weights(u: np.ndarray) -> np.ndarray:
    sq = u * u
    return sq / max(sq.sum(), _EPS)


def _binary(r: np.ndarray) -> np.ndarray:
    """Stack p(0) = r and p(1) = 1 - r along a trailing outcome axis."""
    return np.stack([r, 1.0 - r], axis=-1)


def _check_fit_inputs(box: Box, d_lambda: int, budget: int) -> None:
    if not isinstance(box, Box):
        raise TypeError("box must be a Box")
    _require_2222(box)
    if int(d_lambda) != d_lambda or d_lambda < 1:
        raise ValueError("d_lambda must be a positive integer")
    if budget < 1:
        raise ValueError("budget must be at least one restart")


def _multistart(residuals, jac, n_par, lower, upper, budget, seed, extra=()):
    """Bounded least squares from the ``extra`` starts, then ``budget`` seeded ones.

    Returns the best solution and per-start residual norms; ties keep
    the earliest start. Stops early once a start fits to EXACT_FIT, so
    the warm starts run first and are never skipped.
    """
    starts = list(extra)
    starts += [lower + (upper - lower) * restart_rng(seed, i).random(n_par) for i in range(budget)]
    best_x, best_r, best_ok = None, np.inf, False
    norms = []
    for x0 in starts:
        x0 = np.clip(x0, lower, upper)
        r0 = float(np.linalg.norm(residuals(x0)))
        res = least_squares(
            residuals, x0, jac=jac, bounds=(lower, upper), method="trf", x_scale="jac",
            xtol=1e-12, ftol=1e-10, gtol=1e-12, max_nfev=200,
        )
        x, r = res.x, float(np.linalg.norm(residuals(res.x)))
        ok = res.status > 0
        if r0 < r:
            x, r = x0, r0
        norms.append(r)
        if r < best_r:
            best_x, best_r, best_ok = x, r, ok
        if best_r <= EXACT_FIT:
            break
    return best_x, best_r, best_ok, norms


# LHV models

def _weights_jac(u: np.ndarray) -> np.ndarray:
    """dw_l/du_k = 2 u_k (delta_lk - w_l) / S."""
    s = max(float(u @ u), _EPS)
    w = u * u / s
    return 2 * u[None, :] * (np.eye(len(u)) - w[:, None]) / s


_SIGN = np.array([1.0, -1.0])


def _product_jac(w, dw, ra, bob, dbob=None):
    """Jacobian of p[x,y,a,b] = sum_l w_l A[l,x,a] bob[l,y,b] w.r.t. (u, r^A, bob params).

    ``dbob[l, y, b, j]`` gives the derivative of bob[l] wrt its own
    parameters; when absent bob is binary in p(0|y, l).
    """
    d = len(w)
    a_t = _binary(ra)
    ju = np.einsum("lk,lxa,lyb->xyabk", dw, a_t, bob)
    ja = np.einsum("l,xz,a,lyb->xyablz", w, np.eye(2), _SIGN, bob).reshape(2, 2, 2, 2, 2 * d)
    if dbob is None:
        jb = np.einsum("l,lxa,yz,b->xyablz", w, a_t, np.eye(2), _SIGN).reshape(2, 2, 2, 2, 2 * d)
    else:
        jb = np.einsum("l,lxa,lybj->xyablj", w, a_t, dbob).reshape(2, 2, 2, 2, -1)
    return np.concatenate([ju, ja, jb], axis=-1).reshape(16, -1)


def _lhv_unpack(x: np.ndarray, d: int) -> LhvModel:
    w = _weights(x[:d])
    ra = x[d : 3 * d].reshape(d, 2)
    rb = x[3 * d : 5 * d].reshape(d, 2)
    return LhvModel(d, w, _binary(ra), _binary(rb))


def _lhv_pack(model: LhvModel, d: int) -> np.ndarray:
    """Embed a smaller model into d components (extra components weight zero)."""
    k = model.d_lambda
    u = np.zeros(d)
    u[:k] = np.sqrt(model.weights)
    ra = np.full((d, 2), 0.5)
    rb = np.full((d, 2), 0.5)
    ra[:k] = model.alice_responses[:, :, 0]
    rb[:k] = model.bob_responses[:, :, 0]
    return np.concatenate([u, ra.ravel(), rb.ravel()])


def lhv_fit(box: Box, d_lambda: int, budget: int = 64, seed: int = 0, warm_start: bool = True) -> FitResult:
    """Best-found LHV model with ``d_lambda`` hidden-variable values.

    Weights are normalised squares, responses p(0|x, lambda) live in
    [0, 1]. With ``warm_start`` the optimum for ``d_lambda - 1`` is
    embedded as an extra start, which makes the residual non-increasing
    in ``d_lambda``.
    """
    _check_fit_inputs(box, d_lambda, budget)
    d = int(d_lambda)
    target = box.p.ravel()
    n_par = 5 * d
    lower, upper = np.zeros(n_par), np.ones(n_par)

    def residuals(x):
        return _lhv_unpack(x, d).box_table().ravel() - target

    def jac(x):
        u = x[:d]
        m = _lhv_unpack(x, d)
        return _product_jac(m.weights, _weights_jac(u), x[d : 3 * d].reshape(d, 2), m.bob_responses)

    extra = []
    if warm_start and d > 1:
        prev = lhv_fit(box, d - 1, budget, seed, warm_start=True)
        extra.append(_lhv_pack(prev.model, d))
    x, r, ok, norms = _multistart(residuals, jac, n_par, lower, upper, budget, seed, extra)
    return FitResult(_lhv_unpack(x, d), r, ok, budget + len(extra), seed, norms)


# LHV-LHS models

def _ball(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bloch vectors from spherical (radius, theta, phi) rows and their Jacobians [l, k, j]."""
    rad, th, ph = s[:, 0], s[:, 1], s[:, 2]
    st, ct, sp, cp = np.sin(th), np.cos(th), np.sin(ph), np.cos(ph)
    n = np.stack([st * cp, st * sp, ct], axis=1)
    dn_th = np.stack([ct * cp, ct * sp, -st], axis=1)
    dn_ph = np.stack([-st * sp, st * cp, np.zeros_like(st)], axis=1)
    jac = np.stack([n, rad[:, None] * dn_th, rad[:, None] * dn_ph], axis=2)
    return rad[:, None] * n, jac


def _spherical(v: np.ndarray) -> np.ndarray:
    r = float(np.linalg.norm(v))
    if r < 1e-15:
        return np.zeros(3)
    return np.array([min(r, 1.0), np.arccos(np.clip(v[2] / r, -1, 1)), np.arctan2(v[1], v[0]) % (2 * np.pi)])


def _bloch_vector(rho_b) -> np.ndarray:
    m = rho_b.mat if isinstance(rho_b, DensityMatrix) else np.asarray(rho_b, dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("the trusted side must be a qubit")
    return np.array([np.trace(m @ p).real for p in PAULIS])


def lhvlhs_fit(
    box: Box,
    d_lambda: int,
    bob_povms: MeasurementFamily,
    rho_B,
    budget: int = 64,
    seed: int = 0,
    warm_start: bool = True,
) -> FitResult:
    """Best-found LHV-LHS model: Bob's outcomes come from hidden qubit states
    measured with the trusted ``bob_povms``.

    The consistency condition sum_l p_l rho_l = rho_B enters as a quadratic
    penalty of weight 1e3; its violation is stored in ``model.lhs_residual``
    and the reported ``residual`` is the box distance alone.
    """
    _check_fit_inputs(box, d_lambda, budget)
    if not isinstance(bob_povms, MeasurementFamily) or bob_povms.dim != 2:
        raise ValueError("bob_povms must be a qubit MeasurementFamily")
    if bob_povms.n_settings != 2 or bob_povms.n_outcomes != 2:
        raise ValueError("bob_povms must have two dichotomic settings")
    b_vec = _bloch_vector(rho_B)
    if np.linalg.norm(b_vec) > 1 + 1e-9:
        raise ValueError("rho_B is not a valid qubit state")
    d = int(d_lambda)
    target = box.p.ravel()
    eb = np.array(bob_povms.settings)  # [y, b, i, j]
    # effect E = g I + h.sigma  ->  tr(E rho) = g + h.r
    g = np.einsum("ybii->yb", eb).real / 2
    h = np.stack([np.einsum("ybji,ij->yb", eb, p).real / 2 for p in PAULIS], axis=-1)  # [y, b, k]
    n_par = 3 * d + 3 * d
    lower = np.zeros(n_par)
    upper = np.concatenate([np.ones(3 * d), np.tile([1.0, np.pi, 2 * np.pi], d)])
    pen = np.sqrt(LHS_PENALTY)

    def unpack(x):
        w = _weights(x[:d])
        ra = _binary(x[d : 3 * d].reshape(d, 2))
        r, _ = _ball(x[3 * d :].reshape(d, 3))
        return w, ra, r

    def table(w, ra, r):
        bob = g[None] + np.einsum("ybk,lk->lyb", h, r)
        return np.einsum("l,lxa,lyb->xyab", w, ra, bob)

    def residuals(x):
        w, ra, r = unpack(x)
        return np.concatenate([table(w, ra, r).ravel() - target, pen * (w @ r - b_vec)])

    def jac(x):
        w, ra, r = unpack(x)
        _, dr = _ball(x[3 * d :].reshape(d, 3))
        bob = g[None] + np.einsum("ybk,lk->lyb", h, r)
        dbob = np.einsum("ybk,lkj->lybj", h, dr)
        dw = _weights_jac(x[:d])
        top = _product_jac(w, dw, x[d : 3 * d].reshape(d, 2), bob, dbob)
        bottom = np.zeros((3, n_par))
        bottom[:, :d] = pen * np.einsum("lk,lj->jk", dw, r)
        for l in range(d):
            bottom[:, 3 * d + 3 * l : 3 * d + 3 * l + 3] = pen * w[l] * dr[l]
        return np.vstack([top, bottom])

    def box_residual(x):
        w, ra, r = unpack(x)
        return float(np.linalg.norm(table(w, ra, r).ravel() - target))

    extra = []
    if warm_start and d > 1:
        prev = lhvlhs_fit(box, d - 1, bob_povms, rho_B, budget, seed, warm_start=True)
        m = prev.model
        u = np.zeros(d)
        u[: d - 1] = np.sqrt(m.weights)
        ra = np.full((d, 2), 0.5)
        ra[: d - 1] = m.alice_responses[:, :, 0]
        rv = np.zeros((d, 3))
        rv[: d - 1] = [_spherical(_bloch_vector(s)) for s in m.bob_hidden_states]
        extra.append(np.concatenate([u, ra.ravel(), rv.ravel()]))
    x, _, ok, _ = _multistart(residuals, jac, n_par, lower, upper, budget, seed, extra)
    w, ra, r = unpack(x)
    states = [DensityMatrix.single(qubit_state(v)) for v in r]
    lhs_res = float(np.linalg.norm(w @ r - b_vec))
    model = LhvLhsModel(d, w, ra, states, bob_povms, lhs_res)
    return FitResult(model, box_residual(x), ok, budget + len(extra), seed)


# local polytope

def deterministic_tables() -> np.ndarray:
    """The 16 local deterministic boxes of the 2x2x2x2 scenario, [k, x, y, a, b]."""
    out = []
    for a0, a1, b0, b1 in itertools.product(range(2), repeat=4):
        p = np.zeros((2, 2, 2, 2))
        for x, a in enumerate((a0, a1)):
            for y, b in enumerate((b0, b1)):
                p[x, y, a, b] = 1.0
        out.append(p)
    return np.array(out)


def local_polytope_member(box: Box, tol: float = 1e-9) -> tuple[bool, float]:
    """Membership in the local polytope and the L1 distance to it.

    Solves min ||sum_k q_k D_k - p||_1 over the probability simplex q.
    """
    _require_2222(box)
    dmat = deterministic_tables().reshape(16, 16).T  # [entry, k]
    p = box.p.ravel()
    n = p.size
    # variables: q (16), slack s (n); minimise sum s with -s <= Dq - p <= s
    c = np.concatenate([np.zeros(16), np.ones(n)])
    a_ub = np.block([[dmat, -np.eye(n)], [-dmat, -np.eye(n)]])
    b_ub = np.concatenate([p, -p])
    a_eq = np.concatenate([np.ones(16), np.zeros(n)])[None]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=[(0, None)] * (16 + n), method="highs")
    if not res.success:
        raise RuntimeError(f"polytope LP failed: {res.message}")
    dist = max(float(res.fun), 0.0)
    return dist <= tol, dist


# verdict

@dataclass
class Verdict:
    bell_local: bool
    polytope_distance: float
    unsteerable: bool
    steering_certified: bool
    superlocal: bool
    superunsteerable: bool
    witnesses: dict
    lhv_residual_d2: float | None = None
    lhvlhs_residual_d2: float | None = None
    lhvlhs_residual_d4: float | None = None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def verdict(
    rho: DensityMatrix,
    alice: MeasurementFamily,
    bob: MeasurementFamily,
    *,
    budget: int = 16,
    seed: int = 0,
    tau: float = WITNESS_TAU,
) -> Verdict:
    """Classify the box produced by ``rho`` under the given measurements.

    Bell locality is decided exactly by the polytope LP; unsteerability
    means an LHV-LHS model with four hidden states was found (F2 > 1
    certifies the opposite). Superlocality and superunsteerability are
    asserted only when Q exceeds ``tau``, since a d_lambda = 2 model
    forces Q = 0; the d_lambda = 2 fit residuals are reported alongside.
    Set ``budget=0`` to skip fitting (unsteerable then falls back to
    F2 <= 1).
    """
    if (rho.dimA, rho.dimB) != (2, 2):
        raise ValueError("verdict needs a two-qubit state")
    box = born_box(rho, alice, bob)
    wit = witnesses(box)
    local, dist = local_polytope_member(box)
    steering = steering_f2(box) > 1 + 1e-12
    rho_b = partial_trace(rho, "B")
    r2 = s2 = s4 = None
    if budget > 0:
        r2 = lhv_fit(box, 2, budget, seed).residual
        s2 = lhvlhs_fit(box, 2, bob, rho_b, budget, seed).residual
        s4 = lhvlhs_fit(box, 4, bob, rho_b, budget, seed).residual
        unsteerable = (not steering) and s4 <= REPRESENTABLE
    else:
        unsteerable = not steering
    certified = (wit["Q"] or 0.0) > tau
    return Verdict(
        bell_local=local,
        polytope_distance=dist,
        unsteerable=unsteerable,
        steering_certified=steering,
        superlocal=local and certified,
        superunsteerable=unsteerable and certified,
        witnesses=wit,
        lhv_residual_d2=r2,
        lhvlhs_residual_d2=s2,
        lhvlhs_residual_d4=s4,
    )
