"""Seeded multi-start derivative-free search over bounded boxes.

Every restart draws its starting point from a Philox generator keyed by
``(seed, restart_index)``, so restart ``i`` is identical whatever the
total restart count. Local refinement is bounded Nelder-Mead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .boxes import (
    BlochParam,
    Box,
    MeasurementFamily,
    angles_to_direction,
    born_box,
    chsh,
    mermin_strength,
    q_witness,
    steering_f2,
)
from .qmath import DensityMatrix
from .states import bloch_decompose

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchSpec:
    dim: int
    bounds: tuple
    restarts: int = 64
    max_iters: int = 4000
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        bounds = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(bounds) != self.dim:
            raise ValueError(f"{len(bounds)} bounds given for {self.dim} parameters")
        for lo, hi in bounds:
            if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
                raise ValueError(f"invalid interval [{lo}, {hi}]")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        object.__setattr__(self, "bounds", bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])


def restart_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.array([seed, index], dtype=np.uint64)))


def start_point(spec: SearchSpec, index: int) -> np.ndarray:
    rng = restart_rng(spec.seed, index)
    return spec.lower + (spec.upper - spec.lower) * rng.random(spec.dim)


@dataclass
class SearchResult:
    best_value: float
    best_point: np.ndarray
    best_index: int
    start_values: list = field(default_factory=list)
    final_values: list = field(default_factory=list)
    evaluations: int = 0
    discarded: list = field(default_factory=list)

    def summary(self) -> dict:
        return {
            "best_value": self.best_value,
            "best_index": self.best_index,
            "restarts": len(self.final_values),
            "evaluations": self.evaluations,
            "discarded": list(self.discarded),
        }


def _refine(neg: Callable, x0: np.ndarray, spec: SearchSpec) -> tuple[np.ndarray, float, int]:
    res = minimize(
        neg,
        x0,
        method="Nelder-Mead",
        bounds=spec.bounds,
        options={
            "maxiter": spec.max_iters,
            "maxfev": 2 * spec.max_iters,
            "xatol": spec.tol,
            "fatol": spec.tol,
            "adaptive": spec.dim > 4,
        },
    )
    return np.clip(res.x, spec.lower, spec.upper), float(res.fun), int(res.nfev)


def maximize(
    f: Callable[[np.ndarray], float],
    spec: SearchSpec,
    extra_starts: Sequence[np.ndarray] = (),
) -> SearchResult:
    """Multi-start bounded maximisation of ``f``.

    ``extra_starts`` are refined after the random restarts and take the
    indices ``restarts, restarts + 1, ...``. A start whose objective is
    not finite is dropped and logged.
    """
    starts = [start_point(spec, i) for i in range(spec.restarts)]
    starts += [np.clip(np.asarray(s, dtype=float), spec.lower, spec.upper) for s in extra_starts]

    def neg(x):
        v = f(x)
        return -v if np.isfinite(v) else np.inf

    result = SearchResult(-np.inf, starts[0], -1)
    for i, x0 in enumerate(starts):
        v0 = f(x0)
        result.evaluations += 1
        if not np.isfinite(v0):
            log.warning("restart %d discarded: objective not finite at start", i)
            result.discarded.append(i)
            continue
        x, fneg, nfev = _refine(neg, x0, spec)
        result.evaluations += nfev
        value = -fneg
        # re-evaluate so best_value always matches f(best_point)
        value_at_x = f(x)
        result.evaluations += 1
        if not np.isfinite(value_at_x):
            log.warning("restart %d discarded: objective not finite after refinement", i)
            result.discarded.append(i)
            continue
        value = value_at_x
        if value < v0:
            x, value = x0, v0
        result.start_values.append(v0)
        result.final_values.append(value)
        if value > result.best_value:
            result.best_value, result.best_point, result.best_index = value, x, i
    if result.best_index < 0:
        raise RuntimeError("every restart produced a non-finite objective")
    return result


def minimize_multistart(f: Callable, spec: SearchSpec, extra_starts=()) -> SearchResult:
    res = maximize(lambda x: -f(x), spec, extra_starts)
    res.best_value = -res.best_value
    res.start_values = [-v for v in res.start_values]
    res.final_values = [-v for v in res.final_values]
    return res


# witness maximisation over measurement space

WITNESSES: dict[str, Callable[[Box], float]] = {
    "Q": q_witness,
    "Gamma": mermin_strength,
    "CHSH": chsh,
    "F2": steering_f2,
}


def _setting_from(params: np.ndarray, family: str) -> BlochParam:
    theta, phi = params[0], params[1]
    u = tuple(angles_to_direction(theta, phi))
    if family == "projective":
        return BlochParam(0.5, 1.0, u)
    # largest and smallest eigenvalue of the outcome-0 effect
    e_hi = params[2]
    e_lo = params[2] * params[3]
    return BlochParam(0.5 * (e_hi + e_lo), e_hi - e_lo, u)


def families_from_params(x: np.ndarray, family: str = "projective") -> tuple[MeasurementFamily, MeasurementFamily]:
    """Decode a flat parameter vector into Alice's and Bob's two-setting families."""
    k = 2 if family == "projective" else 4
    chunks = [x[i * k : (i + 1) * k] for i in range(4)]
    alice = MeasurementFamily.from_bloch([_setting_from(chunks[0], family), _setting_from(chunks[1], family)])
    bob = MeasurementFamily.from_bloch([_setting_from(chunks[2], family), _setting_from(chunks[3], family)])
    return alice, bob


def measurement_bounds(family: str) -> tuple:
    per = [(0.0, np.pi), (0.0, 2 * np.pi)]
    if family == "povm":
        per += [(0.0, 1.0), (0.0, 1.0)]
    elif family != "projective":
        raise ValueError(f"unknown measurement family {family!r}")
    return tuple(per * 4)


def bloch_matrix(rho: DensityMatrix) -> np.ndarray:
    """R_{mn} = tr(rho sigma_m (x) sigma_n) with sigma_0 = I, as a 4x4 real array."""
    form = bloch_decompose(rho)
    r = np.empty((4, 4))
    r[0, 0] = 1.0
    r[0, 1:] = form.b
    r[1:, 0] = form.a
    r[1:, 1:] = form.T
    return r


def fast_box(corr: np.ndarray, x: np.ndarray, family: str = "projective") -> np.ndarray:
    """Born-rule table for qubit settings using the Bloch representation of the state."""
    k = 2 if family == "projective" else 4
    chunks = np.asarray(x, dtype=float).reshape(4, k)
    theta, phi = chunks[:, 0], chunks[:, 1]
    st = np.sin(theta)
    u = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=1)
    if family == "projective":
        g = np.full(4, 0.5)
        h = np.full(4, 0.5)
    else:
        e_hi, e_lo = chunks[:, 2], chunks[:, 2] * chunks[:, 3]
        g, h = 0.5 * (e_hi + e_lo), 0.5 * (e_hi - e_lo)
    # coefficients on (I, sigma) of the two effects of each setting: [setting, a, m]
    vec = np.empty((4, 2, 4))
    vec[:, 0, 0] = g
    vec[:, 1, 0] = 1 - g
    vec[:, 0, 1:] = h[:, None] * u
    vec[:, 1, 1:] = -h[:, None] * u
    p = np.einsum("xam,mn,ybn->xyab", vec[:2], corr, vec[2:])
    return np.clip(p, 0.0, None)


@dataclass
class WitnessReport:
    witness: str
    value: float
    alice: MeasurementFamily
    bob: MeasurementFamily
    params: np.ndarray
    search: dict


def witness_max(
    rho: DensityMatrix,
    witness: str,
    family: str = "projective",
    spec: SearchSpec | None = None,
    *,
    restarts: int = 64,
    seed: int = 0,
    absolute: bool = False,
) -> WitnessReport:
    """Maximise a named box witness over two-setting qubit measurements."""
    if (rho.dimA, rho.dimB) != (2, 2):
        raise ValueError("witness maximisation is defined for two-qubit states")
    if witness not in WITNESSES:
        raise ValueError(f"unknown witness {witness!r}; choose from {sorted(WITNESSES)}")
    fn = WITNESSES[witness]
    bounds = measurement_bounds(family)
    corr = bloch_matrix(rho)
    if spec is None:
        spec = SearchSpec(len(bounds), bounds, restarts=restarts, seed=seed, max_iters=3000, tol=1e-11)

    def objective(x):
        try:
            v = fn(Box.trusted(fast_box(corr, x, family)))
        except ZeroDivisionError:
            return 0.0
        return abs(v) if absolute else v

    res = maximize(objective, spec)
    alice, bob = families_from_params(res.best_point, family)
    value = fn(born_box(rho, alice, bob))
    value = abs(value) if absolute else value
    return WitnessReport(witness, float(value), alice, bob, res.best_point, res.summary())
