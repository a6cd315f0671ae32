"""Behaviour boxes p(a,b|x,y), Born-rule generation and box-level witnesses.

Tables are stored as arrays indexed ``p[x, y, a, b]``. Outcome 0 is
valued +1 and outcome 1 is valued -1, so the dichotomic observable of a
setting is ``A_x = M_{0|x} - M_{1|x}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qmath import DensityMatrix, dagger, projector
from .states import I2, bloch_op

BOX_NEG_TOL = 1e-12
BOX_NORM_TOL = 1e-10
NO_SIGNALING_TOL = 1e-9
POVM_TOL = 1e-10


class BoxShapeError(ValueError):
    pass


@dataclass(frozen=True)
class BlochParam:
    """Dichotomic qubit POVM M_{a} = gamma_a I + (-1)^a (eta/2) u.sigma.

    ``gamma`` is the identity weight of the outcome-0 effect.
    """

    gamma: float
    eta: float
    u: tuple[float, float, float]

    def __post_init__(self):
        g, h = self.gamma, self.eta / 2
        for val in (g - h, g + h, 1 - g - h, 1 - g + h):
            if val < -POVM_TOL or val > 1 + POVM_TOL:
                raise ValueError(f"POVM parameters gamma={g}, eta={self.eta} violate 0 <= gamma +- eta/2 <= 1")
        n = float(np.linalg.norm(self.u))
        if abs(n - 1) > 1e-9:
            raise ValueError("direction u must be a unit vector")

    def effects(self) -> list[np.ndarray]:
        op = bloch_op(self.u)
        m0 = self.gamma * I2 + 0.5 * self.eta * op
        return [m0, I2 - m0]


@dataclass(frozen=True, eq=False)
class MeasurementFamily:
    """Per-setting POVMs; ``settings[x][a]`` is the effect for outcome a of setting x."""

    settings: list
    bloch: tuple | None = field(default=None)

    def __post_init__(self):
        settings = [[np.asarray(e, dtype=complex) for e in s] for s in self.settings]
        if not settings:
            raise ValueError("measurement family has no settings")
        dim = settings[0][0].shape[0]
        for x, effects in enumerate(settings):
            total = np.zeros((dim, dim), dtype=complex)
            for e in effects:
                if e.shape != (dim, dim):
                    raise ValueError("effects in a family must share one dimension")
                if np.max(np.abs(e - dagger(e))) > POVM_TOL:
                    raise ValueError(f"effect of setting {x} is not Hermitian")
                if np.linalg.eigvalsh(0.5 * (e + dagger(e)))[0] < -POVM_TOL:
                    raise ValueError(f"effect of setting {x} is not positive")
                total += e
            if np.max(np.abs(total - np.eye(dim))) > POVM_TOL:
                raise ValueError(f"effects of setting {x} do not sum to the identity")
        object.__setattr__(self, "settings", settings)

    @property
    def dim(self) -> int:
        return self.settings[0][0].shape[0]

    @property
    def n_settings(self) -> int:
        return len(self.settings)

    @property
    def n_outcomes(self) -> int:
        return len(self.settings[0])

    def observable(self, x: int) -> np.ndarray:
        """M_{0|x} - M_{1|x} for a dichotomic setting."""
        s = self.settings[x]
        if len(s) != 2:
            raise BoxShapeError("observable is only defined for dichotomic settings")
        return s[0] - s[1]

    @classmethod
    def from_bloch(cls, params: Sequence[BlochParam]) -> "MeasurementFamily":
        return cls([p.effects() for p in params], bloch=tuple(params))

    @classmethod
    def projective(cls, directions) -> "MeasurementFamily":
        """Sharp qubit measurements along unit Bloch vectors (outcome 0 along +u)."""
        params = []
        for u in directions:
            u = np.asarray(u, dtype=float)
            params.append(BlochParam(0.5, 1.0, tuple(u / np.linalg.norm(u))))
        return cls.from_bloch(params)

    @classmethod
    def from_kets(cls, kets) -> "MeasurementFamily":
        """Rank-one projective settings: outcome 0 on the given ket, 1 on its complement."""
        out = []
        for k in kets:
            p0 = projector(np.asarray(k, dtype=complex) / np.linalg.norm(k))
            out.append([p0, np.eye(p0.shape[0]) - p0])
        return cls(out)


def pauli_family(*names: str) -> MeasurementFamily:
    """Projective family from axis labels, e.g. ``pauli_family("x", "-y")``."""
    axes = {"x": (1, 0, 0), "y": (0, 1, 0), "z": (0, 0, 1)}
    dirs = []
    for n in names:
        sign = -1.0 if n.startswith("-") else 1.0
        dirs.append(sign * np.array(axes[n.lstrip("+-").lower()], dtype=float))
    return MeasurementFamily.projective(dirs)


def random_qubit_family(rng: np.random.Generator, n_settings: int = 2, projective: bool = False) -> MeasurementFamily:
    """Random dichotomic qubit settings; unsharp ones draw both effect eigenvalues uniformly."""
    params = []
    for _ in range(n_settings):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        if projective:
            params.append(BlochParam(0.5, 1.0, tuple(u)))
        else:
            e_hi, e_lo = np.sort(rng.random(2))[::-1]
            params.append(BlochParam(0.5 * (e_hi + e_lo), e_hi - e_lo, tuple(u)))
    return MeasurementFamily.from_bloch(params)


def angles_to_direction(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


@dataclass(frozen=True, eq=False)
class Box:
    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 4:
            raise BoxShapeError(f"box table must be 4-d [x][y][a][b], got shape {p.shape}")
        if np.any(p < -BOX_NEG_TOL):
            raise ValueError("box has negative probabilities")
        sums = p.sum(axis=(2, 3))
        if np.max(np.abs(sums - 1)) > BOX_NORM_TOL:
            raise ValueError("box is not normalised for every (x, y)")
        pa = p.sum(axis=3)  # [x,y,a]
        pb = p.sum(axis=2)  # [x,y,b]
        if np.max(np.abs(pa - pa[:, :1, :])) > NO_SIGNALING_TOL or np.max(np.abs(pb - pb[:1, :, :])) > NO_SIGNALING_TOL:
            raise ValueError("box is signalling")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def trusted(cls, p: np.ndarray) -> "Box":
        """Wrap a table known to be valid (e.g. Born-rule output) without re-checking it."""
        box = object.__new__(cls)
        object.__setattr__(box, "p", p)
        return box

    @property
    def shape(self) -> tuple[int, int, int, int]:
        nx, ny, na, nb = self.p.shape
        return nx, ny, na, nb

    @property
    def nx(self) -> int:
        return self.p.shape[0]

    @property
    def ny(self) -> int:
        return self.p.shape[1]

    @property
    def na(self) -> int:
        return self.p.shape[2]

    @property
    def nb(self) -> int:
        return self.p.shape[3]

    def prob(self, a: int, b: int, x: int, y: int) -> float:
        return float(self.p[x, y, a, b])

    def alice_marginal(self, x: int) -> np.ndarray:
        return self.p[x].sum(axis=2).mean(axis=0)

    def bob_marginal(self, y: int) -> np.ndarray:
        return self.p[:, y].sum(axis=1).mean(axis=0)

    def relabel(self, *, alice_setting: int | None = None, bob_setting: int | None = None) -> "Box":
        """Swap the two outcomes of one setting."""
        p = np.array(self.p)
        if alice_setting is not None:
            p[alice_setting] = p[alice_setting][:, ::-1, :]
        if bob_setting is not None:
            p[:, bob_setting] = p[:, bob_setting][:, :, ::-1]
        return Box(p)

    def swap_settings(self, party: str = "A") -> "Box":
        p = self.p[::-1] if party == "A" else self.p[:, ::-1]
        return Box(np.array(p))


def _require_2222(box: Box) -> None:
    if box.shape != (2, 2, 2, 2):
        raise BoxShapeError(f"expected a 2x2x2x2 box, got shape {box.shape}")


def born_box(rho: DensityMatrix, alice: MeasurementFamily, bob: MeasurementFamily) -> Box:
    """p(a,b|x,y) = tr[(M^A_{a|x} (x) M^B_{b|y}) rho]."""
    if alice.dim != rho.dimA or bob.dim != rho.dimB:
        raise ValueError(
            f"measurement dimensions ({alice.dim}, {bob.dim}) do not match state ({rho.dimA}, {rho.dimB})"
        )
    ea = np.array(alice.settings)  # [x, a, i, j]
    eb = np.array(bob.settings)
    t = rho.mat.reshape(rho.dimA, rho.dimB, rho.dimA, rho.dimB)
    # tr[(A (x) B) rho] = sum A_{ji} B_{lk} rho_{ik,jl}
    p = np.einsum("xaji,yblk,ikjl->xyab", ea, eb, t).real
    if p.min() >= -BOX_NEG_TOL:
        p = np.clip(p, 0.0, None)
    return Box(p)


def uniform_box(nx: int = 2, ny: int = 2, na: int = 2, nb: int = 2) -> Box:
    return Box(np.full((nx, ny, na, nb), 1.0 / (na * nb)))


def pr_box() -> Box:
    p = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    if (a ^ b) == (x & y):
                        p[x, y, a, b] = 0.5
    return Box(p)


def deterministic_box(alice_out: Sequence[int], bob_out: Sequence[int], na: int = 2, nb: int = 2) -> Box:
    nx, ny = len(alice_out), len(bob_out)
    p = np.zeros((nx, ny, na, nb))
    for x in range(nx):
        for y in range(ny):
            p[x, y, alice_out[x], bob_out[y]] = 1.0
    return Box(p)


def conditionals(box: Box, tol: float = 1e-12) -> np.ndarray:
    """Bob's outcome distribution given Alice's outcome: ``c[x, y, a, b] = p(b|a; x, y)``."""
    pa = box.p.sum(axis=3, keepdims=True)
    if np.any(pa <= tol):
        raise ZeroDivisionError("cannot condition on an Alice outcome of zero probability")
    return box.p / pa


def q_matrix(box: Box) -> np.ndarray:
    """2x2 matrix of conditional differences, rows indexed by y and columns by x."""
    _require_2222(box)
    c = conditionals(box)
    d = c[:, :, 0, 0] - c[:, :, 1, 0]  # [x, y]
    return d.T


def q_determinant(box: Box) -> float:
    return float(np.linalg.det(q_matrix(box)))


def q_witness(box: Box) -> float:
    """Magnitude of the determinant witness; nonzero rules out d_lambda = 2 models."""
    return abs(q_determinant(box))


def correlator(box: Box, x: int, y: int) -> float:
    p = box.p[x, y]
    return float(p[0, 0] - p[0, 1] - p[1, 0] + p[1, 1])


def _expectations(box: Box, x: int, y: int) -> tuple[float, float, float]:
    p = box.p[x, y]
    ea = float(p[0].sum() - p[1].sum())
    eb = float(p[:, 0].sum() - p[:, 1].sum())
    return correlator(box, x, y), ea, eb


def covariance(box: Box, x: int, y: int) -> float:
    """cov(A_x, B_y) = <A_x B_y> - <A_x><B_y>."""
    if box.na != 2 or box.nb != 2:
        raise BoxShapeError("covariance needs dichotomic outcomes")
    eab, ea, eb = _expectations(box, x, y)
    return eab - ea * eb


def covariance_matrix(box: Box) -> np.ndarray:
    """cov[x, y] for a 2x2x2x2 box."""
    _require_2222(box)
    p = box.p
    sign = np.array([1.0, -1.0])
    eab = np.einsum("xyab,a,b->xy", p, sign, sign)
    ea = np.einsum("xyab,a->xy", p, sign)
    eb = np.einsum("xyab,b->xy", p, sign)
    return eab - ea * eb


def mermin_functions(box: Box) -> np.ndarray:
    c = covariance_matrix(box)
    return np.abs(
        np.array(
            [
                c[0, 0] + c[1, 1],
                c[0, 0] - c[1, 1],
                c[0, 1] + c[1, 0],
                c[0, 1] - c[1, 0],
            ]
        )
    )


def _triad(m0: float, m1: float, m2: float, m3: float) -> float:
    return abs(abs(m0 - m1) - abs(m2 - m3))


def mermin_triads(box: Box) -> np.ndarray:
    m0, m1, m2, m3 = mermin_functions(box)
    return np.array([_triad(m0, m1, m2, m3), _triad(m0, m2, m1, m3), _triad(m0, m3, m1, m2)])


def mermin_strength(box: Box) -> float:
    """Gamma: the smallest of the three covariance Mermin triads."""
    return float(mermin_triads(box).min())


def correlators(box: Box) -> np.ndarray:
    """<A_x B_y> for every setting pair."""
    sign = np.array([1.0, -1.0])
    return np.einsum("xyab,a,b->xy", box.p, sign, sign)


def chsh(box: Box) -> float:
    _require_2222(box)
    e = correlators(box)
    return float(e[0, 0] + e[0, 1] + e[1, 0] - e[1, 1])


def steering_f2(box: Box) -> float:
    """(1/sqrt 2)|<A0 B0> + <A1 B1>|; values above 1 violate the two-setting steering bound."""
    _require_2222(box)
    e = correlators(box)
    return float(abs(e[0, 0] + e[1, 1]) / np.sqrt(2))


def witnesses(box: Box) -> dict:
    """All dichotomic two-setting witnesses as a flat record."""
    out = {
        "Gamma": mermin_strength(box),
        "CHSH": chsh(box),
        "F2": steering_f2(box),
    }
    try:
        out["Q"] = q_witness(box)
    except ZeroDivisionError:
        out["Q"] = None
    return out

