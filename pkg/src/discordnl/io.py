"""JSON encodings for states, pure states, channels, measurements and boxes."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .boxes import Box, MeasurementFamily
from .channels import KrausChannel
from .qmath import DensityMatrix, PureState

SIG_DIGITS = 12


class SchemaError(ValueError):
    pass


def round_sig(obj, digits: int = SIG_DIGITS):
    """Recursively round floats to ``digits`` significant digits."""
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None if math.isnan(x) else ("inf" if x > 0 else "-inf")
        return float(f"{x:.{digits}g}")
    if isinstance(obj, np.ndarray):
        return round_sig(obj.tolist(), digits)
    if isinstance(obj, dict):
        return {str(k): round_sig(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_sig(v, digits) for v in obj]
    return obj


def dumps(obj, pretty: bool = False) -> str:
    return json.dumps(round_sig(obj), indent=2 if pretty else None, sort_keys=False)


def _matrix(entry, name: str) -> np.ndarray:
    try:
        re = np.asarray(entry["re"], dtype=float)
        im = np.asarray(entry.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{name}: expected an object with numeric 're' and 'im' arrays") from exc
    if re.shape != im.shape:
        raise SchemaError(f"{name}: 're' and 'im' shapes differ")
    return re + 1j * im


def matrix_to_json(m: np.ndarray) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def state_to_json(rho: DensityMatrix) -> dict:
    return {"dimA": rho.dimA, "dimB": rho.dimB, **matrix_to_json(rho.mat)}


def state_from_json(obj) -> DensityMatrix:
    if not isinstance(obj, dict) or "dimA" not in obj or "dimB" not in obj:
        raise SchemaError("state JSON needs dimA, dimB, re, im")
    m = _matrix(obj, "state")
    try:
        return DensityMatrix(int(obj["dimA"]), int(obj["dimB"]), m)
    except ValueError as exc:
        raise SchemaError(f"invalid state: {exc}") from exc


def pure_from_json(obj) -> PureState:
    """A pure state given as {re, im} amplitudes, or as a rank-one state JSON."""
    if isinstance(obj, dict) and "dimA" in obj:
        rho = state_from_json(obj)
        lam, vec = np.linalg.eigh(rho.mat)
        if abs(lam[-1] - 1) > 1e-9:
            raise SchemaError("state JSON given for a pure state is not rank one")
        return PureState(rho.dim, vec[:, -1])
    amps = _matrix(obj, "pure state")
    if amps.ndim != 1:
        raise SchemaError("pure state amplitudes must be a vector")
    try:
        return PureState(amps.shape[0], amps)
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


def box_to_json(box: Box) -> dict:
    nx, ny, na, nb = box.shape
    return {"nx": nx, "ny": ny, "na": na, "nb": nb, "p": box.p.tolist()}


def box_from_json(obj) -> Box:
    try:
        p = np.asarray(obj["p"], dtype=float)
        shape = tuple(int(obj[k]) for k in ("nx", "ny", "na", "nb"))
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError("box JSON needs nx, ny, na, nb and p[x][y][a][b]") from exc
    if p.shape != shape:
        raise SchemaError(f"box table has shape {p.shape}, header says {shape}")
    try:
        return Box(p)
    except ValueError as exc:
        raise SchemaError(f"invalid box: {exc}") from exc


def channel_to_json(ch: KrausChannel) -> list:
    return [matrix_to_json(k) for k in ch.kraus_ops]


def channel_from_json(obj) -> KrausChannel:
    if not isinstance(obj, list) or not obj:
        raise SchemaError("channel JSON must be a non-empty list of Kraus matrices")
    try:
        return KrausChannel.from_ops([_matrix(k, "Kraus operator") for k in obj])
    except ValueError as exc:
        raise SchemaError(f"invalid channel: {exc}") from exc


def family_to_json(fam: MeasurementFamily) -> list:
    return [[matrix_to_json(e) for e in setting] for setting in fam.settings]


def family_from_json(obj) -> MeasurementFamily:
    if not isinstance(obj, list) or not obj:
        raise SchemaError("measurement family must be a list of settings, each a list of effects")
    try:
        return MeasurementFamily([[_matrix(e, "effect") for e in setting] for setting in obj])
    except (ValueError, TypeError) as exc:
        raise SchemaError(f"invalid measurements: {exc}") from exc


def measurements_to_json(alice: MeasurementFamily, bob: MeasurementFamily) -> dict:
    return {"alice": family_to_json(alice), "bob": family_to_json(bob)}


def measurements_from_json(obj) -> tuple[MeasurementFamily, MeasurementFamily]:
    if not isinstance(obj, dict) or "alice" not in obj or "bob" not in obj:
        raise SchemaError("measurement file needs 'alice' and 'bob' families")
    return family_from_json(obj["alice"]), family_from_json(obj["bob"])


def load(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
