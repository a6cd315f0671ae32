import json

import numpy as np
import pytest

from discordnl.boxes import MeasurementFamily, born_box, pr_box, random_qubit_family
from discordnl.channels import discord_creating_phi
from discordnl.io import (
    SchemaError,
    box_from_json,
    box_to_json,
    channel_from_json,
    channel_to_json,
    dumps,
    load,
    measurements_from_json,
    measurements_to_json,
    pure_from_json,
    round_sig,
    state_from_json,
    state_to_json,
)
from discordnl.states import PHI_PLUS, giorgi_state, phi_plus, random_density, trine_qc


def test_round_sig():
    assert round_sig(1 / 3) == 0.333333333333
    assert round_sig({"a": [np.float64(2 / 3), np.int64(4), np.bool_(True)]}) == {"a": [0.666666666667, 4, True]}
    assert round_sig(float("nan")) is None
    assert round_sig(np.array([1e-20, 1.0])) == [1e-20, 1.0]


def test_state_round_trip(rng):
    for rho in (giorgi_state(), trine_qc(), random_density(2, 2, rng)):
        back = state_from_json(json.loads(json.dumps(state_to_json(rho))))
        assert (back.dimA, back.dimB) == (rho.dimA, rho.dimB)
        np.testing.assert_array_equal(back.mat, rho.mat)


def test_state_schema_errors():
    with pytest.raises(SchemaError):
        state_from_json({"re": [[1]]})
    with pytest.raises(SchemaError):
        state_from_json({"dimA": 2, "dimB": 1, "re": [[1, 0], [0, 1]], "im": [[0, 0], [0, 0]]})
    with pytest.raises(SchemaError):
        state_from_json({"dimA": 2, "dimB": 1, "re": [[1, 0], [0, 0]], "im": [[0, 0]]})


def test_pure_state_formats():
    amps = {"re": (PHI_PLUS.amplitudes.real).tolist(), "im": [0, 0, 0, 0]}
    np.testing.assert_allclose(pure_from_json(amps).amplitudes, PHI_PLUS.amplitudes)
    psi = pure_from_json(state_to_json(phi_plus()))
    assert abs(np.vdot(psi.amplitudes, PHI_PLUS.amplitudes)) == pytest.approx(1)
    with pytest.raises(SchemaError):
        pure_from_json(state_to_json(giorgi_state()))
    with pytest.raises(SchemaError):
        pure_from_json({"re": [1, 1], "im": [0, 0]})


def test_box_round_trip_and_errors():
    box = pr_box()
    back = box_from_json(json.loads(json.dumps(box_to_json(box))))
    np.testing.assert_array_equal(back.p, box.p)
    bad = box_to_json(box)
    bad["nx"] = 3
    with pytest.raises(SchemaError):
        box_from_json(bad)
    bad = box_to_json(box)
    bad["p"][0][0][0][0] = 0.9
    with pytest.raises(SchemaError):
        box_from_json(bad)


def test_channel_round_trip():
    ch = channel_from_json(channel_to_json(discord_creating_phi()))
    for k1, k2 in zip(ch.kraus_ops, discord_creating_phi().kraus_ops):
        np.testing.assert_array_equal(k1, k2)
    with pytest.raises(SchemaError):
        channel_from_json([])
    with pytest.raises(SchemaError):
        channel_from_json([{"re": [[1, 0], [0, 0]]}])


def test_measurement_round_trip(rng):
    alice, bob = random_qubit_family(rng), random_qubit_family(rng)
    a2, b2 = measurements_from_json(json.loads(dumps(measurements_to_json(alice, bob))))
    rho = random_density(2, 2, rng)
    np.testing.assert_allclose(born_box(rho, a2, b2).p, born_box(rho, alice, bob).p, atol=1e-11)
    with pytest.raises(SchemaError):
        measurements_from_json({"alice": []})
    with pytest.raises(SchemaError):
        measurements_from_json({"alice": [[{"re": [[1, 0], [0, 1]]}]], "bob": []})


def test_load_rejects_invalid_json(tmp_path):
    f = tmp_path / "bad.json"
    f.write_text("{not json")
    with pytest.raises(SchemaError):
        load(f)
