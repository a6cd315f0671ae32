import numpy as np
import pytest

from discordnl.boxes import MeasurementFamily, born_box, deterministic_box, pauli_family, pr_box, q_witness, random_qubit_family, uniform_box
from discordnl.models import (
    LhvModel,
    deterministic_tables,
    lhv_fit,
    lhvlhs_fit,
    local_polytope_member,
    verdict,
)
from discordnl.qmath import DensityMatrix, partial_trace, projector
from discordnl.states import (
    KET0,
    KET_PLUS,
    giorgi_state,
    local_coherent_example,
    phi_plus,
    product_state,
    qubit_state,
    random_bloch,
    random_density,
    random_separable,
    werner,
)

XY = pauli_family("x", "y")


def _giorgi_box():
    s = MeasurementFamily.from_kets([KET0, KET_PLUS])
    return born_box(giorgi_state(), s, s), s


def _tsirelson_box():
    alice = MeasurementFamily.projective([(0, 0, 1), (1, 0, 0)])
    bob = MeasurementFamily.projective([(1, 0, 1), (-1, 0, 1)])
    return born_box(phi_plus(), alice, bob)


def _check_lhv_model(model: LhvModel):
    assert model.weights.min() >= -1e-10 and abs(model.weights.sum() - 1) <= 1e-10
    np.testing.assert_allclose(model.alice_responses.sum(axis=2), 1, atol=1e-10)
    np.testing.assert_allclose(model.bob_responses.sum(axis=2), 1, atol=1e-10)
    assert model.alice_responses.min() >= -1e-10 and model.bob_responses.min() >= -1e-10


def test_white_noise_fits_with_one_component():
    res = lhv_fit(uniform_box(), 1, budget=4)
    assert res.residual <= 1e-9
    _check_lhv_model(res.model)
    np.testing.assert_allclose(res.model.box_table(), 0.25, atol=1e-9)


def test_locally_created_state_fits_with_two_components(rng):
    for _ in range(3):
        alice, bob = random_qubit_family(rng, projective=True), random_qubit_family(rng, projective=True)
        res = lhv_fit(born_box(local_coherent_example(), alice, bob), 2, budget=16)
        assert res.representable
        assert res.residual <= 1e-6


def test_giorgi_has_no_two_component_lhv_model():
    box, _ = _giorgi_box()
    res = lhv_fit(box, 2, budget=16)
    assert res.residual > 1e-3
    assert lhv_fit(box, 3, budget=16).residual <= 1e-6


def test_product_state_lhs_fit_recovers_bob_state(rng):
    rho_a, rho_b = qubit_state(random_bloch(rng)), qubit_state(random_bloch(rng))
    rho = product_state(rho_a, rho_b)
    alice, bob = random_qubit_family(rng), random_qubit_family(rng)
    res = lhvlhs_fit(born_box(rho, alice, bob), 1, bob, partial_trace(rho, "B"), budget=4)
    assert res.residual <= 1e-9
    np.testing.assert_allclose(res.model.bob_hidden_states[0].mat, rho_b, atol=1e-6)


def test_two_term_separable_state_lhs_fit(rng):
    w = 0.35
    terms = [(qubit_state(random_bloch(rng)), qubit_state(random_bloch(rng))) for _ in range(2)]
    mat = w * np.kron(*terms[0]) + (1 - w) * np.kron(*terms[1])
    rho = DensityMatrix(2, 2, mat)
    alice, bob = random_qubit_family(rng), random_qubit_family(rng)
    res = lhvlhs_fit(born_box(rho, alice, bob), 2, bob, partial_trace(rho, "B"), budget=16)
    assert res.residual <= 1e-6
    assert res.model.lhs_residual <= 1e-6
    for s in res.model.bob_hidden_states:
        assert np.linalg.eigvalsh(s.mat)[0] >= -1e-9


def test_giorgi_has_no_two_component_lhs_model():
    box, s = _giorgi_box()
    res = lhvlhs_fit(box, 2, s, partial_trace(giorgi_state(), "B"), budget=16)
    assert res.residual > 1e-3


def test_fit_residual_monotone_in_dimension(rng):
    for _ in range(3):
        box = born_box(random_density(2, 2, rng), random_qubit_family(rng), random_qubit_family(rng))
        residuals = [lhv_fit(box, d, budget=8, seed=3).residual for d in (1, 2, 3, 4)]
        assert all(b <= a + 1e-12 for a, b in zip(residuals, residuals[1:]))


def test_separable_boxes_fit_with_four_components(rng):
    for _ in range(5):
        rho = random_separable(rng, terms=4)
        box = born_box(rho, random_qubit_family(rng), random_qubit_family(rng))
        assert lhv_fit(box, 4, budget=16).residual <= 1e-6


def test_fit_is_deterministic(rng):
    box = born_box(random_density(2, 2, rng), random_qubit_family(rng), random_qubit_family(rng))
    a = lhv_fit(box, 2, budget=6, seed=9)
    b = lhv_fit(box, 2, budget=6, seed=9)
    assert a.residual == b.residual
    np.testing.assert_array_equal(a.model.weights, b.model.weights)
    np.testing.assert_array_equal(a.model.alice_responses, b.model.alice_responses)


def test_q_witness_consistent_with_two_component_fit():
    box, _ = _giorgi_box()
    cases = [box] + [born_box(werner(p), XY, XY) for p in (0.3, 0.6)]
    for b in cases:
        if q_witness(b) > 1e-3:
            assert lhv_fit(b, 2, budget=16).residual > 1e-4


def test_fit_input_errors():
    with pytest.raises(ValueError):
        lhv_fit(uniform_box(), 0)
    with pytest.raises(ValueError):
        lhv_fit(uniform_box(3, 2), 2)


def test_polytope_examples():
    assert deterministic_tables().shape == (16, 2, 2, 2, 2)
    assert local_polytope_member(uniform_box()) == (True, pytest.approx(0, abs=1e-9))
    member, dist = local_polytope_member(pr_box())
    assert not member and dist > 0.1
    member, dist = local_polytope_member(_tsirelson_box())
    assert not member and dist > 1e-3
    assert local_polytope_member(deterministic_box([0, 1], [1, 1]))[0]


def test_polytope_contains_separable_boxes(rng):
    for _ in range(20):
        box = born_box(random_separable(rng), random_qubit_family(rng), random_qubit_family(rng))
        assert local_polytope_member(box)[0]


def test_verdict_werner():
    v = verdict(werner(0.5), XY, XY, budget=8)
    assert v.bell_local and v.unsteerable
    assert v.superlocal and v.superunsteerable
    assert v.witnesses["Gamma"] == pytest.approx(1.0, abs=1e-12)
    assert v.witnesses["Q"] == pytest.approx(0.25, abs=1e-12)


def test_verdict_product_state(rng):
    rho = product_state(qubit_state(random_bloch(rng)), qubit_state(random_bloch(rng)))
    v = verdict(rho, XY, XY, budget=4)
    assert v.bell_local and v.unsteerable
    assert not v.superlocal and not v.superunsteerable
    assert v.witnesses["Q"] <= 1e-12


def test_verdict_giorgi():
    _, s = _giorgi_box()
    v = verdict(giorgi_state(), s, s, budget=8)
    assert v.superunsteerable and v.superlocal
    assert v.lhvlhs_residual_d2 > 1e-3
    assert v.witnesses["Gamma"] == pytest.approx(0.08, abs=1e-12)


def test_verdict_steerable_werner():
    alice, bob = pauli_family("x", "y"), pauli_family("x", "-y")
    v = verdict(werner(0.9), alice, bob, budget=0)
    assert v.steering_certified and not v.unsteerable and not v.superunsteerable
