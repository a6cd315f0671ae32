import numpy as np
import pytest

from discordnl.boxes import (
    BlochParam,
    Box,
    BoxShapeError,
    MeasurementFamily,
    born_box,
    chsh,
    conditionals,
    covariance,
    covariance_matrix,
    deterministic_box,
    mermin_strength,
    pauli_family,
    pr_box,
    q_determinant,
    q_matrix,
    q_witness,
    random_qubit_family,
    steering_f2,
    uniform_box,
    witnesses,
)
from discordnl.qmath import DensityMatrix, projector
from discordnl.repro import random_sorted_c
from discordnl.rsp import schrodinger_strength_bd
from discordnl.states import (
    KET0,
    KET_PLUS,
    bell_diagonal,
    cq_state,
    giorgi_state,
    maximally_mixed,
    phi_plus,
    product_state,
    qubit_state,
    random_bloch,
    random_cq,
    random_density,
    random_qc,
    random_separable,
    werner,
)

ZX = pauli_family("z", "x")


def _giorgi_settings():
    return MeasurementFamily.from_kets([KET0, KET_PLUS])


def _random_product(rng):
    return product_state(qubit_state(random_bloch(rng)), qubit_state(random_bloch(rng)))


def test_box_validation():
    with pytest.raises(BoxShapeError):
        Box(np.full((2, 2, 2), 0.25))
    with pytest.raises(ValueError):
        Box(np.full((2, 2, 2, 2), 0.3))
    p = np.full((2, 2, 2, 2), 0.25)
    p[0, 0] = [[0.5, 0.0], [0.0, 0.5]]
    p[0, 1] = [[0.5, 0.5], [0.0, 0.0]]
    with pytest.raises(ValueError, match="signalling"):
        Box(p)


def test_povm_parameter_bounds():
    BlochParam(0.5, 1.0, (0, 0, 1))
    with pytest.raises(ValueError):
        BlochParam(0.8, 1.0, (0, 0, 1))
    with pytest.raises(ValueError):
        BlochParam(0.5, 0.5, (0, 0, 2))


def test_random_families_are_valid_povms(rng):
    for _ in range(50):
        fam = random_qubit_family(rng)
        for setting in fam.settings:
            np.testing.assert_allclose(sum(setting), np.eye(2), atol=1e-12)
            assert min(np.linalg.eigvalsh(e)[0] for e in setting) >= -1e-12
        for b in fam.bloch:
            assert 0 <= b.gamma - b.eta / 2 and b.gamma + b.eta / 2 <= 1 + 1e-12


def test_white_noise_box():
    box = born_box(maximally_mixed(2, 2), ZX, pauli_family("x", "-y"))
    np.testing.assert_allclose(box.p, 0.25, atol=1e-15)
    np.testing.assert_allclose(conditionals(box), 0.5, atol=1e-15)
    np.testing.assert_allclose(covariance_matrix(box), 0, atol=1e-15)
    assert chsh(box) == pytest.approx(0, abs=1e-15)
    assert steering_f2(box) == pytest.approx(0, abs=1e-15)


def test_bell_box_correlations():
    box = born_box(phi_plus(), ZX, ZX)
    for x in range(2):
        np.testing.assert_allclose(box.p[x, x], np.diag([0.5, 0.5]), atol=1e-15)
        np.testing.assert_allclose(box.p[x, 1 - x], 0.25, atol=1e-15)
    c = conditionals(box)
    assert c[0, 0, 0, 0] == pytest.approx(1) and c[0, 0, 1, 0] == pytest.approx(0)
    assert covariance(box, 0, 0) == pytest.approx(1)
    np.testing.assert_allclose(q_matrix(box), np.eye(2), atol=1e-15)
    assert q_witness(box) == pytest.approx(1)


def test_product_box_factorizes():
    rho = product_state(projector(KET0), projector(KET_PLUS))
    box = born_box(rho, pauli_family("x", "y"), ZX)
    for x in range(2):
        for y in range(2):
            pa = box.p[x, y].sum(axis=1)
            pb = box.p[x, y].sum(axis=0)
            np.testing.assert_allclose(box.p[x, y], np.outer(pa, pb), atol=1e-15)
    c = conditionals(box)
    np.testing.assert_allclose(c[:, :, 0], c[:, :, 1], atol=1e-15)


def test_born_box_dimension_mismatch():
    with pytest.raises(ValueError):
        born_box(maximally_mixed(2, 3), ZX, ZX)


def test_born_boxes_are_valid_and_no_signalling(rng):
    for _ in range(100):
        rho = random_density(2, 2, rng)
        box = born_box(rho, random_qubit_family(rng), random_qubit_family(rng))
        Box(np.array(box.p))  # re-runs every validity check


def test_q_giorgi_anchor():
    s = _giorgi_settings()
    box = born_box(giorgi_state(), s, s)
    assert abs(q_witness(box) - 0.0381) <= 5e-4
    assert q_determinant(box) < 0


def test_q_vanishes_on_product_states(rng):
    for _ in range(100):
        box = born_box(_random_product(rng), random_qubit_family(rng), random_qubit_family(rng))
        assert q_witness(box) <= 1e-12


def test_q_zero_marginal_raises():
    box = deterministic_box([0, 0], [0, 1])
    with pytest.raises(ZeroDivisionError):
        q_witness(box)
    assert witnesses(box)["Q"] is None


def test_relabelling_flips_q_rows_and_keeps_magnitude(rng):
    for _ in range(30):
        rho = random_density(2, 2, rng)
        box = born_box(rho, random_qubit_family(rng), random_qubit_family(rng))
        m = q_matrix(box)
        flipped = q_matrix(box.relabel(alice_setting=0, bob_setting=1))
        # Alice relabelling negates column x=0, Bob relabelling negates row y=1
        np.testing.assert_allclose(flipped, m * np.array([[-1, 1], [1, -1]]), atol=1e-12)
        np.testing.assert_allclose(abs(np.linalg.det(flipped)), abs(np.linalg.det(m)), atol=1e-12)
        np.testing.assert_allclose(q_witness(box.relabel(bob_setting=0)), q_witness(box), atol=1e-12)


def test_gamma_invariant_under_setting_swaps(rng):
    for _ in range(100):
        box = born_box(random_density(2, 2, rng), random_qubit_family(rng), random_qubit_family(rng))
        g = mermin_strength(box)
        assert mermin_strength(box.swap_settings("A")) == pytest.approx(g, abs=1e-12)
        assert mermin_strength(box.swap_settings("B")) == pytest.approx(g, abs=1e-12)
        assert g >= 0


def test_gamma_bell_diagonal_sigma_x_sigma_y(rng):
    xy = pauli_family("x", "y")
    for _ in range(50):
        c = random_sorted_c(rng)
        box = born_box(bell_diagonal(c), xy, xy)
        assert mermin_strength(box) == pytest.approx(2 * abs(c[1]), abs=1e-9)
        assert mermin_strength(box) == pytest.approx(2 * schrodinger_strength_bd(bell_diagonal(c), 2), abs=1e-9)


def test_cq_covariance_matrix_is_rank_one(rng):
    for _ in range(100):
        rho = random_cq(rng) if rng.random() < 0.5 else random_qc(rng)
        box = born_box(rho, random_qubit_family(rng), random_qubit_family(rng))
        assert abs(np.linalg.det(covariance_matrix(box))) <= 1e-12


def test_cq_state_with_positive_gamma():
    # rank-one covariance does not force every triad to vanish
    rho = cq_state([0.5, 0.5], np.eye(2), [projector(KET0), projector(KET_PLUS)])
    alice = MeasurementFamily.projective([(0, 0, 1), (1, 0, 1)])
    bob = MeasurementFamily.projective([(1, 0, -1), (0, 0, 1)])
    assert mermin_strength(born_box(rho, alice, bob)) == pytest.approx(1 - 1 / np.sqrt(2), abs=1e-12)


def test_gamma_giorgi_box_is_positive():
    s = _giorgi_settings()
    assert mermin_strength(born_box(giorgi_state(), s, s)) == pytest.approx(0.08, abs=1e-12)


def test_chsh_examples():
    assert chsh(born_box(maximally_mixed(2, 2), ZX, ZX)) == pytest.approx(0, abs=1e-15)
    alice = MeasurementFamily.projective([(0, 0, 1), (1, 0, 0)])
    bob = MeasurementFamily.projective([(1, 0, 1), (-1, 0, 1)])
    assert chsh(born_box(phi_plus(), alice, bob)) == pytest.approx(2 * np.sqrt(2), abs=1e-6)
    assert chsh(deterministic_box([0, 0], [0, 0])) == pytest.approx(2)
    assert chsh(pr_box()) == pytest.approx(4)


def test_steering_f2_examples():
    alice, bob = pauli_family("x", "y"), pauli_family("x", "-y")
    for p in (0.2, 0.5, 1 / np.sqrt(2), 0.9):
        assert steering_f2(born_box(werner(p), alice, bob)) == pytest.approx(np.sqrt(2) * p, abs=1e-12)
    assert steering_f2(born_box(phi_plus(), alice, bob)) == pytest.approx(np.sqrt(2), abs=1e-12)
    assert steering_f2(uniform_box()) == 0


def test_witnesses_need_two_by_two_boxes():
    box = uniform_box(3, 2)
    with pytest.raises(BoxShapeError):
        chsh(box)
    with pytest.raises(BoxShapeError):
        q_witness(box)
