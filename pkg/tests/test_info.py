import numpy as np
import pytest

from discordnl.info import (
    NotSeparableError,
    classical_correlation,
    classify,
    coherence_rel_entropy,
    correlation_rank,
    discord,
    hermitian_basis,
    mutual_information,
    superseparable,
    swap_parties,
)
from discordnl.qmath import entropy, partial_trace, projector
from discordnl.states import (
    I2,
    KET0,
    KET_PLUS,
    cc_example,
    cc_state,
    cq_state,
    giorgi_state,
    haar_unitary,
    local_coherent_example,
    phi_plus,
    product_state,
    qubit_state,
    random_bloch,
    random_cq,
    random_density,
    random_local_unitary,
    random_qc,
    random_separable,
    trine_qc,
    werner,
)


def _grid_classical_correlation(rho, step_deg=3.0):
    """Brute-force A->B classical correlation over projective qubit measurements."""
    s_b = entropy(partial_trace(rho, "B"))
    best = np.inf
    for theta in np.deg2rad(np.arange(0, 180 + step_deg, step_deg)):
        for phi in np.deg2rad(np.arange(0, 360, step_deg)):
            n = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
            op = n[0] * np.array([[0, 1], [1, 0]]) + n[1] * np.array([[0, -1j], [1j, 0]]) + n[2] * np.diag([1, -1])
            h = 0.0
            for sign in (1, -1):
                e = np.kron((I2 + sign * op) / 2, np.eye(rho.dimB))
                post = (e @ rho.mat @ e).reshape(rho.dimA, rho.dimB, rho.dimA, rho.dimB)
                cond = np.einsum("ijik->jk", post)
                p = np.trace(cond).real
                if p > 1e-14:
                    h += p * entropy(cond / p)
            best = min(best, h)
    return s_b - best


def test_mutual_information_examples(rng):
    assert mutual_information(phi_plus()) == pytest.approx(2, abs=1e-10)
    rho = product_state(qubit_state(random_bloch(rng)), qubit_state(random_bloch(rng)))
    assert mutual_information(rho) == pytest.approx(0, abs=1e-10)
    assert mutual_information(cc_example()) == pytest.approx(1, abs=1e-10)


def test_mutual_information_bounds(rng):
    for _ in range(50):
        rho = random_density(2, 2, rng)
        assert -1e-9 <= mutual_information(rho) <= 2 + 1e-9


def test_classical_correlation_examples(rng):
    rho = product_state(qubit_state(random_bloch(rng)), qubit_state(random_bloch(rng)))
    assert classical_correlation(rho)[0] == pytest.approx(0, abs=1e-9)
    c, choice = classical_correlation(cc_example())
    assert c == pytest.approx(1, abs=1e-9)
    assert abs(abs(choice.bloch.u[2]) - 1) <= 1e-4
    assert classical_correlation(phi_plus())[0] == pytest.approx(1, abs=1e-9)


def test_classical_correlation_beats_grid_oracle(rng):
    for rho in (werner(0.3), giorgi_state(), local_coherent_example(), random_density(2, 2, rng)):
        assert classical_correlation(rho)[0] >= _grid_classical_correlation(rho) - 1e-9


def test_classical_correlation_rejects_large_measured_side():
    from discordnl.states import maximally_mixed

    with pytest.raises(ValueError):
        classical_correlation(maximally_mixed(4, 2))
    with pytest.raises(ValueError):
        classical_correlation(werner(0.2), "sideways")


def test_discord_examples():
    for rho in (cc_example(), cc_state(np.array([[0.1, 0.2], [0.3, 0.4]]), haar_unitary(2, np.random.default_rng(1)))):
        assert abs(discord(rho, "A->B").discord) <= 1e-6
        assert abs(discord(rho, "B->A").discord) <= 1e-6
    assert discord(phi_plus()).discord == pytest.approx(1, abs=1e-9)
    for p in (0.1, 0.5, 0.9):
        assert discord(werner(p)).discord > 1e-4


def test_discord_report_identity(rng):
    for _ in range(20):
        rho = random_density(2, 2, rng)
        for direction in ("A->B", "B->A"):
            rep = discord(rho, direction)
            assert rep.discord == rep.mutual_information - rep.classical_correlation
            assert rep.discord >= -1e-6
            assert rep.classical_correlation >= -1e-9
    assert set(rep.as_dict()) >= {"direction", "mutual_information", "classical_correlation", "discord"}


def test_swap_parties_exchanges_marginals(rng):
    rho = random_density(2, 3, rng)
    sw = swap_parties(rho)
    assert (sw.dimA, sw.dimB) == (3, 2)
    np.testing.assert_allclose(partial_trace(sw, "A").mat, partial_trace(rho, "B").mat, atol=1e-14)


def test_cq_states_have_zero_discord_from_the_classical_side(rng):
    for _ in range(20):
        rho = random_cq(rng)
        assert discord(rho, "A->B").discord <= 1e-6
        rho = random_qc(rng)
        assert discord(rho, "B->A").discord <= 1e-6


def test_qutrit_measured_side():
    rep = discord(trine_qc(), "B->A")
    assert abs(rep.discord) <= 1e-6
    assert discord(trine_qc(), "A->B").discord > 1e-3


def test_coherence_examples():
    assert coherence_rel_entropy(projector(KET0)) == pytest.approx(0, abs=1e-12)
    assert coherence_rel_entropy(projector(KET_PLUS)) == pytest.approx(1, abs=1e-10)
    u = haar_unitary(2, np.random.default_rng(3))
    assert coherence_rel_entropy(I2 / 2, u) == pytest.approx(0, abs=1e-12)
    with pytest.raises(ValueError):
        coherence_rel_entropy(I2 / 2, np.ones((2, 2)))


def test_coherence_zero_iff_diagonal(rng):
    for _ in range(20):
        u = haar_unitary(2, rng)
        diag = u @ np.diag(rng.dirichlet([1, 1])) @ u.conj().T
        assert coherence_rel_entropy(diag, u) <= 1e-8
        rho = random_density(2, 1, rng).mat
        assert coherence_rel_entropy(rho, u) > 1e-8


def test_hermitian_basis_is_orthonormal():
    for d in (2, 3, 4):
        ops = hermitian_basis(d)
        assert len(ops) == d * d
        gram = np.array([[np.trace(a @ b).real for b in ops] for a in ops])
        np.testing.assert_allclose(gram, np.eye(d * d), atol=1e-12)
        for op in ops:
            np.testing.assert_allclose(op, op.conj().T)


def test_correlation_rank_examples(rng):
    assert correlation_rank(giorgi_state()).rank == 3
    rho = product_state(qubit_state(random_bloch(rng)), qubit_state(random_bloch(rng)))
    assert correlation_rank(rho).rank == 1
    for p in (0.1, 0.5, 0.9):
        assert correlation_rank(werner(p)).rank == 4


def test_correlation_rank_conventions():
    trine = correlation_rank(trine_qc())
    assert (trine.rank, trine.traceless_rank) == (3, 2)
    giorgi = correlation_rank(giorgi_state())
    assert (giorgi.rank, giorgi.traceless_rank) == (3, 1)


def test_correlation_rank_reconstruction_and_orthonormality(rng):
    for dims in ((2, 2), (2, 3)):
        rho = random_density(*dims, rng)
        osd = correlation_rank(rho)
        np.testing.assert_allclose(osd.reconstruct(), rho.mat, atol=1e-10)
        for ops in (osd.left_ops, osd.right_ops):
            gram = np.array([[np.trace(a.conj().T @ b) for b in ops] for a in ops])
            np.testing.assert_allclose(gram, np.eye(len(ops)), atol=1e-10)


def test_correlation_rank_local_unitary_invariance(rng):
    for rho in (giorgi_state(), trine_qc(), local_coherent_example(), werner(0.3)):
        for _ in range(5):
            assert correlation_rank(random_local_unitary(rho, rng)).rank == correlation_rank(rho).rank


def test_cq_rank_bounded_by_bob_span(rng):
    for _ in range(50):
        rho = random_cq(rng)
        assert correlation_rank(rho).rank <= 2


def test_superseparable_examples():
    assert superseparable(giorgi_state())
    assert not superseparable(local_coherent_example())
    assert not superseparable(cc_example())
    assert not superseparable(giorgi_state(), convention="traceless")
    with pytest.raises(NotSeparableError):
        superseparable(werner(0.5))


def test_superseparable_states_are_two_way_discordant(rng):
    for _ in range(10):
        rho = random_separable(rng)
        if superseparable(rho):
            assert discord(rho, "A->B").discord > 1e-6
            assert discord(rho, "B->A").discord > 1e-6


def test_classify_examples():
    assert classify(trine_qc()).label == "QC"
    assert classify(werner(0.2)).label == "superseparable"
    assert classify(werner(0.5)).label == "entangled"
    assert classify(cc_example()).label == "CC"
    assert classify(giorgi_state()).label == "superseparable"
    cq = cq_state([0.5, 0.5], np.eye(2), [projector(KET0), projector(KET_PLUS)])
    assert classify(cq).label == "CQ"
    assert classify(local_coherent_example()).label == "locally-creatable"


def test_classify_rejects_unsupported_dimensions():
    from discordnl.states import maximally_mixed

    with pytest.raises(ValueError):
        classify(maximally_mixed(3, 3))
