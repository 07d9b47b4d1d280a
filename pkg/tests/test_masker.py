import numpy as np
import pytest
from hypothesis import given, strategies as st

from maskforge import zoo
from maskforge.masker import (
    BipartiteEmbedding,
    Masker,
    NotUniversalError,
    apply,
    apply_operator,
    check_fact1,
    decompose_embeddings,
    global_share_state,
    randomness_cost,
    verify_orthogonal_images,
    verify_threshold_shares,
    verify_universal,
)
from maskforge.numkernel import adjoint, partial_trace
from maskforge.states import DensityMatrix, haar_random_isometry, random_pure_state

from conftest import random_density


def trivial_state():
    return DensityMatrix(np.ones((1, 1), dtype=complex), (1,), ("S",))


def test_masker_validation():
    with pytest.raises(ValueError, match="smaller"):
        Masker(np.eye(2, 4), trivial_state(), 4, 1, 2, 1)
    with pytest.raises(ValueError, match="isometry"):
        Masker(2 * np.eye(4), trivial_state(), 4, 1, 2, 2)
    with pytest.raises(ValueError, match="shape"):
        Masker(np.eye(4), trivial_state(), 2, 1, 2, 2)


def test_apply_qotp_outputs_maximally_mixed_a(qotp2):
    rng = np.random.default_rng(3)
    for _ in range(5):
        out = apply(qotp2, random_density(2, rng))
        assert abs(np.trace(out.matrix) - 1) < 1e-12
        np.testing.assert_allclose(out.reduce(["A"]).matrix, np.eye(2) / 2, atol=1e-12)
        np.testing.assert_allclose(out.reduce(["B"]).matrix, np.eye(4) / 4, atol=1e-12)


def test_apply_operator_rejects_wrong_shape(qotp2):
    with pytest.raises(ValueError):
        apply_operator(qotp2, np.eye(3))


def test_decomposition_reproduces_channel(odd3):
    embs = decompose_embeddings(odd3)
    assert len(embs) == 8
    assert sum(e.probability for e in embs) == pytest.approx(1, abs=1e-12)
    rho = random_density(3, np.random.default_rng(0))
    mixed = sum(e.probability * e.isometry @ rho @ adjoint(e.isometry) for e in embs)
    assert np.max(np.abs(mixed - apply_operator(odd3, rho))) < 1e-12
    assert all(e.is_isometry() for e in embs)
    assert verify_orthogonal_images(embs)


def test_orthogonal_images_detects_overlap():
    iso = np.eye(4, 2)
    e = BipartiteEmbedding(iso, 0.5, 2, 2)
    assert not verify_orthogonal_images([e, e])


@pytest.mark.parametrize("d", [2, 3])
def test_qotp_universal_and_cost(d):
    m = zoo.build_qotp(d)
    rep = verify_universal(m)
    assert rep.is_universal and rep.marginal_deviation < 1e-12
    assert randomness_cost(m) == pytest.approx(2 * np.log2(d), abs=1e-9)
    assert rep.embedding_count == d * d
    assert check_fact1(m)


def test_fact1_raises_for_non_universal():
    with pytest.raises(NotUniversalError):
        check_fact1(zoo.build_identity(2))


@pytest.mark.parametrize("dI,dA,dB", [(2, 2, 2), (2, 2, 3), (3, 3, 3), (2, 4, 2)])
def test_no_masking_without_randomness(dI, dA, dB):
    for seed in range(10):
        iso = haar_random_isometry(dI, dA * dB, seed)
        m = Masker(iso, trivial_state(), dI, 1, dA, dB)
        assert verify_universal(m).marginal_deviation >= 0.1


def test_no_hiding_for_distribution_masker():
    for d in (2, 3):
        rep = verify_universal(zoo.build_distribution_masker(d))
        assert not rep.is_universal and rep.marginal_deviation >= 0.1


def test_universality_detects_by_linearity():
    # matrix-unit check agrees with direct evaluation on random inputs
    rng = np.random.default_rng(5)
    rep = verify_universal(zoo.build_identity(3))
    worst = 0.0
    m = zoo.build_identity(3)
    for _ in range(50):
        a = apply(m, random_density(3, rng)).reduce(["A"]).matrix
        worst = max(worst, float(np.max(np.abs(a - rep.sigmaA.matrix))))
    assert worst <= rep.marginal_deviation + 1e-12


def test_threshold_shares_qotp2(qotp2):
    rep = verify_threshold_shares(qotp2)
    assert rep.secure
    assert max(rep.I_RA, rep.I_RB, rep.I_RK) < 1e-9
    assert rep.I_RAK == pytest.approx(2.0, abs=1e-9)
    assert rep.I_RBK == pytest.approx(2.0, abs=1e-9)


def test_threshold_shares_non_universal_not_secure():
    rep = verify_threshold_shares(zoo.build_identity(2))
    assert not rep.universal and not rep.secure
    assert rep.I_RA == pytest.approx(2.0, abs=1e-9)


def test_global_share_state_marginals(odd3):
    psi = global_share_state(odd3)
    np.testing.assert_allclose(psi.reduce(["R"]).matrix, np.eye(3) / 3, atol=1e-12)
    assert abs(np.linalg.norm(psi.vector) - 1) < 1e-12


@given(st.integers(0, 10_000))
def test_masker_output_is_a_state(seed):
    m = zoo.build_odd_d(3)
    rho = random_pure_state((3,), ("I",), seed).density()
    out = apply(m, rho).matrix
    assert np.max(np.abs(out - adjoint(out))) < 1e-12
    assert abs(np.trace(out) - 1) < 1e-12
    a = partial_trace(out, (6, 6), [1])
    assert np.max(np.abs(a - verify_universal(m).sigmaA.matrix)) < 1e-10


def test_json_roundtrip(tmp_path, odd3):
    path = tmp_path / "m.json"
    odd3.save(path)
    back = Masker.load(path)
    np.testing.assert_array_equal(back.isometry, odd3.isometry)
    np.testing.assert_array_equal(back.safe_state.matrix, odd3.safe_state.matrix)
    assert (back.dI, back.dS, back.dA, back.dB) == (3, 8, 6, 6)
