import numpy as np
import pytest
from scipy.optimize import minimize
from hypothesis import given, strategies as st

from maskforge import zoo
from maskforge.bounds import flow_profile, min_subset_entropy, theorem1_bound, theorem3_bound, unevenness_I1
from maskforge.capacity import (
    ChannelOp,
    cea_capacity,
    channel_from_isometry,
    embedding_channel,
    erasure_capacity,
    identity_channel,
    masker_channel,
    mutual_information_objective,
    random_channel,
    replacement_channel,
    robust_bounds,
    sampled_capacity,
    theorem2_check,
)
from maskforge.masker import apply_operator, decompose_embeddings
from maskforge.numkernel import partial_trace
from maskforge.states import haar_random_unitary, random_pure_state

from conftest import random_density

LOG3 = np.log2(3)


def test_channel_validation():
    with pytest.raises(ValueError, match="shape"):
        ChannelOp(np.eye(4), 4, 2, 3)
    with pytest.raises(ValueError, match="isometry"):
        ChannelOp(2 * np.eye(4), 4, 2, 2)


def test_channel_apply_matches_partial_trace():
    rng = np.random.default_rng(0)
    ch = random_channel(3, 2, 4, 1)
    rho = random_density(3, rng)
    big = ch.V @ rho @ ch.V.conj().T
    np.testing.assert_allclose(ch.apply(rho), partial_trace(big, (2, 4), [1]), atol=1e-12)
    np.testing.assert_allclose(ch.complement(rho), partial_trace(big, (2, 4), [0]), atol=1e-12)
    x = random_density(2, rng)
    # <X, N(rho)> = <N^dagger(X), rho>
    lhs = np.trace(x @ ch.apply(rho))
    rhs = np.trace(ch.adjoint_apply(x) @ rho)
    assert abs(lhs - rhs) < 1e-12


def test_compression_preserves_channel():
    assert replacement_channel(3).compressed().denv == 3
    ch = identity_channel(2)
    assert ch.compressed() is ch
    big = random_channel(2, 2, 2, 3)
    t = np.concatenate([big.V.reshape(2, 2, 2), np.zeros((2, 3, 2))], axis=1)
    padded = ChannelOp(t.reshape(-1, 2), 2, 2, 5)
    small = padded.compressed()
    assert small.denv == 2
    np.testing.assert_allclose(small.choi(), big.choi(), atol=1e-10)


def test_channel_from_isometry_sides(odd3_embeddings):
    e = odd3_embeddings[0]
    rho = random_density(3, np.random.default_rng(2))
    out = e.isometry @ rho @ e.isometry.conj().T
    a = channel_from_isometry(e.isometry, 6, 6, 0).apply(rho)
    b = channel_from_isometry(e.isometry, 6, 6, 1).apply(rho)
    np.testing.assert_allclose(a, partial_trace(out, (6, 6), [1]), atol=1e-12)
    np.testing.assert_allclose(b, partial_trace(out, (6, 6), [0]), atol=1e-12)
    with pytest.raises(ValueError):
        embedding_channel(e, "C")


def test_identity_capacity():
    res = cea_capacity(identity_channel(2))
    assert res.value == pytest.approx(2.0, abs=1e-9)
    np.testing.assert_allclose(res.rho.matrix, np.eye(2) / 2, atol=1e-9)
    assert res.converged


def test_erasure_capacity_zero():
    assert cea_capacity(replacement_channel(3)).value == pytest.approx(0, abs=1e-9)


def test_unitary_channel():
    u = haar_random_unitary(2, 5)
    res = cea_capacity(ChannelOp(u, 2, 2, 1))
    assert res.value == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_solver_value_reproduced_at_optimizer(seed):
    ch = random_channel(3, 3, 2, seed)
    res = cea_capacity(ch)
    assert abs(mutual_information_objective(ch, res.rho.matrix) - res.value) < 1e-8
    assert 0 <= res.value <= 2 * np.log2(3) + 1e-9
    # monotone ascent
    assert np.all(np.diff(res.history) >= -1e-10)
    assert res.residual < 1e-2


@pytest.mark.parametrize("seed", range(3))
def test_solver_vs_sampled_oracle(seed):
    ch = random_channel(2, 2, 2, 100 + seed)
    cap = cea_capacity(ch, tol=1e-9).value
    sample = sampled_capacity(ch, 5000, seed)
    assert cap >= sample - 1e-3
    assert cap - sample < 1e-2


def _bfgs_capacity(ch, restarts=4):
    """Maximize the objective over rho = T T^dagger / tr with generic BFGS."""
    d = ch.din
    rng = np.random.default_rng(0)

    def neg(x):
        t = (x[: d * d] + 1j * x[d * d:]).reshape(d, d)
        rho = t @ t.conj().T
        return -mutual_information_objective(ch, rho / np.trace(rho).real)

    return max(-minimize(neg, rng.normal(size=2 * d * d), method="BFGS",
                         options={"gtol": 1e-10}).fun for _ in range(restarts))


@pytest.mark.parametrize("dims,seed", [((3, 2, 2), 0), ((3, 3, 3), 1), ((2, 3, 2), 2)])
def test_solver_vs_bfgs_oracle(dims, seed):
    ch = random_channel(*dims, seed)
    assert cea_capacity(ch, tol=1e-12).value == pytest.approx(_bfgs_capacity(ch), abs=1e-6)


def test_iteration_cap_flags_nonconvergence():
    res = cea_capacity(random_channel(3, 2, 3, 1), tol=0.0, max_iter=3)
    assert not res.converged and res.iterations == 3


@pytest.mark.parametrize("name,d", [("qotp", 2), ("odd_d", 3)])
def test_exact_maskers_are_erasures(name, d):
    m = zoo.build(name, d)
    for side in ("A", "B"):
        assert erasure_capacity(m, side) < 1e-6


def test_masker_channel_matches_masker(odd3):
    rho = random_density(3, np.random.default_rng(3))
    out = apply_operator(odd3, rho)
    for side, traced in (("A", [1]), ("B", [0])):
        np.testing.assert_allclose(
            masker_channel(odd3, side).apply(rho), partial_trace(out, (6, 6), traced), atol=1e-12
        )


def test_perturbed_qotp_erasure_positive():
    m = zoo.perturb(zoo.build_qotp(2), 0.05, seed=0)
    e = erasure_capacity(m, "A")
    assert 0 < e < 0.3


def test_theorem2_qotp2():
    rows = theorem2_check(zoo.build_qotp(2))
    assert len(rows) == 8 and all(r.ok for r in rows)
    side_a = [r for r in rows if r.side == "A"]
    assert all(r.saturated for r in side_a)
    assert all(r.capacity == pytest.approx(2.0, abs=1e-3) for r in side_a)


def test_theorem2_odd3_examples(odd3):
    rows = theorem2_check(odd3, sides=("A",))
    assert len(rows) == 8 and all(r.ok for r in rows)
    even = [r for r in rows if r.p == pytest.approx(0.25)]
    uneven = [r for r in rows if r.p == pytest.approx(1 / 12)]
    assert len(even) == 2 and len(uneven) == 6
    for r in even:
        assert r.capacity == pytest.approx(LOG3, abs=1e-3)
        assert r.bound == pytest.approx(2.0)
    # three land on A with full capacity, three on B leaving A a constant flag
    caps = sorted(r.capacity for r in uneven)
    np.testing.assert_allclose(caps[:3], 0.0, atol=1e-6)
    np.testing.assert_allclose(caps[3:], 2 * LOG3, atol=1e-3)
    assert uneven[0].bound == pytest.approx(np.log2(12))


@pytest.mark.parametrize("name,d", [("qotp", 2), ("qotp", 3), ("coinflip", 2), ("odd_d", 3)])
def test_per_embedding_flow_below_surprisal(name, d):
    embs = decompose_embeddings(zoo.build(name, d))
    for seed in range(5):
        gamma = random_pure_state((d, d), ("R", "I"), seed)
        prof = flow_profile(embs, gamma)
        assert np.all(prof.I <= -np.log2(prof.p) + 1e-6)


def test_robust_bounds_e0_identity(odd3_embeddings):
    prof = flow_profile(odd3_embeddings)
    rb = robust_bounds(prof, 0.0)
    assert rb.theorem1 == theorem1_bound(prof)
    assert rb.theorem3 == pytest.approx(theorem3_bound(prof), abs=1e-12)
    assert rb.I1 == unevenness_I1(odd3_embeddings).value
    with pytest.raises(ValueError):
        robust_bounds(prof, -0.1)


def test_robust_bounds_qotp_half_bit(qotp2):
    prof = flow_profile(decompose_embeddings(qotp2))
    rb = robust_bounds(prof, 0.5)
    w = 2 ** -1.5
    assert rb.I1 == pytest.approx(3 * w * 1.5, abs=1e-9)
    assert rb.I1 < unevenness_I1(decompose_embeddings(qotp2)).value
    assert rb.I1 == pytest.approx(min_subset_entropy(prof.I - 0.5).value, abs=1e-12)


def test_robust_bounds_collapse(odd3_embeddings):
    prof = flow_profile(odd3_embeddings)
    rb = robust_bounds(prof, 10.0)
    assert rb.theorem1 == 0 and rb.min_embedding == 0 and rb.I1 == 0
    assert rb.theorem3 == pytest.approx(LOG3)


@given(st.integers(0, 10_000))
def test_objective_bounded(seed):
    ch = random_channel(2, 2, 3, seed)
    rho = random_density(2, np.random.default_rng(seed))
    val = mutual_information_objective(ch, rho)
    assert -1e-9 <= val <= 2 + 1e-9
