import numpy as np
import pytest
from hypothesis import given, strategies as st

from maskforge import zoo
from maskforge.conjecture import (
    CandidateBasis,
    RecipeFailure,
    diagonal,
    disk_deviation,
    family_state,
    find_violation,
    fourier_local_basis,
)
from maskforge.masker import apply
from maskforge.numkernel import adjoint
from maskforge.states import haar_random_unitary


def test_candidate_basis_validation():
    with pytest.raises(ValueError, match="orthonormal"):
        CandidateBasis(2, 2 * np.eye(4))
    with pytest.raises(ValueError, match="shape"):
        CandidateBasis(2, np.eye(3))


def test_fourier_examples():
    f = fourier_local_basis(np.eye(2))
    s = 1 / np.sqrt(2)
    np.testing.assert_allclose(f, [[s, s], [s, -s]], atol=1e-12)
    ff = fourier_local_basis(f)
    # DFT^2 is the parity permutation k -> -k
    np.testing.assert_allclose(np.abs(ff), np.eye(2), atol=1e-12)
    ff3 = fourier_local_basis(fourier_local_basis(np.eye(3)))
    np.testing.assert_allclose(np.abs(ff3), np.eye(3)[:, [0, 2, 1]], atol=1e-12)
    u = haar_random_unitary(5, 0)
    g = fourier_local_basis(u)
    assert np.max(np.abs(adjoint(g) @ g - np.eye(5))) < 1e-10
    with pytest.raises(ValueError):
        fourier_local_basis(2 * np.eye(2))
    with pytest.raises(ValueError):
        fourier_local_basis(np.eye(2), 3)


def test_family_state_marginals():
    u, v = haar_random_unitary(3, 1), haar_random_unitary(3, 2)
    psi = family_state(u, v, [0.1, 0.7, 2.0]).reshape(3, 3)
    np.testing.assert_allclose(psi @ psi.conj().T, np.eye(3) / 3, atol=1e-12)


def test_disk_deviation_examples():
    basis = CandidateBasis.computational(2)
    assert disk_deviation(basis, np.eye(2), np.eye(2)) == pytest.approx(0, abs=1e-12)
    f = fourier_local_basis(np.eye(2))
    assert disk_deviation(basis, f, f) == pytest.approx(0.5, abs=1e-9)


@pytest.mark.parametrize("d", [2, 3])
def test_disk_deviation_zero_on_own_family(d):
    la, lb = haar_random_unitary(d, 10), haar_random_unitary(d, 11)
    basis = CandidateBasis(d, np.kron(la, lb))
    assert disk_deviation(basis, la, lb) == pytest.approx(0, abs=1e-12)


def test_bell_basis_computational_family():
    # (|00> + e^{i theta}|11>)/sqrt2 sweeps Phi+ overlap from 1 to 0
    assert disk_deviation(CandidateBasis.bell(), np.eye(2), np.eye(2)) == pytest.approx(1.0, abs=1e-9)


@given(st.integers(0, 10_000))
def test_disk_deviation_global_phase_invariance(seed):
    rng = np.random.default_rng(seed)
    basis = CandidateBasis.haar(2, rng)
    rephased = CandidateBasis(2, basis.vectors * np.exp(1j * rng.uniform(0, 2 * np.pi, 4)))
    la, lb = haar_random_unitary(2, rng), haar_random_unitary(2, rng)
    a = disk_deviation(basis, la, lb, refine=False)
    b = disk_deviation(rephased, la, lb, refine=False)
    assert abs(a - b) < 1e-12


def test_analytic_product_witness_d2():
    w = find_violation(CandidateBasis.computational(2))
    assert w.branch == "fourier"
    assert w.diagonal_gap == pytest.approx(0.5, abs=1e-9)
    rel = (w.phases1[1] - w.phases1[0]) - (w.phases2[1] - w.phases2[0])
    assert abs(abs(np.angle(np.exp(1j * rel))) - np.pi) < 1e-6
    assert w.marginal_deviation() < 1e-10


def test_bell_basis_uses_schmidt_branch():
    w = find_violation(CandidateBasis.bell())
    assert w.branch == "schmidt"
    assert w.diagonal_gap >= 0.25


def test_product_basis_d3():
    w = find_violation(CandidateBasis.computational(3))
    assert w.diagonal_gap >= 0.05
    assert w.marginal_deviation() < 1e-10


@pytest.mark.parametrize("d,seeds", [(2, range(10)), (3, range(5))])
def test_haar_bases_falsified(d, seeds):
    for seed in seeds:
        basis = CandidateBasis.haar(d, seed)
        w = find_violation(basis)
        assert w.diagonal_gap >= 0.05
        assert w.marginal_deviation() < 1e-10
        gap = np.max(np.abs(diagonal(basis, w.state1.vector) - diagonal(basis, w.state2.vector)))
        assert gap == pytest.approx(w.diagonal_gap, abs=1e-12)


def test_witness_states_masked_by_distribution_masker():
    d = 2
    w = find_violation(CandidateBasis.haar(d, 3))
    m = zoo.build_distribution_masker(d)
    outs = [apply(m, s.density()) for s in (w.state1, w.state2)]
    for side in ("A", "B"):
        np.testing.assert_allclose(outs[0].reduce([side]).matrix, np.eye(d) / d, atol=1e-10)
        np.testing.assert_allclose(outs[1].reduce([side]).matrix, np.eye(d) / d, atol=1e-10)


def test_recipe_failure_reports_best():
    with pytest.raises(RecipeFailure) as err:
        find_violation(CandidateBasis.computational(2), threshold=0.9)
    assert err.value.best.diagonal_gap == pytest.approx(0.5, abs=1e-9)


def test_witness_json():
    w = find_violation(CandidateBasis.computational(2))
    obj = w.to_json()
    assert obj["branch"] == "fourier" and obj["state1"]["dims"] == [2, 2]
