import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qjl.circuits import GateCircuit, generate_local_random_circuit
from qjl.designs import (
    FiniteDesign,
    balanced_monomials,
    design_moment_superoperator,
    estimate_tpe_lambda,
    haar_moment_superoperator,
    haar_moment_superoperator_mc,
    haar_monomial_expectation,
    iterate_design,
    monomial_design_error,
    pauli_group,
    single_qubit_clifford_group,
)
from qjl.sampling import RngStream, sample_haar_unitaries

PAULI = FiniteDesign.from_unitaries(pauli_group())
CLIFFORD = FiniteDesign.from_unitaries(single_qubit_clifford_group())


def test_clifford_group_has_24_distinct_elements_and_is_closed():
    g = single_qubit_clifford_group()
    assert len(g) == 24

    def same_up_to_phase(a, b):
        return abs(abs(np.vdot(a, b)) - 2) < 1e-9

    for a in g[:6]:
        for b in g:
            assert any(same_up_to_phase(a @ b, c) for c in g)


def test_twirl_applies_conjugation_average():
    rng = np.random.default_rng(0)
    m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    expected = sum(u @ m @ u.conj().T for u in pauli_group()) / 4
    np.testing.assert_allclose(design_moment_superoperator(PAULI, 1).apply(m), expected, atol=1e-12)


@pytest.mark.parametrize("d,t", [(2, 1), (3, 1), (2, 2), (3, 2)])
def test_exact_haar_twirl_is_an_orthogonal_projector(d, t):
    p = haar_moment_superoperator(d, t).matrix
    np.testing.assert_allclose(p @ p, p, atol=1e-10)
    np.testing.assert_allclose(p, p.conj().T, atol=1e-10)
    assert np.trace(p).real == pytest.approx(2 if t == 2 else 1)


def test_first_moment_twirl_is_trace_map():
    m = np.array([[1, 2], [3, 5j]])
    out = haar_moment_superoperator(2, 1).apply(m)
    np.testing.assert_allclose(out, np.trace(m) / 2 * np.eye(2), atol=1e-12)


@pytest.mark.parametrize("t", [1, 2])
def test_exact_twirl_matches_monte_carlo(t):
    mc, se = haar_moment_superoperator_mc(2, t, 40000, RngStream(t))
    exact = haar_moment_superoperator(2, t).matrix
    z = np.abs(mc.matrix - exact) / np.maximum(se, 1e-12)
    assert z.max() < 6


def test_known_lambdas():
    assert estimate_tpe_lambda(PAULI, 1) <= 1e-9
    assert estimate_tpe_lambda(CLIFFORD, 2) <= 1e-9
    assert estimate_tpe_lambda(PAULI, 2) == pytest.approx(1.0)
    assert estimate_tpe_lambda(FiniteDesign.from_unitaries(np.eye(2)), 1) == pytest.approx(1.0)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2**32))
def test_iteration_squares_lambda(size, seed):
    d = FiniteDesign.from_unitaries(sample_haar_unitaries(size, 2, RngStream(seed)))
    lam = estimate_tpe_lambda(d, 1)
    assert estimate_tpe_lambda(iterate_design(d, 2), 1) <= lam**2 + 1e-8


def test_iteration_members_and_guard():
    d = FiniteDesign.from_unitaries(pauli_group())
    sq = iterate_design(d, 2)
    assert sq.cardinality == 16
    np.testing.assert_allclose(sq.unitaries[1 * 4 + 2], pauli_group()[1] @ pauli_group()[2])
    with pytest.raises(ValueError):
        iterate_design(d, 8)


def test_circuit_design_iteration_concatenates():
    base = FiniteDesign(dim=8, circuit_sampler=lambda s: generate_local_random_circuit(3, 5, s))
    c = iterate_design(base, 3).sample(RngStream(1))
    assert isinstance(c, GateCircuit)
    assert c.size == 15


def test_design_validation():
    with pytest.raises(ValueError):
        FiniteDesign(dim=2)
    with pytest.raises(ValueError):
        FiniteDesign.from_unitaries(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        haar_moment_superoperator(2, 3)
    with pytest.raises(ValueError):
        haar_moment_superoperator(32, 2)


def test_haar_monomials_closed_forms():
    d = 3
    assert haar_monomial_expectation(d, [(1, 1)], [(1, 1)]) == pytest.approx(1 / d)
    assert haar_monomial_expectation(d, [(1, 1)], [(2, 1)]) == 0
    assert haar_monomial_expectation(d, [(1, 1), (1, 1)], [(1, 1), (1, 1)]) == pytest.approx(2 / (d * (d + 1)))
    assert haar_monomial_expectation(d, [(1, 1), (2, 2)], [(1, 1), (2, 2)]) == pytest.approx(1 / (d * d - 1))
    assert haar_monomial_expectation(d, [(1, 1), (2, 2)], [(1, 2), (2, 1)]) == pytest.approx(-1 / (d * (d * d - 1)))


def test_weingarten_matches_monte_carlo():
    u = sample_haar_unitaries(200000, 3, RngStream(2))
    mono = ([(1, 1), (2, 2)], [(1, 2), (2, 1)])
    vals = u[:, 0, 0] * u[:, 1, 1] * np.conj(u[:, 0, 1] * u[:, 1, 0])
    se = vals.real.std() / np.sqrt(len(vals))
    assert abs(vals.mean().real - haar_monomial_expectation(3, *mono)) < 5 * se


def test_pauli_monomials_and_identity_gap():
    monos = list(balanced_monomials(2, 1))
    assert len(monos) == 16
    assert max(monomial_design_error(PAULI, m, 1).gap for m in monos) <= 1e-10
    err = monomial_design_error(FiniteDesign.from_unitaries(np.eye(2)), ([(1, 1)], [(1, 1)]), 1)
    assert err.gap == pytest.approx(0.5)
    assert err.alpha == pytest.approx(1.0)


def test_clifford_is_a_2_design_on_monomials():
    worst = max(monomial_design_error(CLIFFORD, m, 2).gap for m in balanced_monomials(2, 2))
    assert worst <= 1e-10


def test_monomial_validation():
    with pytest.raises(ValueError):
        monomial_design_error(PAULI, ([(1, 1)], [(1, 3)]), 1)
    with pytest.raises(ValueError):
        monomial_design_error(PAULI, ([(1, 1)], []), 1)
