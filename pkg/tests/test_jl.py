import json

import numpy as np
import pytest

from qjl.circuits import circuit_to_unitary, generate_local_random_circuit
from qjl.jl import (
    block_probability_vector,
    classical_jl,
    pairwise_preservation_report,
    quantum_jl_measure,
)
from qjl.linalg import BlockStructure, basis_state
from qjl.sampling import HaarRestriction, RngStream, sample_haar_unit_vector, sample_haar_unitary

BS = BlockStructure(16, 4)


def test_classical_jl_identity_keeps_first_block_scaled():
    v = np.arange(16, dtype=complex)
    np.testing.assert_allclose(classical_jl(v, np.eye(16), BS), 2 * v[:4])


def test_block_probabilities_sum_to_one_and_agree_across_representations():
    c = generate_local_random_circuit(4, 40, RngStream(1))
    v = sample_haar_unit_vector(16, RngStream(2))
    p_circ = block_probability_vector(v, c, BS)
    p_dense = block_probability_vector(v, circuit_to_unitary(c), BS)
    assert p_circ.sum() == pytest.approx(1.0)
    np.testing.assert_allclose(p_circ, p_dense, atol=1e-12)


def test_measure_identity_gives_the_block_of_the_basis_state():
    out = quantum_jl_measure(basis_state(16, 7), np.eye(16), BS, RngStream(0))
    assert out.block_index == 2
    assert out.block_probability == pytest.approx(1.0)
    np.testing.assert_allclose(out.collapsed_state, basis_state(4, 3))


def test_measure_follows_born_rule():
    u = sample_haar_unitary(16, RngStream(3))
    v = sample_haar_unit_vector(16, RngStream(4))
    probs = block_probability_vector(v, u, BS)
    gen = RngStream(5).generator()
    names = [quantum_jl_measure(v, u, BS, gen).block_index for _ in range(20000)]
    freq = np.bincount(names, minlength=5)[1:] / len(names)
    se = np.sqrt(probs * (1 - probs) / len(names))
    assert np.all(np.abs(freq - probs) < 5 * se)


def test_measure_collapsed_state_is_unit():
    v = sample_haar_unit_vector(16, RngStream(4))
    out = quantum_jl_measure(v, sample_haar_unitary(16, RngStream(3)), BS, RngStream(6))
    assert np.linalg.norm(out.collapsed_state) == pytest.approx(1.0)


def test_measure_requires_unit_state():
    with pytest.raises(ValueError):
        quantum_jl_measure(np.ones(16), np.eye(16), BS, RngStream(0))


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        block_probability_vector(basis_state(16, 1), np.eye(8), BS)
    with pytest.raises(ValueError):
        block_probability_vector(basis_state(16, 1), generate_local_random_circuit(3, 2, RngStream(0)), BS)


def test_report_matches_direct_computation():
    states = [sample_haar_unit_vector(16, RngStream(0, i)) for i in range(3)]
    u = sample_haar_unitary(16, RngStream(9))
    rep = pairwise_preservation_report(states, u, BS, 0.25)
    assert rep.pairs == [(1, 2), (1, 3), (2, 3)]
    w = [u @ s for s in states]
    j = 2
    a = w[0][4:8] / np.linalg.norm(w[0][4:8])
    b = w[2][4:8] / np.linalg.norm(w[2][4:8])
    expected = abs(np.vdot(a, b) - np.vdot(states[0], states[2]))
    assert rep.inner_deviation[j - 1, 1] == pytest.approx(expected, abs=1e-12)
    assert rep.norm_deviation[0, 1] == pytest.approx(abs(np.linalg.norm(w[1][:4]) / 0.5 - 1))


def test_report_on_restriction_and_serialisation():
    states = np.stack([sample_haar_unit_vector(64, RngStream(1, i)) for i in range(4)], axis=1)
    bs = BlockStructure(64, 16)
    rep = pairwise_preservation_report(list(states.T), HaarRestriction(states, RngStream(2)), bs, 0.5)
    assert rep.inner_deviation.shape == (4, 6)
    data = json.loads(rep.to_json())
    assert data["max_inner_deviation"] == pytest.approx(rep.max_inner_deviation)
    assert rep.to_csv().splitlines()[0].split(",") == list(rep.CSV_COLUMNS)


def test_identity_marks_unreachable_blocks():
    states = [basis_state(16, 1), basis_state(16, 2)]
    rep = pairwise_preservation_report(states, np.eye(16), BS, 0.1)
    assert (2, 1) in rep.unreachable
    assert np.isnan(rep.inner_deviation[1, 0])
    # both states collapse exactly in block 1, orthogonal before and after
    assert rep.inner_deviation[0, 0] == pytest.approx(0.0)
    assert rep.norm_violations == [(1, 1), (1, 2)]


def test_scaling_consistency():
    u = sample_haar_unitary(16, RngStream(30))
    v = sample_haar_unit_vector(16, RngStream(31))
    p1 = block_probability_vector(v, u, BS)[0]
    assert np.linalg.norm(classical_jl(v, u, BS)) == pytest.approx(np.sqrt(16 / 4) * np.sqrt(p1))


def test_block_masses_average_to_d2_over_d1():
    bs = BlockStructure(1024, 64)
    v = sample_haar_unit_vector(1024, RngStream(32))
    masses = np.array([np.sum(np.abs(bs.blocks(HaarRestriction(v, RngStream(33, i))(v))) ** 2, axis=1)
                       for i in range(10000)])
    se = masses.std(axis=0, ddof=1) / np.sqrt(len(masses))
    assert np.all(np.abs(masses.mean(axis=0) - 1 / 16) <= 3 * se)
    # the rescaled classical projection is unbiased in squared norm
    sq = 16 * masses[:, 0]
    assert abs(sq.mean() - 1) <= 3 * sq.std(ddof=1) / np.sqrt(len(sq))


def test_block_names_over_fresh_unitaries_are_near_uniform():
    bs = BlockStructure(1024, 64)
    e1 = basis_state(1024, 1)
    gen = RngStream(34).generator()
    names = [quantum_jl_measure(e1, HaarRestriction(e1, RngStream(35, i)), bs, gen).block_index
             for i in range(10000)]
    freq = np.bincount(names, minlength=17)[1:] / len(names)
    assert np.abs(freq - 1 / 16).sum() <= 0.1


def test_basis_pair_preserved_for_most_unitaries():
    bs = BlockStructure(1024, 256)
    states = np.stack([basis_state(1024, 1), basis_state(1024, 2)], axis=1)
    clean = sum(
        not pairwise_preservation_report(list(states.T), HaarRestriction(states, RngStream(36, i)), bs, 0.25)
        .inner_violations
        for i in range(100)
    )
    assert clean >= 95
