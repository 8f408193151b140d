import numpy as np
import pytest
from scipy import stats

from qjl.linalg import is_unitary
from qjl.sampling import (
    HaarRestriction,
    RngStream,
    as_generator,
    derive_seed,
    sample_chi_square_sum,
    sample_haar_isometry,
    sample_haar_unit_vector,
    sample_haar_unitaries,
    sample_haar_unitary,
)


def first_coord_cdf(d):
    # |v_1|^2 of a uniform unit vector in C^d is Beta(1, d-1)
    return stats.beta(1, d - 1).cdf


def test_streams_are_reproducible_and_distinct():
    a = RngStream(7, 3).generator().random(4)
    b = RngStream(7, 3).generator().random(4)
    c = RngStream(7, 4).generator().random(4)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_stream_validation():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(0, 2**64)
    with pytest.raises(TypeError):
        as_generator(5)


def test_child_streams_differ_from_parent_streams():
    parent = RngStream(11, 2)
    child = parent.child(0)
    assert child != RngStream(11, 0)
    assert child.master_seed == derive_seed(11, 2)


def test_derive_seed_is_deterministic_64_bit():
    s = derive_seed(1, 2, 3)
    assert s == derive_seed(1, 2, 3)
    assert s != derive_seed(1, 2, 4)
    assert 0 <= s < 2**64


def test_chi_square_sum_matches_scipy_law():
    gen = RngStream(5).generator()
    x = [sample_chi_square_sum(16, gen) for _ in range(4000)]
    assert stats.kstest(x, stats.chi2(16).cdf).pvalue > 1e-3


@pytest.mark.parametrize("d", [1, 2, 5, 16])
def test_haar_unitary_is_unitary(d):
    assert is_unitary(sample_haar_unitary(d, RngStream(d)))


def test_haar_trace_moments():
    # E tr U = 0 and E |tr U|^2 = 1 for Haar U(d); raw QR without phase fixing fails the second
    us = sample_haar_unitaries(20000, 4, RngStream(1))
    tr = np.trace(us, axis1=1, axis2=2)
    assert abs(tr.mean()) < 0.05
    assert abs(np.mean(np.abs(tr) ** 2) - 1) < 0.05


def test_unfixed_qr_is_detectably_not_haar():
    gen = RngStream(1).generator()
    z = (gen.standard_normal((20000, 4, 4)) + 1j * gen.standard_normal((20000, 4, 4))) / np.sqrt(2)
    q, _ = np.linalg.qr(z)
    tr = np.trace(q, axis1=1, axis2=2)
    assert abs(np.mean(np.abs(tr) ** 2) - 1) > 0.2


@pytest.mark.parametrize("d", [2, 8, 64])
def test_unit_vector_coordinate_law(d):
    gen = RngStream(d).generator()
    x = [abs(sample_haar_unit_vector(d, gen)[0]) ** 2 for _ in range(3000)]
    assert stats.kstest(x, first_coord_cdf(d)).pvalue > 1e-3


def test_dense_column_and_isometry_agree_with_unit_vector_law():
    d = 32
    gen = RngStream(9).generator()
    dense = [abs(sample_haar_unitary(d, gen)[0, 0]) ** 2 for _ in range(2000)]
    iso = [abs(sample_haar_isometry(d, 3, gen)[0, 0]) ** 2 for _ in range(2000)]
    assert stats.kstest(dense, first_coord_cdf(d)).pvalue > 1e-3
    assert stats.kstest(iso, first_coord_cdf(d)).pvalue > 1e-3
    assert stats.ks_2samp(dense, iso).pvalue > 1e-3


def test_isometry_columns_are_orthonormal():
    w = sample_haar_isometry(50, 7, RngStream(3))
    np.testing.assert_allclose(w.conj().T @ w, np.eye(7), atol=1e-12)
    with pytest.raises(ValueError):
        sample_haar_isometry(4, 5, RngStream(3))


def test_restriction_preserves_inner_products():
    gen = RngStream(4).generator()
    vs = np.stack([sample_haar_unit_vector(40, gen) for _ in range(5)], axis=1)
    r = HaarRestriction(vs, RngStream(5))
    out = r(vs)
    np.testing.assert_allclose(out.conj().T @ out, vs.conj().T @ vs, atol=1e-12)
    combo = vs @ np.array([1, 2j, 0, -1, 0.5])
    np.testing.assert_allclose(r(combo), out @ np.array([1, 2j, 0, -1, 0.5]), atol=1e-12)


def test_restriction_rejects_vectors_outside_span():
    r = HaarRestriction(np.eye(6)[:, 0], RngStream(0))
    with pytest.raises(ValueError):
        r(np.eye(6)[:, 1])


def test_restriction_handles_rank_deficient_inputs():
    v = np.eye(5)[:, :2]
    vs = np.concatenate([v, v[:, :1] + v[:, 1:]], axis=1)
    r = HaarRestriction(vs, RngStream(0))
    assert r.basis.shape == (5, 2)
    out = r(vs)
    np.testing.assert_allclose(out[:, 2], out[:, 0] + out[:, 1], atol=1e-12)


def test_restriction_image_of_basis_state_has_haar_law():
    d = 16
    e1 = np.eye(d)[:, 0]
    x = [abs(HaarRestriction(e1, RngStream(0, i))(e1)[0]) ** 2 for i in range(2000)]
    assert stats.kstest(x, first_coord_cdf(d)).pvalue > 1e-3


def _mean_within_3se(x, target):
    x = np.asarray(x)
    return abs(x.mean() - target) <= 3 * x.std(ddof=1) / np.sqrt(len(x))


def test_unit_vector_first_coordinate_mean():
    gen = RngStream(21).generator()
    assert _mean_within_3se([abs(sample_haar_unit_vector(64, gen)[0]) ** 2 for _ in range(10000)], 1 / 64)


def test_unitary_entry_mean_and_left_invariance():
    us = sample_haar_unitaries(10000, 16, RngStream(22))
    assert _mean_within_3se(np.abs(us[:, 0, 0]) ** 2, 1 / 16)
    w = sample_haar_unitary(16, RngStream(23))
    assert _mean_within_3se(np.abs((w @ us)[:, 0, 0]) ** 2, 1 / 16)
