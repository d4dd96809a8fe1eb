import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import branch
from spvertex import csvio
from spvertex.errors import BranchError, DegreeDeficientError, SizeError
from spvertex.transfer import (
    EigenPolynomial,
    TransferSpec,
    apply_transfer,
    build_transfer_dense,
    finite_kappa,
    finite_partition_function,
    interpolate_eigen_polynomial,
    leading_eigenvalue,
    polynomial_zeros,
    translate,
    weight_sector,
)


def test_single_site_is_partial_trace():
    spec = TransferSpec.make(3, 1, 1, "dense")
    lam = 0.4 - 0.3j
    r4 = spec.family.tensor(lam)
    assert np.allclose(build_transfer_dense(spec, lam), np.einsum("gbga->ba", r4))


def test_regular_point_is_shift():
    spec = TransferSpec.make(3, 1, 2, "dense")
    t0 = build_transfer_dense(spec, 0.0)
    shift = np.array([translate(e, 6, 2) for e in np.eye(36)]).T
    assert np.allclose(t0, 16 * shift)


def test_orientation_on_basis_state():
    spec = TransferSpec.make(3, 1, 3)
    e = np.zeros(216)
    e[np.ravel_multi_index((0, 1, 2), (6, 6, 6))] = 1
    out = apply_transfer(spec, 0.0, e)
    target = np.ravel_multi_index((1, 2, 0), (6, 6, 6))
    assert np.isclose(out[target], 64) and np.count_nonzero(np.abs(out) > 1e-12) == 1


def test_sp4_fused_columns():
    spec = TransferSpec.make(2, 2, 2, "dense")
    dense = build_transfer_dense(spec, 0.5)
    cols = apply_transfer(spec, 0.5, np.eye(16))
    assert np.max(np.abs(dense - cols)) <= 1e-12 * np.max(np.abs(dense))


@pytest.mark.parametrize("level", [1, 2, 3])
def test_matrix_free_matches_dense(level):
    spec = TransferSpec.make(3, level, 3, "dense")
    rng = np.random.default_rng(level)
    for lam in rng.uniform(-1, 1, 5) + 1j * rng.uniform(-1, 1, 5):
        v = rng.standard_normal(216) + 1j * rng.standard_normal(216)
        ref = build_transfer_dense(spec, lam) @ v
        assert np.linalg.norm(apply_transfer(spec, lam, v) - ref) <= 1e-11 * np.linalg.norm(ref)


@settings(max_examples=10, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.integers(0, 2**31))
def test_linearity(alpha, lam, seed):
    spec = TransferSpec.make(2, 1, 3)
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal((2, 64))
    lhs = apply_transfer(spec, lam, alpha * u + v)
    rhs = alpha * apply_transfer(spec, lam, u) + apply_transfer(spec, lam, v)
    assert np.allclose(lhs, rhs, atol=1e-13 * max(1, np.abs(rhs).max()))


def test_commuting_family():
    rng = np.random.default_rng(7)
    mats = {}
    for _ in range(3):
        lam, mu = rng.uniform(-1, 1, 2) + 1j * rng.uniform(-1, 1, 2)
        for m in (1, 2, 3):
            mats[m] = build_transfer_dense(TransferSpec.make(3, m, 3, "dense"), lam)
        for m2 in (1, 2, 3):
            b = build_transfer_dense(TransferSpec.make(3, m2, 3, "dense"), mu)
            for a in mats.values():
                assert np.linalg.norm(a @ b - b @ a) <= 1e-9 * np.linalg.norm(a @ b)


def test_size_budget():
    with pytest.raises(SizeError):
        TransferSpec.make(3, 1, 7, "dense")
    with pytest.raises(ValueError):
        TransferSpec.make(3, 4, 2)
    with pytest.raises(ValueError):
        apply_transfer(TransferSpec.make(3, 1, 2), 0.1, np.ones(5))


def test_weight_sector_sizes():
    assert len(weight_sector(3, 2)) == 6
    assert len(weight_sector(3, 6)) == 1860


def test_near_regular_point():
    s = leading_eigenvalue(TransferSpec.make(3, 1, 4), 1e-3)
    assert abs(s.value - 256) < 0.01 * 256


def test_last_level_leading_value_real_positive():
    spec = TransferSpec.make(3, 3, 3, "dense")
    s = leading_eigenvalue(spec, 0.2)
    w = np.linalg.eigvals(build_transfer_dense(spec, 0.2))
    assert s.value.real > 0 and abs(s.value.imag) < 1e-10 * abs(s.value)
    assert s.residual <= 1e-10
    assert np.isclose(abs(s.value), np.max(np.abs(w)))


def test_sector_restriction_same_value():
    spec = TransferSpec.make(3, 1, 3)
    full = leading_eigenvalue(spec, -0.2)
    part = leading_eigenvalue(spec, -0.2, sector=weight_sector(3, 3))
    assert np.isclose(full.value, part.value, rtol=1e-10)


def test_branch_tracking_with_prev_vector():
    br = branch(3, 3)
    s = leading_eigenvalue(br.spec(1), 0.3 + 0.4j, prev_vector=br.vector)
    assert s.overlap > 0.99
    assert np.isclose(s.value, br.value(1, 0.3 + 0.4j), rtol=1e-9)
    # a perturbed vector is no eigenvector; the Ritz-overlap search recovers the branch
    noisy = br.vector + 1e-3 * np.random.default_rng(0).standard_normal(216)
    s2 = leading_eigenvalue(br.spec(1), -0.2, prev_vector=noisy)
    assert s2.overlap > 0.99 and np.isclose(s2.value, br.value(1, -0.2), rtol=1e-9)


def test_branch_is_ground_state_and_translation():
    assert np.isclose(branch(3, 3).translation, 1)
    assert np.isclose(branch(3, 4).translation, -1)
    br = branch(3, 3)
    assert np.isclose(br.value(1, 0.0) * br.value(1, -4.0), 16**3, rtol=1e-12)


def test_interpolation_at_regular_point():
    poly = interpolate_eigen_polynomial(branch(3, 3), 1)
    assert poly.degree == 6
    assert abs(poly(0.0) - 64) <= 1e-8 * 64
    assert poly.heldout_error <= 1e-6
    mono = np.polynomial.polynomial.polyval(0.37, poly.monomial_coefficients())
    assert np.isclose(mono, poly(0.37))


def test_interpolation_last_level_degree():
    assert interpolate_eigen_polynomial(branch(3, 3), 3).degree == 3


def test_sp4_polynomial_matches_direct_solves():
    br = branch(2, 4)
    poly = interpolate_eigen_polynomial(br, 1)
    assert poly.degree == 8
    dense = TransferSpec.make(2, 1, 4, "dense")
    rng = np.random.default_rng(3)
    for lam in rng.uniform(-3.4, 0.4, 20) + 1j * rng.uniform(-1, 1, 20):
        w, vecs = np.linalg.eig(build_transfer_dense(dense, lam))
        j = np.argmax(np.abs(vecs.conj().T @ br.vector))
        assert abs(poly(lam) - w[j]) <= 1e-7 * max(abs(w[j]), 1.0)


def test_zeros_of_known_polynomial():
    # (w - 0.5)(w + 0.5)(w - 0.2i) in the scaled variable, centre -2, radius 3
    coeffs = np.polynomial.polynomial.polyfromroots([0.5, -0.5, 0.2j])
    rep = polynomial_zeros(EigenPolynomial(1, 1, coeffs, -2.0, 3.0, 0.0, 4))
    assert np.allclose(sorted(rep.zeros.real), [-3.5, -2.0, -0.5])
    assert rep.centerline_count == 1 and rep.in_strip_offline_count == 2
    assert rep.centerline_count + rep.in_strip_offline_count <= 3


def test_degree_deficient():
    with pytest.raises(DegreeDeficientError):
        polynomial_zeros(EigenPolynomial(1, 1, np.array([1.0, 2.0, 1e-15]), -2.0, 3.0, 0.0, 4))


def test_sp4_zero_symmetry():
    rep = polynomial_zeros(interpolate_eigen_polynomial(branch(2, 4), 1))
    assert rep.symmetry_defect(3) < 1e-6


def test_finite_kappa():
    assert np.isclose(finite_kappa(branch(3, 4).value(1, 1e-9), 4), 4, rtol=1e-6)
    with pytest.raises(BranchError):
        finite_kappa(1 + 1j, 3)
    with pytest.raises(BranchError):
        finite_kappa(0.0, 3)


def test_partition_function():
    assert np.isclose(finite_partition_function(TransferSpec.make(3, 1, 2, "dense"), 0.0, 1), 96)
    spec = TransferSpec.make(2, 1, 2, "dense")
    w = np.linalg.eigvals(build_transfer_dense(spec, 0.3))
    assert abs(finite_partition_function(spec, 0.3, 2) - np.sum(w**2)) <= 1e-9 * abs(np.sum(w**2))
    z = finite_partition_function(TransferSpec.make(3, 1, 3, "dense"), 0.2, 3)
    assert z.real > 0 and abs(z.imag) < 1e-9 * z.real


def test_samples_csv_round_trip():
    br = branch(3, 3)
    s = br.sample(2, 0.25)
    text = csvio.write_csv("samples", [(s.lam.real, s.lam.imag, s.value.real, s.value.imag, s.residual)])
    row = csvio.read_csv("samples", text)[0]
    assert row["value_re"] == s.value.real
