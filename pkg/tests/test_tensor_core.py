import numpy as np
import pytest

from tenblock.tensor_core import (
    GappyTensor4,
    chebyshev_norm,
    fold,
    frobenius_norm,
    mode_product,
    project_mask,
    rank_from_spectrum,
    truncated_svd,
    unfold,
)


def test_unfold_hand_trace():
    # 2x2x2 tensor with entries 0..7 laid out so that x[i,j,k] = i + 2j + 4k
    x = np.arange(8).reshape(2, 2, 2, order="F")
    m0 = unfold(x, 0)
    assert m0.shape == (2, 4)
    np.testing.assert_array_equal(m0, [[0, 2, 4, 6], [1, 3, 5, 7]])
    m1 = unfold(x, 1)
    np.testing.assert_array_equal(m1, [[0, 1, 4, 5], [2, 3, 6, 7]])
    m2 = unfold(x, 2)
    np.testing.assert_array_equal(m2, [[0, 1, 2, 3], [4, 5, 6, 7]])


def test_unfold_column_order_remaining_modes_ascending():
    # column index of unfold(x, 1) must advance fastest along mode 0
    x = np.arange(24, dtype=float).reshape(2, 3, 4, order="F")
    m = unfold(x, 1)
    assert m.shape == (3, 8)
    for j in range(3):
        np.testing.assert_array_equal(m[j], x[:, j, :].ravel(order="F"))


def test_fold_inverts_unfold():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((3, 4, 5, 2))
    for mode in range(4):
        np.testing.assert_array_equal(fold(unfold(x, mode), mode, x.shape), x)


def test_unfold_bad_mode():
    x = np.zeros((2, 2))
    with pytest.raises(ValueError):
        unfold(x, 2)
    with pytest.raises(ValueError):
        unfold(x, -1)


def test_fold_shape_mismatch():
    with pytest.raises(ValueError):
        fold(np.zeros((3, 5)), 0, (3, 4))


def test_mode_product_identity():
    rng = np.random.default_rng(1)
    x = rng.standard_normal((4, 3, 5))
    for mode in range(3):
        np.testing.assert_allclose(mode_product(x, np.eye(x.shape[mode]), mode), x)


def test_mode_product_matches_unfolding_definition():
    rng = np.random.default_rng(2)
    x = rng.standard_normal((4, 5, 3))
    a = rng.standard_normal((7, 5))
    y = mode_product(x, a, 1)
    assert y.shape == (4, 7, 3)
    np.testing.assert_allclose(unfold(y, 1), a @ unfold(x, 1))


def test_mode_products_commute_across_modes():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((4, 5, 6))
    a = rng.standard_normal((3, 4))
    b = rng.standard_normal((2, 6))
    y1 = mode_product(mode_product(x, a, 0), b, 2)
    y2 = mode_product(mode_product(x, b, 2), a, 0)
    np.testing.assert_allclose(y1, y2, atol=1e-12)


def test_mode_product_same_mode_composes():
    rng = np.random.default_rng(4)
    x = rng.standard_normal((4, 5, 6))
    a = rng.standard_normal((3, 5))
    b = rng.standard_normal((2, 3))
    y1 = mode_product(mode_product(x, a, 1), b, 1)
    y2 = mode_product(x, b @ a, 1)
    np.testing.assert_allclose(y1, y2, atol=1e-12)


def test_frobenius_norm_all_ones():
    assert frobenius_norm(np.ones((2, 3, 4))) == pytest.approx(np.sqrt(24.0))


def test_frobenius_norm_equals_unfolding_norm():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((3, 4, 5))
    for mode in range(3):
        assert frobenius_norm(x) == pytest.approx(
            np.linalg.norm(unfold(x, mode)), rel=1e-13)


def test_chebyshev_norm_ignores_nan():
    assert chebyshev_norm(np.array([1.0, np.nan, -5.0])) == 5.0


def test_chebyshev_norm_with_mask():
    x = np.array([1.0, -9.0, 3.0])
    mask = np.array([True, False, True])
    assert chebyshev_norm(x, mask) == 3.0


def test_chebyshev_norm_empty_raises():
    with pytest.raises(ValueError):
        chebyshev_norm(np.array([np.nan, np.nan]))
    with pytest.raises(ValueError):
        chebyshev_norm(np.ones(3), np.zeros(3, dtype=bool))


def test_project_mask_bool():
    x = np.arange(6, dtype=float).reshape(2, 3)
    omega = np.array([[True, False, True], [False, False, True]])
    y = project_mask(x, omega)
    np.testing.assert_array_equal(y, [[0.0, 0.0, 2.0], [0.0, 0.0, 5.0]])
    # input untouched
    assert x[0, 1] == 1.0


def test_project_mask_idempotent():
    rng = np.random.default_rng(6)
    x = rng.standard_normal((4, 5))
    omega = rng.random((4, 5)) < 0.4
    y = project_mask(x, omega)
    np.testing.assert_array_equal(project_mask(y, omega), y)


def test_project_mask_empty_and_full():
    x = np.ones((2, 2))
    np.testing.assert_array_equal(project_mask(x, np.zeros((2, 2), bool)), 0 * x)
    np.testing.assert_array_equal(project_mask(x, np.ones((2, 2), bool)), x)


def test_truncated_svd_rank_deficient_exact():
    m = np.array([[1.0, 2.0], [2.0, 4.0]])
    svd = truncated_svd(m, rank=2)
    np.testing.assert_allclose(svd.S, [5.0, 0.0], atol=1e-12)
    svd1 = truncated_svd(m, rank=1)
    np.testing.assert_allclose(svd1.U * svd1.S @ svd1.Vt, m, atol=1e-12)


def test_truncated_svd_identity_spectrum():
    svd = truncated_svd(np.eye(3), rank=3)
    np.testing.assert_allclose(svd.S, [1.0, 1.0, 1.0], atol=1e-14)


def test_truncated_svd_tol_keeps_above_relative_threshold():
    m = np.diag([1.0, 1e-2, 1e-6])
    svd = truncated_svd(m, tol=1e-3)
    assert len(svd.S) == 2


def test_truncated_svd_argument_validation():
    m = np.eye(2)
    with pytest.raises(ValueError):
        truncated_svd(m)
    with pytest.raises(ValueError):
        truncated_svd(m, rank=1, tol=0.5)
    with pytest.raises(ValueError):
        truncated_svd(m, rank=0)
    with pytest.raises(ValueError):
        truncated_svd(m, rank=3)
    with pytest.raises(ValueError):
        truncated_svd(m, tol=0.0)


def test_truncated_svd_deterministic():
    rng = np.random.default_rng(7)
    m = rng.standard_normal((20, 12))
    a = truncated_svd(m, rank=5)
    b = truncated_svd(m.copy(), rank=5)
    assert np.array_equal(a.U, b.U)
    assert np.array_equal(a.S, b.S)
    assert np.array_equal(a.Vt, b.Vt)


def test_truncated_svd_sign_convention():
    rng = np.random.default_rng(8)
    m = rng.standard_normal((10, 6))
    svd = truncated_svd(m, rank=4)
    for j in range(4):
        col = svd.U[:, j]
        assert col[np.argmax(np.abs(col))] > 0


def test_truncated_svd_orthonormal_and_sorted():
    rng = np.random.default_rng(9)
    m = rng.standard_normal((15, 9))
    svd = truncated_svd(m, rank=6)
    np.testing.assert_allclose(svd.U.T @ svd.U, np.eye(6), atol=1e-12)
    np.testing.assert_allclose(svd.Vt @ svd.Vt.T, np.eye(6), atol=1e-12)
    assert np.all(np.diff(svd.S) <= 0)


def test_truncation_error_matches_tail_spectrum():
    rng = np.random.default_rng(10)
    m = rng.standard_normal((20, 14))
    full = np.linalg.svd(m, compute_uv=False)
    r = 5
    svd = truncated_svd(m, rank=r)
    err = np.linalg.norm(m - svd.U * svd.S @ svd.Vt)
    assert err == pytest.approx(np.sqrt(np.sum(full[r:] ** 2)), rel=1e-10)


def test_rank_from_spectrum():
    s = np.array([1.0, 1e-2, 1e-6])
    assert rank_from_spectrum(s, 1e-3) == 2
    assert rank_from_spectrum(s, 1e-8) == 3
    assert rank_from_spectrum(s, 0.5) == 1
    assert rank_from_spectrum(np.zeros(3), 1e-3) == 1


def _square_field(nx=6, ny=5, nl=3, nt=4, land=((0, 0), (5, 4))):
    rng = np.random.default_rng(11)
    values = rng.standard_normal((nx, ny, nl, nt))
    mask = np.ones((nx, ny), dtype=bool)
    for i, j in land:
        mask[i, j] = False
        values[i, j] = np.nan
    return values, mask


def test_gappy_tensor_accepts_consistent_field():
    values, mask = _square_field()
    g = GappyTensor4(values, mask)
    assert g.dims == (6, 5, 3, 4)
    assert g.defined_count == int(mask.sum()) * 3 * 4


def test_gappy_tensor_rejects_partial_nan_column():
    values, mask = _square_field()
    values[1, 1, 0, 0] = np.nan
    with pytest.raises(ValueError):
        GappyTensor4(values, mask)


def test_gappy_tensor_rejects_defined_value_at_masked_cell():
    values, mask = _square_field()
    values[0, 0] = 0.0  # mask says undefined
    with pytest.raises(ValueError):
        GappyTensor4(values, mask)


def test_gappy_tensor_rejects_inf():
    values, mask = _square_field()
    values[2, 2, 1, 1] = np.inf
    with pytest.raises(ValueError):
        GappyTensor4(values, mask)


def test_gappy_tensor_rejects_bad_shapes():
    with pytest.raises(ValueError):
        GappyTensor4(np.zeros((2, 2, 2)), np.ones((2, 2), bool))
    with pytest.raises(ValueError):
        GappyTensor4(np.zeros((2, 2, 2, 2)), np.ones((2, 3), bool))
