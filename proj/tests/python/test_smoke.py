"""Smoke tests for the _mrlr python module."""

import numpy as np
import pytest

import mrlr


def rand(shape, seed):
    return np.asfortranarray(np.random.default_rng(seed).standard_normal(shape))


def test_ten_reshape_matches_fortran_reshape():
    x = rand((4, 5, 6), 0)
    merged = mrlr.ten_reshape(x, [[1, 2], [3]])
    assert merged.shape == (20, 6)
    np.testing.assert_array_equal(merged, x.reshape(20, 6, order="F"))

    same = mrlr.ten_reshape(x, [[1], [2], [3]])
    np.testing.assert_array_equal(same, x)

    back = mrlr.unten_reshape(merged, [[1, 2], [3]], [4, 5, 6])
    np.testing.assert_array_equal(back, x)


def test_ten_reshape_grouping_with_permuted_modes():
    x = rand((3, 4, 2), 1)
    y = mrlr.ten_reshape(x, [[2, 3], [1]])
    assert y.shape == (8, 3)
    # rows enumerate (n2, n3) with n2 fastest
    for n1 in range(3):
        np.testing.assert_array_equal(
            y[:, n1], x[n1, :, :].reshape(8, order="F")
        )


def test_mat_unfold_columns_hold_the_mode():
    x = rand((3, 4, 5), 2)
    m = mrlr.mat_unfold(x, 2)
    assert m.shape == (15, 4)
    np.testing.assert_array_equal(m[:, 1], x[:, 1, :].reshape(15, order="F"))
    folded = mrlr.mat_fold(m, [3, 4, 5], 2)
    np.testing.assert_array_equal(folded, x)


def test_khatri_rao_hand_case():
    a = np.array([[1.0, 2.0], [3.0, 4.0]])
    b = np.array([[5.0, 6.0], [7.0, 8.0]])
    k = mrlr.khatri_rao(a, b)
    np.testing.assert_array_equal(
        k, np.array([[5.0, 12.0], [7.0, 16.0], [15.0, 24.0], [21.0, 32.0]])
    )


def test_als_fit_recovers_low_rank():
    factors = mrlr.init_factors([6, 7, 8], 1, seed=3)
    x = mrlr.cp_reconstruct(factors)
    fitted, trace = mrlr.als_fit(x, 1, mrlr.AlsConfig(seed=11))
    assert trace.converged
    assert trace.errors[-1] <= 1e-6 * np.linalg.norm(x.ravel())
    np.testing.assert_allclose(mrlr.cp_reconstruct(fitted), x, atol=1e-6)


def test_mrlr_fit_reports_consistent_budgets():
    x = rand((5, 6, 4), 4)
    plan = [([[1, 2], [3]], 1), ([[1], [2], [3]], 2)]
    model, report = mrlr.mrlr_fit(x, plan, mrlr.AlsConfig(max_sweeps=20, seed=5))
    assert len(model) == 2
    assert report.cumulative_params[-1] == mrlr.param_count(model)
    assert report.cumulative_params[-1] == mrlr.plan_param_count(plan, [5, 6, 4])
    assert report.stage_nfe[1] <= report.stage_nfe[0] + 1e-10
    approx = mrlr.mrlr_reconstruct(model)
    assert approx.shape == x.shape
    assert abs(mrlr.nfe(x, approx) - report.stage_nfe[-1]) <= 1e-12


def test_function_tensor_and_nfe():
    x = mrlr.sample_function_tensor(start=1.0, step=1.0, count=3)
    assert x.shape == (3, 3, 3)
    assert x[0, 1, 2] == pytest.approx((1 + 4) * np.exp(-abs(2 + 3)))
    assert mrlr.nfe(x, x) == 0.0
    assert mrlr.nfe(x, np.zeros_like(x)) == pytest.approx(1.0)


def test_regular_partitions():
    assert mrlr.regular_partitions(4) == [
        [[1, 2], [3, 4]],
        [[1], [2], [3, 4]],
        [[1], [2], [3], [4]],
    ]


def test_tensor_file_round_trip(tmp_path):
    x = rand((3, 4, 2), 6)
    path = str(tmp_path / "t.mrlr")
    mrlr.write_tensor(path, x)
    np.testing.assert_array_equal(mrlr.read_tensor(path), x)


def test_model_file_round_trip(tmp_path):
    x = rand((4, 5, 3), 7)
    model, _ = mrlr.mrlr_fit(
        x, [([[1, 2], [3]], 2)], mrlr.AlsConfig(max_sweeps=10, seed=8)
    )
    path = str(tmp_path / "m.mrlrm")
    mrlr.write_model(path, model)
    loaded = mrlr.read_model(path)
    np.testing.assert_array_equal(
        mrlr.mrlr_reconstruct(loaded), mrlr.mrlr_reconstruct(model)
    )


def test_validation_errors_are_python_exceptions():
    x = rand((3, 4), 9)
    with pytest.raises(ValueError):
        mrlr.ten_reshape(x, [[1], [1, 2]])
    with pytest.raises(ValueError):
        mrlr.mat_unfold(x, 5)
    with pytest.raises(ArithmeticError):
        mrlr.nfe(np.zeros((2, 2), order="F"), np.zeros((2, 2), order="F"))
    with pytest.raises(OSError):
        mrlr.read_tensor("/nonexistent/path.mrlr")


def test_c_order_arrays_are_accepted():
    x = np.random.default_rng(10).standard_normal((3, 4, 5))  # C order
    m = mrlr.mat_unfold(x, 1)
    assert m.shape == (20, 3)
    np.testing.assert_allclose(m[0], x[:, 0, 0])
