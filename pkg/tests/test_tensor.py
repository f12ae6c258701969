import numpy as np
import pytest

from logitgates import tensor


def naive_matmul(a, b):
    r, k = a.shape
    k2, c = b.shape
    out = np.zeros((r, c))
    for i in range(r):
        for j in range(c):
            acc = 0.0
            for t in range(k):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def test_matmul_identity():
    x = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(tensor.matmul(np.eye(2), x), x)


def test_matmul_hand_value():
    out = tensor.matmul(np.array([[1.0, 2.0]]), np.array([[3.0], [4.0]]))
    assert out.shape == (1, 1) and out[0, 0] == 11.0


def test_matmul_matches_triple_loop():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((8, 8))
    b = rng.standard_normal((8, 8))
    assert np.abs(tensor.matmul(a, b) - naive_matmul(a, b)).max() < 1e-12


def test_matmul_dim_mismatch():
    with pytest.raises(ValueError):
        tensor.matmul(np.zeros((2, 3)), np.zeros((2, 3)))


def test_transpose_product_identity():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((5, 7))
    b = rng.standard_normal((7, 4))
    lhs = tensor.transpose(tensor.matmul(a, b))
    rhs = tensor.matmul(tensor.transpose(b), tensor.transpose(a))
    assert np.abs(lhs - rhs).max() < 1e-12


def test_elementwise_ops():
    x = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(tensor.elementwise(x, np.zeros_like(x), "add"), x)
    assert np.array_equal(tensor.elementwise(x, x, "sub"), np.zeros_like(x))
    assert np.array_equal(tensor.elementwise(x, x, "mul"), x * x)
    with pytest.raises(ValueError):
        tensor.elementwise(x, np.zeros((3, 2)), "add")
    with pytest.raises(ValueError):
        tensor.elementwise(x, x, "div")


def test_transpose_involution():
    x = np.arange(6.0).reshape(2, 3)
    assert np.array_equal(tensor.transpose(tensor.transpose(x)), x)


def test_sum_rows():
    assert np.array_equal(tensor.sum_rows(np.ones((3, 4))), np.full(4, 3.0))


def test_row_broadcast_add():
    x = np.zeros((2, 3))
    out = tensor.row_broadcast_add(x, np.array([1.0, 2.0, 3.0]))
    assert np.array_equal(out, np.array([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]))
    with pytest.raises(ValueError):
        tensor.row_broadcast_add(x, np.zeros(2))


def test_scale():
    assert np.array_equal(tensor.scale(np.ones((2, 2)), 2.5), np.full((2, 2), 2.5))


def test_as_matrix_contract():
    m = tensor.as_matrix([[1, 2], [3, 4]])
    assert m.dtype == np.float64 and m.flags["C_CONTIGUOUS"]
    with pytest.raises(ValueError):
        tensor.as_matrix([1, 2, 3])


def test_no_nan_propagation_on_random_chain():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((6, 6))
    out = tensor.matmul(tensor.transpose(a), tensor.scale(a, -0.5))
    assert np.all(np.isfinite(out))
