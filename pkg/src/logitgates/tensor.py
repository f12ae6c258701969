"""Dense 2D float64 matrices and the handful of operations the network needs.

Matrices are row-major numpy arrays (rows = batch, cols = channels); these
wrappers add the shape contracts and keep every public result float64. No
broadcasting beyond adding a bias row.
"""

import numpy as np


def as_matrix(data) -> np.ndarray:
    """Coerce nested lists / arrays to a 2D float64 row-major matrix."""
    m = np.ascontiguousarray(data, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2D matrix, got shape {m.shape}")
    return m


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.float64)


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("matmul operands must be 2D")
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimensions differ: {a.shape} x {b.shape}")
    return a @ b


def elementwise(a: np.ndarray, b: np.ndarray, op: str) -> np.ndarray:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown elementwise op {op!r}")


def scale(a: np.ndarray, factor: float) -> np.ndarray:
    return a * float(factor)


def transpose(a: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(a.T)


def row_broadcast_add(a: np.ndarray, row: np.ndarray) -> np.ndarray:
    """Add a single (cols,) row vector to every row of a (bias add)."""
    row = np.asarray(row, dtype=np.float64)
    if row.ndim != 1 or row.shape[0] != a.shape[1]:
        raise ValueError(f"bias row shape {row.shape} does not match cols {a.shape[1]}")
    return a + row


def sum_rows(a: np.ndarray) -> np.ndarray:
    """Column sums: collapse the batch dimension to a (cols,) vector."""
    if a.ndim != 2:
        raise ValueError("sum_rows expects a 2D matrix")
    return a.sum(axis=0)
