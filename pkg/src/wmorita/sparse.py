"""Sparse action matrices over prime and extension fields."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .field import GF


def from_columns(F: GF, size: int, columns) -> sp.csc_matrix:
    """Build a sparse matrix from an iterable of ``{row: value}`` dictionaries."""
    rows, cols, vals = [], [], []
    for a, col in enumerate(columns):
        for b, c in col.items():
            rows.append(b)
            cols.append(a)
            vals.append(int(c))
    return sp.csc_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=(size, size))


def spmm(F: GF, A, X: np.ndarray) -> np.ndarray:
    """``A @ X`` over the field for sparse ``A`` and dense ``X``."""
    X = np.asarray(X, dtype=np.int64)
    if F.k == 1:
        return np.asarray(A @ X) % F.p
    return F.matmul(A.toarray(), X)


def spsp(F: GF, A, B):
    """Sparse-sparse product over the field."""
    if F.k == 1:
        C = (A @ B).tocsc()
        C.data %= F.p
        C.eliminate_zeros()
        return C
    return sp.csc_matrix(F.matmul(A.toarray(), B.toarray()))


def combine(F: GF, mats, coeffs):
    """sum_i coeffs[i] * mats[i]."""
    size = mats[0].shape[0]
    if F.k == 1:
        out = sp.csc_matrix((size, size), dtype=np.int64)
        for c, M in zip(coeffs, mats):
            if int(c):
                out = out + int(c) * M
        out = out.tocsc()
        out.data %= F.p
        out.eliminate_zeros()
        return out
    dense = np.zeros((size, size), dtype=np.int64)
    for c, M in zip(coeffs, mats):
        if int(c):
            dense = F.vadd(dense, F.vmul(int(c), M.toarray()))
    return sp.csc_matrix(dense)


def is_zero(A) -> bool:
    A = A.tocsc()
    A.eliminate_zeros()
    return A.nnz == 0


def sub(F: GF, A, B):
    if F.k == 1:
        C = (A - B).tocsc()
        C.data %= F.p
        C.eliminate_zeros()
        return C
    return sp.csc_matrix(F.vsub(A.toarray(), B.toarray()))


def scalar_identity(F: GF, size: int, c: int):
    return sp.identity(size, dtype=np.int64, format="csc") * int(c) if int(c) else sp.csc_matrix((size, size), dtype=np.int64)


def float_spmm(A32, X: np.ndarray, p: int) -> np.ndarray:
    """Exact float32 product ``A @ X`` reduced mod p (entries of A, X in [0, p))."""
    out = A32 @ X
    np.fmod(out, p, out=out)
    return out
