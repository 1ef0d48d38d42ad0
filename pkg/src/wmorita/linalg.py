"""Dense exact linear algebra over finite fields.

Matrices are integer numpy arrays of field codes.  Elimination pivots on the
first nonzero entry (scanning rows downward) of the leftmost available column,
so every echelon form, kernel basis and particular solution is reproducible.

Over prime fields large matrices go through a recursive LU whose updates are
float BLAS products reduced mod p; sizes of the inner products are chunked so
that every float intermediate is an exactly representable integer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .field import GF

_BLOCKED_MIN = 96
_BASE_COLS = 8
_TRSM_BASE = 48
_ROW_CHUNK = 4096


class ContractViolation(ValueError):
    """A documented precondition of an operation was not met."""


# ---------------------------------------------------------------------------
# float helpers for prime fields


def _float_dtype(p: int, n: int):
    # trailing entries are reduced lazily, so they may absorb up to n products
    return np.float32 if (n + 64) * (p - 1) ** 2 + 2 * p < (1 << 24) else np.float64


def _exact_chunk(p: int, dtype) -> int:
    limit = (1 << 24) if dtype == np.float32 else (1 << 53)
    return max(1, (limit - 2 * p) // max(1, (p - 1) ** 2))


@numba.njit(cache=True, fastmath=False)
def _reduce_2d(x, p):
    pf = np.float64(p)
    inv = 1.0 / pf
    for i in range(x.shape[0]):
        for j in range(x.shape[1]):
            v = np.float64(x[i, j])
            r = v - pf * np.floor(v * inv)
            # guard against rounding of v * inv at exact multiples
            if r >= pf:
                r -= pf
            elif r < 0:
                r += pf
            x[i, j] = r


def _reduce(x: np.ndarray, p: int) -> None:
    """Bring exact integer floats into [0, p) in place."""
    if x.size == 0:
        return
    if x.ndim == 1:
        x = x[None, :]
    _reduce_2d(x, p)


def _fmm(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """``a @ b`` for float arrays of residues; reduced mod p only when needed for exactness."""
    dtype = a.dtype
    inner = a.shape[1]
    step = _exact_chunk(p, dtype) // 2
    if inner <= step:
        return a @ b
    acc = np.zeros((a.shape[0], b.shape[1]), dtype=dtype)
    for s in range(0, inner, step):
        acc += a[:, s:s + step] @ b[s:s + step]
        np.fmod(acc, p, out=acc)
    return acc


def _sub_product(target: np.ndarray, a: np.ndarray, b: np.ndarray, p: int, reduce: bool = True) -> None:
    """In place ``target -= a @ b``, processed in row chunks (optionally reduced)."""
    for s in range(0, target.shape[0], _ROW_CHUNK):
        block = target[s:s + _ROW_CHUNK]
        block -= _fmm(a[s:s + _ROW_CHUNK], b, p)
        if reduce:
            _reduce(block, p)


def _finv(x: float, p: int) -> float:
    return float(pow(int(x), p - 2, p))


def _trsm_lower_unit(L: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """Solve ``L X = B`` with L unit lower triangular (inputs reduced)."""
    k = L.shape[0]
    if k <= _TRSM_BASE:
        X = B.copy()
        for i in range(1, k):
            X[i] -= L[i, :i] @ X[:i]
            _reduce(X[i], p)
        return X
    h = k // 2
    X1 = _trsm_lower_unit(L[:h, :h], B[:h], p)
    B2 = B[h:].copy()
    _sub_product(B2, L[h:, :h], X1, p)
    X2 = _trsm_lower_unit(L[h:, h:], B2, p)
    return np.vstack([X1, X2])


def _trsm_upper_unit(T: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """Solve ``T X = B`` with T unit upper triangular (inputs reduced)."""
    k = T.shape[0]
    if k <= _TRSM_BASE:
        X = B.copy()
        for i in range(k - 2, -1, -1):
            X[i] -= T[i, i + 1:] @ X[i + 1:]
            _reduce(X[i], p)
        return X
    h = k // 2
    X2 = _trsm_upper_unit(T[h:, h:], B[h:], p)
    B1 = B[:h].copy()
    _sub_product(B1, T[:h, h:], X2, p)
    X1 = _trsm_upper_unit(T[:h, :h], B1, p)
    return np.vstack([X1, X2])


def _lu_inplace(W: np.ndarray, r: int, c0: int, c1: int, piv: list, p: int) -> int:
    """Recursive row-echelon elimination of columns [c0, c1) from row r down.

    Row swaps act on whole rows of ``W``; multipliers are stored below the
    pivots.  Entries right of the active columns are left unreduced (exact
    integers) and are reduced when their columns become active.  Returns the
    number of pivots found in the column range.
    """
    m = W.shape[0]
    if r >= m or c0 >= c1:
        return 0
    if c1 - c0 <= _BASE_COLS:
        slab = W[r:, c0:c1]
        _reduce(slab, p)
        k = 0
        for c in range(c0, c1):
            top = r + k
            if top >= m:
                break
            nz = np.flatnonzero(W[top:, c])
            if nz.size == 0:
                continue
            i = top + int(nz[0])
            if i != top:
                W[[top, i]] = W[[i, top]]
            inv = _finv(W[top, c], p)
            if top + 1 < m:
                lcol = np.fmod(W[top + 1:, c] * inv, p)
                W[top + 1:, c] = lcol
                if c + 1 < c1:
                    blk = W[top + 1:, c + 1:c1]
                    blk -= np.outer(lcol, W[top, c + 1:c1])
                    _reduce(blk, p)
            piv.append(c)
            k += 1
        return k
    h = c0 + (c1 - c0) // 2
    k1 = _lu_inplace(W, r, c0, h, piv, p)
    if k1:
        pc = piv[-k1:]
        L11 = np.tril(W[r:r + k1][:, pc], -1)
        A12 = W[r:r + k1, h:c1]
        _reduce(A12, p)
        U12 = _trsm_lower_unit(L11, A12, p)
        W[r:r + k1, h:c1] = U12
        if r + k1 < m:
            contiguous = pc[-1] - pc[0] == k1 - 1
            for s in range(r + k1, m, _ROW_CHUNK):
                e = min(m, s + _ROW_CHUNK)
                L21 = W[s:e, pc[0]:pc[-1] + 1] if contiguous else W[s:e][:, pc]
                W[s:e, h:c1] -= _fmm(L21, U12, p)
    k2 = _lu_inplace(W, r + k1, h, c1, piv, p)
    return k1 + k2


def _rref_blocked(A: np.ndarray, p: int, reduced: bool = True):
    dtype = _float_dtype(p, A.shape[1])
    W = np.array(A, dtype=dtype)
    piv: list[int] = []
    rk = _lu_inplace(W, 0, 0, W.shape[1], piv, p)
    if not reduced:
        return None, piv
    U = W[:rk]
    cols = np.arange(W.shape[1])
    pcs = np.asarray(piv, dtype=np.int64)
    U[cols[None, :] < pcs[:, None]] = 0
    if rk:
        diag = U[np.arange(rk), pcs]
        invs = np.array([_finv(d, p) for d in diag], dtype=dtype)
        U *= invs[:, None]
        np.fmod(U, p, out=U)
        T = np.triu(U[:, pcs], 1)
        U = _trsm_upper_unit(T, U, p)
    return U.astype(np.int64), piv


# ---------------------------------------------------------------------------
# generic (small / extension-field) elimination


@numba.njit(cache=True)
def _rref_prime_kernel(R, p):
    m, n = R.shape
    piv = np.empty(min(m, n), dtype=np.int64)
    r = 0
    for c in range(n):
        if r == m:
            break
        i = r
        while i < m and R[i, c] == 0:
            i += 1
        if i == m:
            continue
        if i != r:
            for j in range(c, n):
                t = R[r, j]
                R[r, j] = R[i, j]
                R[i, j] = t
        # Fermat inverse
        inv = 1
        b = R[r, c]
        e = p - 2
        while e > 0:
            if e & 1:
                inv = inv * b % p
            b = b * b % p
            e >>= 1
        for j in range(c, n):
            R[r, j] = R[r, j] * inv % p
        for k in range(m):
            if k == r:
                continue
            f = R[k, c]
            if f == 0:
                continue
            for j in range(c, n):
                if R[r, j] != 0:
                    R[k, j] = (R[k, j] - f * R[r, j]) % p
        piv[r] = c
        r += 1
    return r, piv


def _rref_small(A: np.ndarray, F: GF):
    if F.k == 1:
        R = np.array(A, dtype=np.int64, copy=True)
        r, piv = _rref_prime_kernel(R, F.p)
        return R[:r], [int(c) for c in piv[:r]]
    R = np.array(A, dtype=np.int64, copy=True)
    m, n = R.shape
    r = 0
    piv: list[int] = []
    for c in range(n):
        if r == m:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            R[[r, i]] = R[[i, r]]
        inv = F.inv(int(R[r, c]))
        R[r, c:] = F.vmul(inv, R[r, c:])
        rows = np.flatnonzero(R[:, c])
        rows = rows[rows != r]
        if rows.size:
            R[np.ix_(rows, np.arange(c, n))] = F.vsub(
                R[np.ix_(rows, np.arange(c, n))],
                F.vmul(R[rows, c][:, None], R[r, c:][None, :]),
            )
        piv.append(c)
        r += 1
    return R[:r], piv


def _use_blocked(F: GF, shape) -> bool:
    return F.k == 1 and min(shape) >= _BLOCKED_MIN


# ---------------------------------------------------------------------------
# public functional API


def rref(A, F: GF):
    """Reduced row echelon form.

    Returns ``(R, pivots)`` where ``R`` holds only the ``rank`` nonzero rows.
    """
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2:
        raise ContractViolation("rref expects a 2-d array")
    if A.size == 0:
        return np.zeros((0, A.shape[1]), dtype=np.int64), []
    if _use_blocked(F, A.shape):
        return _rref_blocked(A, F.p)
    return _rref_small(A, F)


def rank(A, F: GF) -> int:
    A = np.asarray(A)
    if A.size == 0:
        return 0
    if _use_blocked(F, A.shape):
        # eliminate along the shorter side
        if A.shape[0] < A.shape[1]:
            A = A.T
        return len(_rref_blocked(A, F.p, reduced=False)[1])
    return len(_rref_small(A, F)[1])


def float_dtype(p: int, ncols: int):
    """Float storage that keeps elimination over F_p exact for ``ncols`` columns."""
    return _float_dtype(p, ncols)


def pivots_float_inplace(W: np.ndarray, p: int) -> list[int]:
    """Pivot columns over F_p of a float array of residues, destroying ``W``.

    Used for very large stacked systems that are assembled directly in float
    storage to avoid a second full-size copy.  Pivots are chosen left to
    right, so the pivots below column c count the rank of the first c columns.
    """
    if W.dtype == np.float32 and _float_dtype(p, W.shape[1]) != np.float32:
        raise ContractViolation("float32 storage is not exact at this size; use float64")
    piv: list[int] = []
    if W.size:
        _lu_inplace(W, 0, 0, W.shape[1], piv, p)
    return piv


def rank_float_inplace(W: np.ndarray, p: int) -> int:
    """Rank over F_p of a float array of residues, destroying ``W``."""
    return len(pivots_float_inplace(W, p))


def kernel_basis(A, F: GF) -> np.ndarray:
    """Basis of the right kernel as the columns of an ``n x (n - rank)`` array."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[1]
    if A.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    R, piv = rref(A, F)
    pivset = set(piv)
    free = [c for c in range(n) if c not in pivset]
    K = np.zeros((n, len(free)), dtype=np.int64)
    if free:
        K[free, np.arange(len(free))] = 1
        if piv:
            K[piv, :] = F.vneg(R[:, free])
    return K


def solve(A, b, F: GF):
    """A particular solution of ``A x = b`` or ``None`` if inconsistent.

    ``b`` may be a vector or a matrix of right-hand sides (solved jointly;
    ``None`` if any column is inconsistent).  Free variables are set to zero.
    """
    A = np.asarray(A, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    vec = b.ndim == 1
    B = b[:, None] if vec else b
    if A.shape[0] != B.shape[0]:
        raise ContractViolation(f"dimension mismatch: {A.shape} vs rhs {b.shape}")
    n = A.shape[1]
    aug = np.hstack([A, B])
    R, piv = rref(aug, F)
    if any(c >= n for c in piv):
        return None
    X = np.zeros((n, B.shape[1]), dtype=np.int64)
    if piv:
        X[piv, :] = R[:, n:]
    return X[:, 0] if vec else X


def column_space(A, F: GF) -> np.ndarray:
    """Echelon basis of the column space, as columns."""
    A = np.asarray(A, dtype=np.int64)
    if A.shape[1] == 0:
        return np.zeros((A.shape[0], 0), dtype=np.int64)
    R, _ = rref(A.T, F)
    return R.T.copy()


def complement_basis(S, F: GF) -> np.ndarray:
    """Standard basis vectors completing the column space of ``S`` to the whole space.

    Returns the indices of the chosen coordinate vectors.
    """
    S = np.asarray(S, dtype=np.int64)
    n = S.shape[0]
    if S.shape[1] == 0:
        return np.arange(n)
    R, piv = rref(S.T, F)
    pivset = set(piv)
    return np.array([c for c in range(n) if c not in pivset], dtype=np.int64)


def intersect(S, T, F: GF) -> np.ndarray:
    """Basis (columns) of the intersection of two column spaces."""
    S = np.asarray(S, dtype=np.int64)
    T = np.asarray(T, dtype=np.int64)
    if S.shape[1] == 0 or T.shape[1] == 0:
        return np.zeros((S.shape[0], 0), dtype=np.int64)
    K = kernel_basis(np.hstack([S, F.vneg(T)]), F)
    return column_space(F.matmul(S, K[: S.shape[1]]), F)


def same_span(S, T, F: GF) -> bool:
    S = np.asarray(S, dtype=np.int64)
    T = np.asarray(T, dtype=np.int64)
    rs, rt = rank(S, F), rank(T, F)
    return rs == rt and rank(np.hstack([S, T]), F) == rs


def quotient(S, F: GF, n: int):
    """Coordinates on ``F^n / span(S)``.

    Returns ``(proj, section)`` where ``proj`` (q x n) maps a vector to its
    class in a fixed basis of the quotient and ``section`` (n x q) picks
    coordinate representatives; ``proj @ section = I``.
    """
    S = np.asarray(S, dtype=np.int64).reshape(n, -1)
    if S.shape[1] == 0:
        return np.eye(n, dtype=np.int64), np.eye(n, dtype=np.int64)
    R, piv = rref(S.T, F)
    pivset = set(piv)
    free = [c for c in range(n) if c not in pivset]
    q = len(free)
    section = np.zeros((n, q), dtype=np.int64)
    section[free, np.arange(q)] = 1
    # v = sum_i coeff_i * R_i + sum_f proj_f e_f ; reading free coords after
    # clearing pivots gives proj = v[free] - R[:, free]^T v[piv]
    proj = np.zeros((q, n), dtype=np.int64)
    proj[np.arange(q), free] = 1
    if piv:
        proj[:, piv] = F.vneg(R[:, free].T)
    return proj, section


def inverse(A, F: GF) -> np.ndarray:
    """Inverse of a square matrix; raises ContractViolation when singular."""
    A = np.asarray(A, dtype=np.int64)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ContractViolation("inverse of a non-square matrix")
    X = solve(A, np.eye(n, dtype=np.int64), F)
    if X is None or rank(A, F) != n:
        raise ContractViolation("matrix is singular")
    return X


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def random_matrix(F: GF, rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return F.random(rng, (rows, cols)).astype(np.int64)


# ---------------------------------------------------------------------------
# value type


@dataclass(frozen=True, eq=False)
class ExactMatrix:
    """A dense matrix over a finite field (immutable by convention)."""

    field: GF
    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=np.int64)
        if arr.ndim != 2:
            raise ContractViolation("ExactMatrix needs a 2-d array")
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def from_rows(cls, field: GF, rows) -> ExactMatrix:
        arr = np.array(rows, dtype=np.int64) % field.q if field.k == 1 else np.array(rows, dtype=np.int64)
        return cls(field, arr)

    @classmethod
    def zeros(cls, field: GF, rows: int, cols: int) -> ExactMatrix:
        return cls(field, np.zeros((rows, cols), dtype=np.int64))

    @classmethod
    def eye(cls, field: GF, n: int) -> ExactMatrix:
        return cls(field, np.eye(n, dtype=np.int64))

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def __matmul__(self, other):
        if isinstance(other, ExactMatrix):
            return ExactMatrix(self.field, self.field.matmul(self.entries, other.entries))
        return self.field.matmul(self.entries, np.asarray(other, dtype=np.int64))

    def __add__(self, other: ExactMatrix) -> ExactMatrix:
        return ExactMatrix(self.field, self.field.vadd(self.entries, other.entries))

    def __sub__(self, other: ExactMatrix) -> ExactMatrix:
        return ExactMatrix(self.field, self.field.vsub(self.entries, other.entries))

    def __eq__(self, other):
        return (
            isinstance(other, ExactMatrix)
            and other.field == self.field
            and other.entries.shape == self.entries.shape
            and bool(np.array_equal(other.entries, self.entries))
        )

    def rank(self) -> int:
        return rank(self.entries, self.field)

    def kernel_basis(self) -> list[np.ndarray]:
        K = kernel_basis(self.entries, self.field)
        return [K[:, i].copy() for i in range(K.shape[1])]

    def solve(self, b):
        b = np.asarray(b, dtype=np.int64)
        if b.shape[0] != self.rows:
            raise ContractViolation(f"rhs length {b.shape[0]} != rows {self.rows}")
        return solve(self.entries, b, self.field)

    def rref(self):
        R, piv = rref(self.entries, self.field)
        return ExactMatrix(self.field, R), piv

    def __repr__(self):
        return f"ExactMatrix({self.field!r}, {self.entries.tolist()})"
