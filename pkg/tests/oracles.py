"""Reference computations in plain Python integers, independent of the package."""

from __future__ import annotations

from itertools import product


def rank_mod_p(rows, p: int) -> int:
    """Rank of an integer matrix over F_p by textbook elimination on lists."""
    M = [[int(x) % p for x in r] for r in rows]
    if not M:
        return 0
    ncols = len(M[0])
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        inv = pow(M[r][c], p - 2, p)
        M[r] = [x * inv % p for x in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c]
                M[i] = [(a - f * b) % p for a, b in zip(M[i], M[r])]
        r += 1
        if r == len(M):
            break
    return r


def matmul_mod_p(A, B, p: int):
    return [[sum(a * b for a, b in zip(row, col)) % p for col in zip(*B)] for row in A]


def matpow_mod_p(A, e: int, p: int):
    n = len(A)
    out = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(e):
        out = matmul_mod_p(out, A, p)
    return out


def gl_unit(n: int, i: int, j: int):
    return [[int(a == i and b == j) for b in range(n)] for a in range(n)]


def commutant_dim(mats, p: int) -> int:
    """dim {X : X A = A X for all A} by building the n^2-unknown system directly."""
    n = len(mats[0])
    rows = []
    for A in mats:
        for i, j in product(range(n), range(n)):
            # (X A - A X)[i, j] as a linear form in X[a, b] (index a*n + b)
            row = [0] * (n * n)
            for k in range(n):
                row[i * n + k] += A[k][j]
                row[k * n + j] -= A[i][k]
            rows.append(row)
    return n * n - rank_mod_p(rows, p)


def centralizer_dim_gl(E, p: int) -> int:
    """dim of {X : [E, X] = 0} in gl_n over F_p."""
    return commutant_dim([E], p)
