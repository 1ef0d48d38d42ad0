"""Restricted Lie algebras, invariant forms and nilpotent data.

Elements are coordinate vectors (integer field codes) with respect to an
ordered basis.  Structure constants are stored as ``c[i, j, k]`` with
``[x_i, x_j] = sum_k c[i, j, k] x_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from typing import Optional, Sequence

import numpy as np

from . import linalg as la
from .field import GF, get_field


class LieAlgebraError(ValueError):
    """Invalid algebra request (for instance a degenerate trace form)."""


class GradingError(ValueError):
    """The supplied weights do not define a compatible grading with e in degree 2."""


class ConstructionError(RuntimeError):
    """A datum construction produced an inconsistent object."""


class ReductionError(RuntimeError):
    """Symplectic reduction met a degenerate form."""


def _mm(F: GF, a, b) -> np.ndarray:
    return F.matmul(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))


def _matpow(F: GF, M: np.ndarray, e: int) -> np.ndarray:
    result = np.eye(M.shape[0], dtype=np.int64)
    base = M
    while e:
        if e & 1:
            result = _mm(F, result, base)
        base = _mm(F, base, base)
        e >>= 1
    return result


@dataclass(frozen=True, eq=False)
class RestrictedLieAlgebra:
    field: GF
    labels: tuple[str, ...]
    structure: np.ndarray  # (n, n, n)
    ppower: np.ndarray  # (n, n); row i holds x_i^[p]
    gram: np.ndarray  # (n, n)
    matrices: Optional[np.ndarray] = None  # (n, N, N) realisation
    name: str = ""
    _coord_rows: Optional[np.ndarray] = dc_field(default=None, repr=False)
    _coord_inv: Optional[np.ndarray] = dc_field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return len(self.labels)

    @property
    def p(self) -> int:
        return self.field.p

    # basic operations ----------------------------------------------------

    def basis_vector(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[i] = 1
        return v

    def ad_basis(self) -> np.ndarray:
        """Stack of ad(x_i); ``ad[i][:, j]`` are the coordinates of [x_i, x_j]."""
        return np.ascontiguousarray(np.transpose(self.structure, (0, 2, 1)))

    def ad(self, x) -> np.ndarray:
        n = self.dim
        x = np.asarray(x, dtype=np.int64).reshape(1, n)
        flat = self.ad_basis().reshape(n, n * n)
        return _mm(self.field, x, flat).reshape(n, n)

    def bracket(self, x, y) -> np.ndarray:
        return _mm(self.field, self.ad(x), np.asarray(y, dtype=np.int64).reshape(-1, 1))[:, 0]

    def form(self, x, y) -> int:
        F = self.field
        x = np.asarray(x, dtype=np.int64).reshape(1, -1)
        y = np.asarray(y, dtype=np.int64).reshape(-1, 1)
        return int(_mm(F, _mm(F, x, self.gram), y)[0, 0])

    def kappa(self, e) -> np.ndarray:
        """The linear form x -> (e, x), as its values on the basis."""
        e = np.asarray(e, dtype=np.int64).reshape(1, -1)
        return _mm(self.field, e, self.gram)[0]

    # matrices -------------------------------------------------------------

    def to_matrix(self, x) -> np.ndarray:
        if self.matrices is None:
            raise LieAlgebraError("algebra has no matrix realisation")
        n, N, _ = self.matrices.shape
        x = np.asarray(x, dtype=np.int64).reshape(1, n)
        return _mm(self.field, x, self.matrices.reshape(n, N * N)).reshape(N, N)

    def from_matrix(self, M) -> np.ndarray:
        if self.matrices is None:
            raise LieAlgebraError("algebra has no matrix realisation")
        rows, inv = self._coordinate_map()
        flat = np.asarray(M, dtype=np.int64).reshape(-1)
        x = _mm(self.field, inv, flat[rows].reshape(-1, 1))[:, 0]
        if not np.array_equal(self.to_matrix(x), np.asarray(M) % self.field.q if self.field.k == 1 else M):
            raise LieAlgebraError("matrix is not in the span of the basis")
        return x

    def _coordinate_map(self):
        if self._coord_rows is None:
            n, N, _ = self.matrices.shape
            flat = self.matrices.reshape(n, N * N)  # row i = flattened x_i
            _, piv = la.rref(flat, self.field)
            rows = np.asarray(piv, dtype=np.int64)
            if len(rows) != n:
                raise LieAlgebraError("basis matrices are linearly dependent")
            inv = la.inverse(flat[:, rows].T, self.field)
            object.__setattr__(self, "_coord_rows", rows)
            object.__setattr__(self, "_coord_inv", inv)
        return self._coord_rows, self._coord_inv

    def matrix_p_power(self, x) -> np.ndarray:
        return self.from_matrix(_matpow(self.field, self.to_matrix(x), self.p))

    # p-structure ------------------------------------------------------------

    def jacobson_p_power(self, x) -> np.ndarray:
        """p-th power of an arbitrary element from the basis p-powers.

        Adds one basis term at a time using
        ``(a + b)^[p] = a^[p] + b^[p] + sum_i s_i(a, b)``, where ``i * s_i`` is the
        coefficient of ``t^(i-1)`` in ``ad(t a + b)^(p-1)(a)``.
        """
        F = self.field
        p = self.p
        n = self.dim
        x = np.asarray(x, dtype=np.int64)
        acc = np.zeros(n, dtype=np.int64)
        acc_pp = np.zeros(n, dtype=np.int64)
        for k in np.flatnonzero(x):
            c = int(x[k])
            b = np.zeros(n, dtype=np.int64)
            b[k] = c
            b_pp = F.vmul(F.pow(c, p), self.ppower[k])
            if not acc.any():
                acc, acc_pp = b, b_pp
                continue
            ad_a = self.ad(acc)
            ad_b = self.ad(b)
            # coefficients of t^0 .. t^(p-1) of ad(t a + b)^j (a)
            poly = [acc.copy()]
            for _ in range(p - 1):
                nxt = [np.zeros(n, dtype=np.int64) for _ in range(len(poly) + 1)]
                for deg, v in enumerate(poly):
                    nxt[deg + 1] = F.vadd(nxt[deg + 1], _mm(F, ad_a, v.reshape(-1, 1))[:, 0])
                    nxt[deg] = F.vadd(nxt[deg], _mm(F, ad_b, v.reshape(-1, 1))[:, 0])
                poly = nxt
            corr = np.zeros(n, dtype=np.int64)
            for i in range(1, p):
                corr = F.vadd(corr, F.vmul(F.inv(F.embed(i)), poly[i - 1]))
            acc_pp = F.vadd(F.vadd(acc_pp, b_pp), corr)
            acc = F.vadd(acc, b)
        return acc_pp

    # axioms -----------------------------------------------------------------

    def check_antisymmetry(self) -> tuple[bool, dict]:
        F = self.field
        c = self.structure
        sym = F.vadd(c, np.transpose(c, (1, 0, 2)))
        bad = np.argwhere(sym.any(axis=2))
        ok = bad.size == 0
        return ok, {} if ok else {"pair": [int(v) for v in bad[0]]}

    def check_jacobi(self) -> tuple[bool, dict]:
        """ad is a homomorphism: ad([x_i, x_j]) = [ad x_i, ad x_j] for all basis pairs."""
        F = self.field
        A = self.ad_basis()
        n = self.dim
        flat = A.reshape(n, n * n)
        for i in range(n):
            brackets = self.structure[i]  # rows: [x_i, x_j]
            lhs = _mm(F, brackets, flat).reshape(n, n, n)
            for j in range(n):
                comm = F.vsub(_mm(F, A[i], A[j]), _mm(F, A[j], A[i]))
                if not np.array_equal(lhs[j], comm):
                    return False, {"pair": [i, j]}
        return True, {"pairs": n * n}

    def check_restricted(self) -> tuple[bool, dict]:
        F = self.field
        A = self.ad_basis()
        for i in range(self.dim):
            if not np.array_equal(_matpow(F, A[i], self.p), self.ad(self.ppower[i])):
                return False, {"basis_index": i}
        return True, {"checked": self.dim}

    def check_form(self) -> tuple[bool, dict]:
        F = self.field
        G = self.gram
        rk = la.rank(G, F)
        if rk != self.dim:
            return False, {"gram_rank": rk}
        if not np.array_equal(G, G.T):
            return False, {"symmetric": False}
        A = self.ad_basis()
        for i in range(self.dim):
            if F.vadd(_mm(F, A[i].T, G), _mm(F, G, A[i])).any():
                return False, {"basis_index": i}
        return True, {"gram_rank": rk}

    def centre(self) -> np.ndarray:
        n = self.dim
        stacked = self.ad_basis().reshape(n * n, n)
        return la.kernel_basis(stacked, self.field)

    def derived(self) -> np.ndarray:
        n = self.dim
        return la.column_space(self.structure.reshape(n * n, n).T, self.field)

    def check_centre_split(self) -> tuple[bool, dict]:
        Z = self.centre()
        D = self.derived()
        inter = la.intersect(Z, D, self.field).shape[1]
        ok = inter == 0 and Z.shape[1] + D.shape[1] == self.dim
        return ok, {"dim_centre": Z.shape[1], "dim_derived": D.shape[1], "dim_intersection": inter}

    # derived algebras ---------------------------------------------------------

    def change_basis(self, P, labels: Optional[Sequence[str]] = None) -> RestrictedLieAlgebra:
        """The same algebra in the basis given by the columns of ``P``."""
        F = self.field
        n = self.dim
        P = np.asarray(P, dtype=np.int64)
        Pinv = la.inverse(P, F)
        c = self.structure
        # t1[a, j, k] = sum_i P[i, a] c[i, j, k]
        t1 = _mm(F, P.T, c.reshape(n, n * n)).reshape(n, n, n)
        # t2[a, b, k] = sum_j P[j, b] t1[a, j, k]
        t2 = np.stack([_mm(F, P.T, t1[a]) for a in range(n)])
        new_c = _mm(F, t2.reshape(n * n, n), Pinv.T).reshape(n, n, n)
        if self.matrices is not None:
            N = self.matrices.shape[1]
            new_m = _mm(F, P.T, self.matrices.reshape(n, N * N)).reshape(n, N, N)
        else:
            new_m = None
        pp = np.stack([self.jacobson_p_power(P[:, a]) for a in range(n)])
        new_pp = _mm(F, pp, Pinv.T)
        new_g = _mm(F, _mm(F, P.T, self.gram), P)
        if labels is None:
            labels = [f"y{a + 1}" for a in range(n)]
        return RestrictedLieAlgebra(F, tuple(labels), new_c, new_pp, new_g, new_m, self.name)

    def permuted(self, perm: Sequence[int]) -> RestrictedLieAlgebra:
        """Reorder the basis: new basis vector a is old basis vector ``perm[a]``."""
        perm = list(perm)
        c = self.structure[np.ix_(perm, perm, perm)]
        pp = self.ppower[perm][:, perm]
        g = self.gram[np.ix_(perm, perm)]
        m = None if self.matrices is None else self.matrices[perm]
        return RestrictedLieAlgebra(
            self.field, tuple(self.labels[i] for i in perm), c.copy(), pp.copy(), g.copy(),
            None if m is None else m.copy(), self.name,
        )

    def with_corrupted_structure(self, i: int, j: int, k: int) -> RestrictedLieAlgebra:
        c = self.structure.copy()
        c[i, j, k] = self.field.add(int(c[i, j, k]), 1)
        return replace(self, structure=c, _coord_rows=None, _coord_inv=None)

    def with_corrupted_ppower(self, i: int, k: int) -> RestrictedLieAlgebra:
        pp = self.ppower.copy()
        pp[i, k] = self.field.add(int(pp[i, k]), 1)
        return replace(self, ppower=pp, _coord_rows=None, _coord_inv=None)


# ---------------------------------------------------------------------------
# builders


def _from_matrices(F: GF, labels, mats: np.ndarray, name: str) -> RestrictedLieAlgebra:
    n, N, _ = mats.shape
    g = RestrictedLieAlgebra(
        F, tuple(labels), np.zeros((n, n, n), dtype=np.int64), np.zeros((n, n), dtype=np.int64),
        np.zeros((n, n), dtype=np.int64), mats, name,
    )
    flat = mats.reshape(n, N * N)
    c = np.zeros((n, n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            comm = F.vsub(_mm(F, mats[i], mats[j]), _mm(F, mats[j], mats[i]))
            c[i, j] = g.from_matrix(comm)
    pp = np.stack([g.from_matrix(_matpow(F, mats[i], F.p)) for i in range(n)])
    # trace form: tr(x_i x_j) = sum_{a,b} (x_i)_{ab} (x_j)_{ba}
    gram = _mm(F, flat, np.transpose(mats, (0, 2, 1)).reshape(n, N * N).T)
    return RestrictedLieAlgebra(F, tuple(labels), c, pp, gram, mats, name)


def build_gl(n: int, p: int, k: int = 1) -> RestrictedLieAlgebra:
    """gl_n with matrix units E_ij in lexicographic order and the trace form."""
    F = get_field(p, k)
    if n < 1:
        raise LieAlgebraError("rank must be positive")
    mats = np.zeros((n * n, n, n), dtype=np.int64)
    labels = []
    for a in range(n):
        for b in range(n):
            mats[a * n + b, a, b] = 1
            labels.append(f"E{a + 1}{b + 1}")
    return _from_matrices(F, labels, mats, f"gl{n}")


def build_sl(n: int, p: int, k: int = 1) -> RestrictedLieAlgebra:
    """sl_n with off-diagonal matrix units followed by H_i = E_ii - E_(i+1)(i+1)."""
    F = get_field(p, k)
    if n < 2:
        raise LieAlgebraError("sl_n needs n >= 2")
    if n % p == 0:
        raise LieAlgebraError(f"trace form on sl_{n} is degenerate when p={p} divides {n}")
    mats = []
    labels = []
    for a in range(n):
        for b in range(n):
            if a != b:
                m = np.zeros((n, n), dtype=np.int64)
                m[a, b] = 1
                mats.append(m)
                labels.append(f"E{a + 1}{b + 1}")
    for a in range(n - 1):
        m = np.zeros((n, n), dtype=np.int64)
        m[a, a] = 1
        m[a + 1, a + 1] = F.neg(1)
        mats.append(m)
        labels.append(f"H{a + 1}")
    return _from_matrices(F, labels, np.stack(mats), f"sl{n}")


def build_algebra(family: str, n: int, p: int, k: int = 1) -> RestrictedLieAlgebra:
    if family == "gl":
        return build_gl(n, p, k)
    if family == "sl":
        return build_sl(n, p, k)
    raise LieAlgebraError(f"unknown family {family!r}")


def partition_data(g: RestrictedLieAlgebra, partition: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """Nilpotent element and grading weights attached to a partition of the matrix size.

    The nilpotent is the sum of superdiagonal units inside consecutive Jordan
    blocks; a block of size s carries diagonal weights s-1, s-3, ..., 1-s.
    """
    if g.matrices is None:
        raise LieAlgebraError("partition data needs a matrix realisation")
    N = g.matrices.shape[1]
    partition = [int(b) for b in partition]
    if sum(partition) != N or any(b < 1 for b in partition):
        raise LieAlgebraError(f"partition {partition} does not sum to {N}")
    E = np.zeros((N, N), dtype=np.int64)
    h = []
    start = 0
    for size in partition:
        for t in range(size - 1):
            E[start + t, start + t + 1] = 1
        h.extend(size - 1 - 2 * t for t in range(size))
        start += size
    e = g.from_matrix(E)
    weights = matrix_weights(g, h)
    return e, weights


def matrix_weights(g: RestrictedLieAlgebra, h: Sequence[int]) -> np.ndarray:
    """Weights of basis vectors under the diagonal cocharacter with entries ``h``.

    Each basis matrix must be homogeneous: all nonzero entries (i, j) share
    h_i - h_j.
    """
    w = np.zeros(g.dim, dtype=np.int64)
    for a in range(g.dim):
        idx = np.argwhere(g.matrices[a])
        vals = {int(h[i] - h[j]) for i, j in idx}
        if len(vals) != 1:
            raise GradingError(f"basis vector {g.labels[a]} is not homogeneous")
        w[a] = vals.pop()
    return w


# ---------------------------------------------------------------------------
# nilpotent data


def symplectic_isotropic(Phi: np.ndarray, F: GF) -> np.ndarray:
    """Maximal totally isotropic subspace of a nondegenerate alternating form.

    Greedy in basis order: take the first remaining vector, pair it with the
    first remaining partner of nonzero pairing, and project everything else
    off the hyperbolic plane.  Returns the chosen vectors as columns.
    """
    m = Phi.shape[0]
    vecs = [np.eye(m, dtype=np.int64)[:, i] for i in range(m)]

    def pair(u, v):
        return int(_mm(F, _mm(F, u.reshape(1, -1), Phi), v.reshape(-1, 1))[0, 0])

    chosen = []
    while vecs:
        v = vecs.pop(0)
        partner = None
        for idx, w in enumerate(vecs):
            if pair(v, w):
                partner = idx
                break
        if partner is None:
            raise ReductionError("form is degenerate on the degree -1 piece")
        w = vecs.pop(partner)
        vw = pair(v, w)
        inv = F.inv(vw)
        rest = []
        for u in vecs:
            alpha = F.neg(F.mul(pair(u, w), inv))
            beta = F.mul(pair(u, v), inv)
            rest.append(F.vadd(F.vadd(u, F.vmul(alpha, v)), F.vmul(beta, w)))
        vecs = rest
        chosen.append(v)
    if not chosen:
        return np.zeros((m, 0), dtype=np.int64)
    return np.stack(chosen, axis=1)


@dataclass(frozen=True, eq=False)
class NilpotentDatum:
    algebra: RestrictedLieAlgebra
    e: np.ndarray
    weights: np.ndarray
    chi: np.ndarray  # values on the standard basis
    m_basis: np.ndarray  # columns, standard coordinates
    centralizer: np.ndarray  # graded basis of g_e, columns
    complement: np.ndarray  # x_1..x_s, columns
    d: int
    adapted: RestrictedLieAlgebra  # basis x_1..x_s, then m-basis
    P: np.ndarray  # adapted -> standard coordinates
    Pinv: np.ndarray
    adapted_weights: np.ndarray
    partition: tuple[int, ...] = ()

    @property
    def field(self) -> GF:
        return self.algebra.field

    @property
    def p(self) -> int:
        return self.algebra.p

    @property
    def n(self) -> int:
        return self.algebra.dim

    @property
    def D(self) -> int:
        return self.p ** self.d

    @property
    def dim_m(self) -> int:
        return self.m_basis.shape[1]

    @property
    def s(self) -> int:
        """Dimension of the complement of m, i.e. of m-perp."""
        return self.n - self.dim_m

    @property
    def chi_adapted(self) -> np.ndarray:
        return _mm(self.field, self.chi.reshape(1, -1), self.P)[0]

    def to_adapted(self, x) -> np.ndarray:
        return _mm(self.field, self.Pinv, np.asarray(x, dtype=np.int64).reshape(-1, 1))[:, 0]

    def from_adapted(self, x) -> np.ndarray:
        return _mm(self.field, self.P, np.asarray(x, dtype=np.int64).reshape(-1, 1))[:, 0]

    def form_to_adapted(self, eta) -> np.ndarray:
        return _mm(self.field, np.asarray(eta, dtype=np.int64).reshape(1, -1), self.P)[0]

    def form_from_adapted(self, eta_ad) -> np.ndarray:
        return _mm(self.field, np.asarray(eta_ad, dtype=np.int64).reshape(1, -1), self.Pinv)[0]

    def chi_matrix(self) -> np.ndarray:
        """(chi([x_i, x_j]))_{ij} on the standard basis."""
        n = self.n
        c = self.algebra.structure.reshape(n * n, n)
        return _mm(self.field, c, self.chi.reshape(-1, 1)).reshape(n, n)

    def random_eta(self, rng: np.random.Generator) -> np.ndarray:
        """A random point of chi + m-perp, as values on the standard basis."""
        vals = self.chi_adapted.copy()
        vals[: self.s] = self.field.random(rng, self.s)
        return self.form_from_adapted(vals)

    def check_invariants(self) -> dict[str, tuple[bool, dict]]:
        F = self.field
        g = self.algebra
        out = {}
        nz = np.flatnonzero(self.e)
        out["e_degree_two"] = (bool(np.all(self.weights[nz] == 2)), {"support": [int(i) for i in nz]})
        cdeg = [_vector_degree(self.centralizer[:, j], self.weights) for j in range(self.centralizer.shape[1])]
        out["centralizer_nonnegative"] = (all(d >= 0 for d in cdeg), {"degrees": cdeg})
        rk = la.rank(self.chi_matrix(), F)
        out["dim_m_equals_d"] = (
            rk % 2 == 0 and self.dim_m == rk // 2 == self.d,
            {"dim_m": self.dim_m, "rank": rk},
        )
        out["centralizer_dim"] = (
            self.centralizer.shape[1] == self.n - 2 * self.d,
            {"dim_centralizer": self.centralizer.shape[1]},
        )
        M = self.m_basis
        bad = 0
        for a in range(M.shape[1]):
            for b in range(M.shape[1]):
                if int(_dot(F, self.chi, g.bracket(M[:, a], M[:, b]))):
                    bad += 1
        out["chi_vanishes_on_bracket"] = (bad == 0, {"violations": bad})
        badp = 0
        for a in range(M.shape[1]):
            if int(_dot(F, self.chi, g.jacobson_p_power(M[:, a]))):
                badp += 1
        out["chi_vanishes_on_ppower"] = (badp == 0, {"violations": badp})
        nil = True
        for a in range(M.shape[1]):
            A = g.ad(M[:, a])
            if _matpow(F, A, self.n).any():
                nil = False
        out["m_ad_nilpotent"] = (nil, {"checked": M.shape[1]})
        return out


def _dot(F: GF, a, b) -> int:
    return int(_mm(F, np.asarray(a).reshape(1, -1), np.asarray(b).reshape(-1, 1))[0, 0])


def _vector_degree(v, weights) -> int:
    nz = np.flatnonzero(v)
    degs = {int(weights[i]) for i in nz}
    if len(degs) != 1:
        raise GradingError("vector is not homogeneous")
    return degs.pop()


def centralizer(g: RestrictedLieAlgebra, e, weights=None) -> np.ndarray:
    """Basis of ker(ad e), graded by ``weights`` when given."""
    F = g.field
    A = g.ad(e)
    if weights is None:
        return la.kernel_basis(A, F)
    cols = []
    for deg in sorted(set(int(w) for w in weights)):
        idx = np.flatnonzero(weights == deg)
        K = la.kernel_basis(A[:, idx], F)
        for j in range(K.shape[1]):
            v = np.zeros(g.dim, dtype=np.int64)
            v[idx] = K[:, j]
            cols.append(v)
    if not cols:
        return np.zeros((g.dim, 0), dtype=np.int64)
    return np.stack(cols, axis=1)


def _check_grading(g: RestrictedLieAlgebra, weights: np.ndarray) -> None:
    nz = np.argwhere(g.structure)
    for i, j, k in nz:
        if weights[k] != weights[i] + weights[j]:
            raise GradingError(
                f"[{g.labels[i]}, {g.labels[j]}] has a component in {g.labels[k]} of the wrong degree"
            )


def build_nilpotent_datum(
    g: RestrictedLieAlgebra, e, weights, partition: Sequence[int] = ()
) -> NilpotentDatum:
    F = g.field
    n = g.dim
    e = np.asarray(e, dtype=np.int64)
    weights = np.asarray(weights, dtype=np.int64)
    if weights.shape != (n,):
        raise GradingError("one weight per basis vector is required")
    _check_grading(g, weights)
    if np.any(weights[np.flatnonzero(e)] != 2):
        raise GradingError("e is not in degree 2")
    ge = centralizer(g, e, weights)
    for j in range(ge.shape[1]):
        if _vector_degree(ge[:, j], weights) < 0:
            raise GradingError("centralizer of e meets negative degrees")
    chi = g.kappa(e)

    # isotropic subspace of g(-1)
    idx = np.flatnonzero(weights == -1)
    if idx.size:
        c = g.structure[np.ix_(idx, idx)]  # (a, b, k)
        Phi = _mm(F, c.reshape(idx.size * idx.size, n), chi.reshape(-1, 1)).reshape(idx.size, idx.size)
        L = symplectic_isotropic(Phi, F)
        ell = np.zeros((n, L.shape[1]), dtype=np.int64)
        ell[idx] = L
    else:
        ell = np.zeros((n, 0), dtype=np.int64)
    low = [np.eye(n, dtype=np.int64)[:, i] for i in range(n) if weights[i] <= -2]
    m_cols = [ell[:, j] for j in range(ell.shape[1])] + low
    m_basis = np.stack(m_cols, axis=1) if m_cols else np.zeros((n, 0), dtype=np.int64)

    chi_mat = _mm(F, g.structure.reshape(n * n, n), chi.reshape(-1, 1)).reshape(n, n)
    rk = la.rank(chi_mat, F)
    if rk % 2:
        raise ConstructionError("chi-form has odd rank")
    d = rk // 2
    if m_basis.shape[1] != d:
        raise ConstructionError(f"dim m = {m_basis.shape[1]} but d(chi) = {d}")
    if ge.shape[1] != n - 2 * d:
        raise ConstructionError("centralizer dimension disagrees with the chi-form rank")

    # graded complement of m + g_e, chosen greedily from the standard basis
    span = np.hstack([m_basis, ge])
    cur = la.rank(span, F) if span.shape[1] else 0
    extra = []
    for deg in sorted(set(int(w) for w in weights)):
        for i in np.flatnonzero(weights == deg):
            v = np.eye(n, dtype=np.int64)[:, i]
            trial = np.hstack([span, v[:, None]])
            r = la.rank(trial, F)
            if r > cur:
                span, cur = trial, r
                extra.append(v)
    if len(extra) != d or cur != n:
        raise ConstructionError("could not complete m + g_e to a basis")
    comp_cols = extra + [ge[:, j] for j in range(ge.shape[1])]
    complement = np.stack(comp_cols, axis=1) if comp_cols else np.zeros((n, 0), dtype=np.int64)
    P = np.hstack([complement, m_basis])
    Pinv = la.inverse(P, F)
    labels = [f"x{j + 1}" for j in range(complement.shape[1])] + [f"y{j + 1}" for j in range(m_basis.shape[1])]
    adapted = g.change_basis(P, labels)
    aw = np.array([_vector_degree(P[:, a], weights) for a in range(n)], dtype=np.int64)
    return NilpotentDatum(
        algebra=g, e=e, weights=weights, chi=chi, m_basis=m_basis, centralizer=ge,
        complement=complement, d=d, adapted=adapted, P=P, Pinv=Pinv, adapted_weights=aw,
        partition=tuple(partition),
    )


def datum_from_partition(g: RestrictedLieAlgebra, partition: Sequence[int]) -> NilpotentDatum:
    e, w = partition_data(g, partition)
    return build_nilpotent_datum(g, e, w, partition)
