"""Gelfand-Graev modules, finite modules and the coinvariant functor."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from math import comb
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import linalg as la
from . import sparse as sps
from .field import GF
from .linalg import ContractViolation
from .liealg import NilpotentDatum, RestrictedLieAlgebra
from .penv import FieldCoeffs, PolyCoeffs, Straightener, check_eta
from .poly import MultiPoly, monomials_up_to


# ---------------------------------------------------------------------------
# finite modules


@dataclass(frozen=True, eq=False)
class FiniteModule:
    """A finite-dimensional representation given by sparse action matrices.

    ``action[i]`` is the matrix of the i-th basis vector of ``algebra``.
    """

    algebra: RestrictedLieAlgebra
    action: tuple
    label: str = ""

    @property
    def field(self) -> GF:
        return self.algebra.field

    @property
    def dim(self) -> int:
        return self.action[0].shape[0] if self.action else 0

    def dense(self, i: int) -> np.ndarray:
        return np.asarray(self.action[i].toarray(), dtype=np.int64)

    def rho(self, x):
        """Sparse matrix of a Lie algebra element (coordinates in ``algebra``'s basis)."""
        return sps.combine(self.field, list(self.action), [int(c) for c in x])

    def apply(self, i: int, X: np.ndarray) -> np.ndarray:
        return sps.spmm(self.field, self.action[i], X)

    def xi_matrix(self, i: int):
        """Action of x_i^p - x_i^[p]."""
        F = self.field
        A = self.action[i]
        power = A
        for _ in range(F.p - 1):
            power = sps.spsp(F, power, A)
        return sps.sub(F, power, self.rho(self.algebra.ppower[i]))

    def check_brackets(self) -> tuple[bool, dict]:
        F = self.field
        n = self.algebra.dim
        c = self.algebra.structure
        for i in range(n):
            for j in range(i + 1, n):
                comm = sps.sub(F, sps.spsp(F, self.action[i], self.action[j]), sps.spsp(F, self.action[j], self.action[i]))
                target = self.rho(c[i, j])
                if not sps.is_zero(sps.sub(F, comm, target)):
                    return False, {"pair": [i, j]}
        return True, {"pairs": n * (n - 1) // 2}

    def quotient_by(self, S: np.ndarray, label: str = "") -> tuple[FiniteModule, np.ndarray, np.ndarray]:
        """Quotient by the span of the columns of ``S`` (assumed invariant)."""
        F = self.field
        proj, section = la.quotient(S, F, self.dim)
        mats = []
        for i in range(self.algebra.dim):
            img = self.apply(i, section)
            mats.append(sp.csc_matrix(F.matmul(proj, img)))
        if proj.shape[0] == 0:
            mats = [sp.csc_matrix((0, 0), dtype=np.int64) for _ in range(self.algebra.dim)]
        return FiniteModule(self.algebra, tuple(mats), label), proj, section

    def is_invariant(self, S: np.ndarray) -> bool:
        F = self.field
        if S.shape[1] == 0:
            return True
        r = la.rank(S, F)
        for i in range(self.algebra.dim):
            if la.rank(np.hstack([S, self.apply(i, S)]), F) != r:
                return False
        return True


def direct_sum(M: FiniteModule, N: FiniteModule, label: str = "") -> FiniteModule:
    mats = tuple(sp.block_diag([a, b], format="csc") for a, b in zip(M.action, N.action))
    return FiniteModule(M.algebra, mats, label or f"{M.label}+{N.label}")


# ---------------------------------------------------------------------------
# Gelfand-Graev modules


@dataclass(frozen=True, eq=False)
class GGGModule(FiniteModule):
    """Reduced Gelfand-Graev module with basis the complement monomials x^a (1 (x) 1).

    ``action`` refers to the adapted basis of the datum.
    """

    datum: Optional[NilpotentDatum] = None
    eta: Optional[np.ndarray] = None
    engine: Optional[Straightener] = dc_field(default=None, repr=False)

    @property
    def size(self) -> int:
        return self.dim

    def rho_std(self, x):
        return self.rho(self.datum.to_adapted(x))

    def generator_vector(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[0] = 1
        return v

    def monomial_apply(self, a: int, X: np.ndarray) -> np.ndarray:
        """x^a applied to the columns of X."""
        eng = self.engine
        digs = eng.digits(a)
        for t in range(eng.s - 1, -1, -1):
            for _ in range(digs[t]):
                X = self.apply(t, X)
        return X

    def check_generator(self) -> tuple[bool, dict]:
        F = self.field
        dat = self.datum
        v = self.generator_vector().reshape(-1, 1)
        chi = dat.chi_adapted
        for k in range(dat.s, dat.n):
            w = F.vsub(self.apply(k, v), F.vmul(int(chi[k]), v))
            if w.any():
                return False, {"m_index": k - dat.s}
        return True, {"m_checked": dat.dim_m}


def _straightener_reduced(datum: NilpotentDatum, eta) -> Straightener:
    F = datum.field
    eta_ad = datum.form_to_adapted(eta)
    chi_ad = datum.chi_adapted
    return Straightener(
        datum.adapted, datum.s, [int(v) for v in chi_ad[datum.s:]],
        [F.frobenius(int(v)) for v in eta_ad[: datum.s]], FieldCoeffs(F),
    )


def build_reduced_ggg(datum: NilpotentDatum, eta=None, check: bool = True) -> GGGModule:
    """pi_eta Q_chi with explicit action of the adapted basis."""
    eta = datum.chi.copy() if eta is None else np.asarray(eta, dtype=np.int64)
    check_eta(datum, eta)
    F = datum.field
    eng = _straightener_reduced(datum, eta)
    mats = tuple(
        sps.from_columns(F, eng.size, (eng.act(i, a) for a in range(eng.size))) for i in range(datum.n)
    )
    M = GGGModule(datum.adapted, mats, "ggg", datum=datum, eta=eta, engine=eng)
    if check:
        ok, wit = M.check_brackets()
        if not ok:
            raise ContractViolation(f"action violates bracket relations: {wit}")
    return M


def build_regular_module(g: RestrictedLieAlgebra, eta) -> GGGModule:
    """Left regular module of U_eta(g), as the Gelfand-Graev module of the zero datum."""
    from .liealg import build_nilpotent_datum

    zero = build_nilpotent_datum(g, np.zeros(g.dim, dtype=np.int64), np.zeros(g.dim, dtype=np.int64))
    return build_reduced_ggg(zero, eta)


# ---------------------------------------------------------------------------
# family module over the polynomial ring


@dataclass(frozen=True, eq=False)
class FamilyModule:
    """Q_chi as a free module over K[z_1..z_s] on the complement monomials."""

    datum: NilpotentDatum
    engine: Straightener

    @property
    def rank(self) -> int:
        return self.engine.size

    @property
    def nvars(self) -> int:
        return self.datum.s

    def act(self, i: int, v: dict) -> dict:
        return self.engine.act_vec(i, v)

    def basis_vector(self, a: int) -> dict:
        return {a: self.engine.ring.one}

    def xi_apply(self, i: int, v: dict) -> dict:
        """(x_i^p - x_i^[p]) v computed by repeated action."""
        eng = self.engine
        w = v
        for _ in range(self.datum.p):
            w = eng.act_vec(i, w)
        sub = eng.act_element(self.datum.adapted.ppower[i], v)
        out = dict(w)
        from .penv import _axpy

        _axpy(out, sub, eng.ring.const(self.datum.field.neg(1)), eng.ring)
        return out

    def specialize_matrix(self, i: int, point) -> sp.csc_matrix:
        F = self.datum.field
        cols = []
        for a in range(self.rank):
            col = {}
            for b, c in self.engine.act(i, a).items():
                v = c.eval(point)
                if v:
                    col[b] = v
            cols.append(col)
        return sps.from_columns(F, self.rank, cols)


def build_family_ggg(datum: NilpotentDatum) -> FamilyModule:
    F = datum.field
    ring = PolyCoeffs(F, datum.s)
    chi_ad = datum.chi_adapted
    eng = Straightener(
        datum.adapted, datum.s, [ring.const(v) for v in chi_ad[datum.s:]],
        [ring.var(j) for j in range(datum.s)], ring,
    )
    return FamilyModule(datum, eng)


def eta_point(datum: NilpotentDatum, eta) -> list[int]:
    """The point z_j = eta(x_j)^p of the family parameter space."""
    F = datum.field
    eta_ad = datum.form_to_adapted(eta)
    return [F.frobenius(int(v)) for v in eta_ad[: datum.s]]


def thickened_module(fam: FamilyModule, eta, directions: Optional[Sequence[int]] = None) -> FiniteModule:
    """First-order neighbourhood of eta in the family: Q (x) K[z]/(z - a)^2.

    Basis: e_b (value part) followed by eps_j e_b for each chosen direction j.
    """
    datum = fam.datum
    F = datum.field
    point = eta_point(datum, eta)
    s = datum.s
    dirs = list(range(s)) if directions is None else list(directions)
    r = fam.rank
    k = len(dirs)
    size = r * (1 + k)
    mats = []
    for i in range(datum.n):
        rows, cols, vals = [], [], []
        for a in range(r):
            for b, c in fam.engine.act(i, a).items():
                v0 = c.eval(point)
                derivs = [_partial_eval(c, j, point) for j in dirs]
                for blk in range(k + 1):
                    if v0:
                        rows.append(blk * r + b)
                        cols.append(blk * r + a)
                        vals.append(v0)
                for t, dv in enumerate(derivs):
                    if dv:
                        rows.append((t + 1) * r + b)
                        cols.append(a)
                        vals.append(dv)
        M = sp.csc_matrix((np.array(vals, dtype=np.int64), (rows, cols)), shape=(size, size))
        if F.k == 1:
            M.sum_duplicates()
            M.data %= F.p
            M.eliminate_zeros()
        mats.append(M)
    return FiniteModule(datum.adapted, tuple(mats), "thickened")


def _partial_eval(f: MultiPoly, j: int, point) -> int:
    F = f.field
    total = 0
    for exp, c in f.terms.items():
        k = exp[j]
        if not k:
            continue
        term = F.mul(c, F.embed(k))
        for t, (v, e) in enumerate(zip(point, exp)):
            e2 = e - 1 if t == j else e
            if e2:
                term = F.mul(term, F.pow(int(v), e2))
        total = F.add(total, term)
    return total


# ---------------------------------------------------------------------------
# coinvariants


def pi_I(module: FiniteModule, gens: Sequence, label: str = "") -> FiniteModule:
    """Coinvariants M / sum_g g M for central elements given by their matrices."""
    F = module.field
    mats = [g if sp.issparse(g) else sp.csc_matrix(np.asarray(g, dtype=np.int64)) for g in gens]
    for G in mats:
        for A in module.action:
            if not sps.is_zero(sps.sub(F, sps.spsp(F, G, A), sps.spsp(F, A, G))):
                raise ContractViolation("ideal generator does not commute with the action")
    if not mats or module.dim == 0:
        return module
    S = np.hstack([np.asarray(G.toarray(), dtype=np.int64) for G in mats])
    Q, _, _ = module.quotient_by(S, label or f"pi({module.label})")
    return Q


def maximal_ideal_gens(module: FiniteModule, eta_ad) -> list:
    """Matrices of xi(x_i) - eta(x_i)^p for every basis vector (adapted coordinates)."""
    F = module.field
    out = []
    for i in range(module.algebra.dim):
        X = module.xi_matrix(i)
        out.append(sps.sub(F, X, sps.scalar_identity(F, module.dim, F.frobenius(int(eta_ad[i])))))
    return out


def coker_commutes_check(phi: np.ndarray, M: FiniteModule, N: FiniteModule, gens_M, gens_N) -> tuple[bool, dict]:
    """Coker(pi_I phi) and pi_I(Coker phi) agree as quotients of N."""
    F = M.field
    phi = np.asarray(phi, dtype=np.int64)
    for i in range(M.algebra.dim):
        if not np.array_equal(F.matmul(phi, M.dense(i)), N.apply(i, phi)):
            raise ContractViolation("phi does not intertwine the actions")
    IN = np.hstack([np.asarray(G.toarray(), dtype=np.int64) for G in gens_N]) if gens_N else np.zeros((N.dim, 0), dtype=np.int64)
    IM = np.hstack([np.asarray(G.toarray(), dtype=np.int64) for G in gens_M]) if gens_M else np.zeros((M.dim, 0), dtype=np.int64)
    # left: pass to pi_I first, then take the cokernel of the induced map
    projN, secN = la.quotient(IN, F, N.dim)
    projM, secM = la.quotient(IM, F, M.dim)
    induced = F.matmul(projN, F.matmul(phi, secM))
    img_left = F.matmul(secN, la.column_space(induced, F)) if induced.size else np.zeros((N.dim, 0), dtype=np.int64)
    left = np.hstack([IN, img_left])
    # right: take the cokernel first, then coinvariants of the cokernel
    projC, secC = la.quotient(phi, F, N.dim)
    ICparts = [F.matmul(projC, F.matmul(np.asarray(G.toarray(), dtype=np.int64), secC)) for G in gens_N]
    IC = np.hstack(ICparts) if ICparts else np.zeros((projC.shape[0], 0), dtype=np.int64)
    right = np.hstack([phi, F.matmul(secC, IC)]) if IC.size else phi
    dl = N.dim - (la.rank(left, F) if left.size else 0)
    dr = N.dim - (la.rank(right, F) if right.size else 0)
    same = la.same_span(left, right, F) if left.size and right.size else (dl == dr == N.dim)
    return dl == dr and same, {"dim_left": dl, "dim_right": dr}


# ---------------------------------------------------------------------------
# simple modules and central characters


def spin(module: FiniteModule, v: np.ndarray) -> np.ndarray:
    """Echelon basis of the submodule generated by the columns of v."""
    F = module.field
    B = la.column_space(np.asarray(v, dtype=np.int64).reshape(module.dim, -1), F)
    frontier = B
    while frontier.shape[1] and B.shape[1] < module.dim:
        imgs = np.hstack([module.apply(i, frontier) for i in range(module.algebra.dim)])
        _, piv = la.rref(np.hstack([B, imgs]), F)
        fresh = [c - B.shape[1] for c in piv if c >= B.shape[1]]
        frontier = imgs[:, fresh]
        B = np.hstack([B, frontier])
    return la.column_space(B, F)


def is_simple(module: FiniteModule, rng: np.random.Generator, exhaustive_limit: int = 4000) -> Optional[bool]:
    """Simplicity test by spinning.

    Exhaustive over projective points when their number is at most
    ``exhaustive_limit``; otherwise random vectors in the module and its dual,
    returning None when no proper submodule was found but the search was not
    exhaustive.
    """
    F = module.field
    n = module.dim
    if n == 0:
        return False
    q = F.q
    npoints = (q ** n - 1) // (q - 1)
    if npoints <= exhaustive_limit:
        for v in _projective_points(F, n):
            if spin(module, v).shape[1] < n:
                return False
        return True
    dual = FiniteModule(module.algebra, tuple(sp.csc_matrix(_neg_transpose(F, A)) for A in module.action))
    for _ in range(20):
        for M in (module, dual):
            v = F.random(rng, n).astype(np.int64)
            if v.any() and spin(M, v).shape[1] < n:
                return False
    return None


def _neg_transpose(F: GF, A) -> np.ndarray:
    return F.vneg(np.asarray(A.toarray(), dtype=np.int64).T)


def _projective_points(F: GF, n: int):
    q = F.q
    for lead in range(n):
        tail = n - lead - 1
        for code in range(q ** tail):
            v = np.zeros(n, dtype=np.int64)
            v[lead] = 1
            c = code
            for t in range(tail):
                v[lead + 1 + t] = c % q
                c //= q
            yield v


def common_eigen(mats: Sequence[np.ndarray], F: GF, basis: Optional[np.ndarray] = None):
    """Joint eigenvalue tuples of commuting matrices, with joint eigenspaces.

    Returns a list of ``(values, basis)`` with ``basis`` columns spanning the
    joint eigenspace inside the column span of ``basis``.
    """
    n = mats[0].shape[0] if mats else 0
    B = np.eye(n, dtype=np.int64) if basis is None else basis
    if not mats:
        return [((), B)]
    A = mats[0]
    AB = F.matmul(A, B)
    coords = la.solve(B, AB, F)
    if coords is None:
        raise ContractViolation("subspace is not invariant under a commuting matrix")
    out = []
    k = B.shape[1]
    for lam in F.elements():
        K = la.kernel_basis(F.vsub(coords, F.vmul(lam, np.eye(k, dtype=np.int64))), F)
        if K.shape[1]:
            sub = F.matmul(B, K)
            for vals, V in common_eigen(mats[1:], F, sub):
                out.append(((int(lam),) + vals, V))
    return out


def central_character(module: FiniteModule) -> Optional[list[int]]:
    """eta values (adapted basis) if every xi(x_i) acts as a scalar, else None."""
    F = module.field
    vals = []
    for i in range(module.algebra.dim):
        X = np.asarray(module.xi_matrix(i).toarray(), dtype=np.int64)
        lam = int(X[0, 0]) if module.dim else 0
        if not np.array_equal(X, F.vmul(lam, np.eye(module.dim, dtype=np.int64))):
            return None
        vals.append(F.pth_root(lam))
    return vals


def simple_has_character_check(module: FiniteModule, rng: np.random.Generator) -> tuple[Optional[bool], dict]:
    simple = is_simple(module, rng)
    if simple is False:
        return None, {"precondition": "module is not simple"}
    eta = central_character(module)
    wit = {"dim": module.dim, "simple": "exhaustive" if simple else "sampled"}
    if eta is None:
        return False, wit
    wit["eta"] = eta
    return True, wit


def nonvanishing_point(module: FiniteModule) -> Optional[list[int]]:
    """Some eta (adapted values) with pi_eta M nonzero, from a common left eigenvector of the xi's."""
    F = module.field
    if module.dim == 0:
        return None
    mats = [np.asarray(module.xi_matrix(i).toarray(), dtype=np.int64).T for i in range(module.algebra.dim)]
    found = common_eigen(mats, F)
    if not found:
        return None
    vals, _ = found[0]
    return [F.pth_root(v) for v in vals]


# ---------------------------------------------------------------------------
# homomorphisms


def _generalized_eigenspaces(A: np.ndarray, F: GF) -> Optional[list[tuple[int, np.ndarray]]]:
    """Generalized eigenspaces of A over F, or None when its spectrum does not split."""
    n = A.shape[0]
    out = []
    total = 0
    for lam in F.elements():
        B = F.vsub(A, F.vmul(lam, np.eye(n, dtype=np.int64)))
        P = B
        e = 1
        while e < n:
            P = F.matmul(P, P)
            e *= 2
        K = la.kernel_basis(P, F)
        if K.shape[1]:
            out.append((int(lam), K))
            total += K.shape[1]
    return out if total == n else None


def _block_frame(M: FiniteModule, N: FiniteModule):
    """Pick a generator splitting both modules; intertwiners preserve its generalized eigenspaces.

    Returns (P_M, P_N, blocks) with blocks a list of (row slice of N, column slice of M).
    """
    F = M.field
    best = None
    for i in range(M.algebra.dim):
        sm = _generalized_eigenspaces(M.dense(i), F)
        sn = _generalized_eigenspaces(N.dense(i), F)
        if sm is None or sn is None:
            continue
        dm = {lam: K for lam, K in sm}
        dn = {lam: K for lam, K in sn}
        cost = sum(dm[l].shape[1] * dn[l].shape[1] for l in dm if l in dn)
        if best is None or cost < best[0]:
            best = (cost, dm, dn)
    if best is None:
        return None
    _, dm, dn = best
    lams = sorted(dm)
    lams_n = sorted(dn)
    PM = np.hstack([dm[l] for l in lams])
    PN = np.hstack([dn[l] for l in lams_n])
    offm, offn = {}, {}
    c = 0
    for l in lams:
        offm[l] = slice(c, c + dm[l].shape[1])
        c += dm[l].shape[1]
    c = 0
    for l in lams_n:
        offn[l] = slice(c, c + dn[l].shape[1])
        c += dn[l].shape[1]
    blocks = [(offn[l], offm[l]) for l in lams if l in dn]
    return PM, PN, blocks


def _sylvester_residuals_f32(Kc, cols, A, B, n, m, p) -> np.ndarray:
    """Columns X A - B X (vectorised) for the candidates S Kc, computed exactly in float32."""
    X = np.zeros((Kc.shape[1], n * m), dtype=np.float32)
    X[:, cols] = Kc.T
    X = X.reshape(-1, n, m)
    R = X @ A.astype(np.float32)
    R -= np.matmul(B.astype(np.float32), X)
    np.fmod(R, p, out=R)
    R[R < 0] += p
    return R.reshape(-1, n * m).T.astype(np.int64)


def _spanning_words(M: FiniteModule):
    """Basis of M reached from standard vectors by words in the generators.

    Returns ``(gens, basis, parent)``: ``gens`` are indices of the standard
    vectors used as generators, ``basis`` holds the reached vectors as columns
    and ``parent[j]`` is ``(g, None)`` for a generator or ``(i, k)`` when
    ``basis[:, j]`` is generator ``i`` applied to ``basis[:, k]``.
    """
    F = M.field
    m = M.dim
    basis = np.zeros((m, 0), dtype=np.int64)
    parent: list[tuple] = []
    gens: list[int] = []
    for g in range(m):
        if basis.shape[1] == m:
            break
        v = np.zeros((m, 1), dtype=np.int64)
        v[g, 0] = 1
        if la.rank(np.hstack([basis, v]), F) == basis.shape[1]:
            continue
        gens.append(g)
        parent.append((len(gens) - 1, None))
        basis = np.hstack([basis, v])
        frontier = [basis.shape[1] - 1]
        while frontier and basis.shape[1] < m:
            cand, origin = [], []
            for i in range(M.algebra.dim):
                cand.append(M.apply(i, basis[:, frontier]))
                origin.extend((i, k) for k in frontier)
            cand = np.hstack(cand)
            _, piv = la.rref(np.hstack([basis, cand]), F)
            fresh = [c - basis.shape[1] for c in piv if c >= basis.shape[1]]
            frontier = list(range(basis.shape[1], basis.shape[1] + len(fresh)))
            basis = np.hstack([basis, cand[:, fresh]])
            parent.extend(origin[c] for c in fresh)
    return gens, basis, parent


def hom_space(M: FiniteModule, N: FiniteModule) -> np.ndarray:
    """Basis of Hom_g(M, N) as columns of vectorised (row-major) dim N x dim M matrices.

    A homomorphism is fixed by the images of generators of M.  With ``b_j =
    u_j v_{g(j)}`` a basis reached by words ``u_j``, the unknowns are the
    images ``w_g`` and the conditions are ``f(x_i b_j) = x_i f(b_j)``.
    """
    F = M.field
    m, n = M.dim, N.dim
    if m == 0 or n == 0:
        return np.zeros((n * m, 0), dtype=np.int64)
    gens, basis, parent = _spanning_words(M)
    r = len(gens)
    # T[j] = word u_j acting on N
    T = np.zeros((m, n, n), dtype=np.int64)
    for j, (a, k) in enumerate(parent):
        T[j] = np.eye(n, dtype=np.int64) if k is None else F.matmul(N.dense(a), T[k])
    owner = np.zeros(m, dtype=np.int64)
    for j, (a, k) in enumerate(parent):
        owner[j] = a if k is None else owner[k]
    Binv = la.inverse(basis, F)
    K = np.eye(r * n, dtype=np.int64)
    for i in range(M.algebra.dim):
        if K.shape[1] == 0:
            break
        C = F.matmul(Binv, M.apply(i, basis))
        # E[j] maps (w_1..w_r) to sum_k C[k, j] T_k w_{g(k)} - x_i T_j w_{g(j)}
        E = np.zeros((m, n, r * n), dtype=np.int64)
        flatT = T.reshape(m, n * n)
        for g in range(r):
            sel = owner == g
            blk = F.matmul(np.ascontiguousarray(C[sel].T), flatT[sel]).reshape(m, n, n)
            E[:, :, g * n:(g + 1) * n] = blk
        XT = F.matmul(N.dense(i), np.transpose(T, (1, 0, 2)).reshape(n, m * n)).reshape(n, m, n).transpose(1, 0, 2)
        for j in range(m):
            g = owner[j]
            E[j, :, g * n:(g + 1) * n] = F.vsub(E[j, :, g * n:(g + 1) * n], XT[j])
        R = F.matmul(E.reshape(m * n, r * n), K)
        K = F.matmul(K, la.kernel_basis(R, F))
    if K.shape[1] == 0:
        return np.zeros((n * m, 0), dtype=np.int64)
    # f(b_j) = T_j w_{g(j)}, then f = [f(b_j)] B^-1
    c = K.shape[1]
    Wg = K.reshape(r, n, c)
    FB = np.zeros((c, n, m), dtype=np.int64)
    for j in range(m):
        FB[:, :, j] = F.matmul(T[j], Wg[owner[j]]).T
    X = F.matmul(FB.reshape(c * n, m), Binv).reshape(c, n * m)
    return np.ascontiguousarray(X.T)


def hom_space_sylvester(M: FiniteModule, N: FiniteModule) -> np.ndarray:
    """Hom_g(M, N) by solving X A_i = B_i X directly; an independent check of ``hom_space``.

    Unknowns are first restricted to maps preserving the generalized
    eigenspaces of one split generator, then cut down generator by generator.
    """
    F = M.field
    m, n = M.dim, N.dim
    frame = _block_frame(M, N) if m and n else None
    if frame is None:
        PM = np.eye(m, dtype=np.int64)
        PN = np.eye(n, dtype=np.int64)
        cols = np.arange(n * m)
    else:
        PM, PN, blocks = frame
        idx = np.arange(n * m).reshape(n, m)
        cols = np.concatenate([idx[rs, cs].reshape(-1) for rs, cs in blocks]) if blocks else np.zeros(0, dtype=np.int64)
    PMinv = la.inverse(PM, F)
    PNinv = la.inverse(PN, F)
    # candidates are K = S Kc with S the selection of block entries
    Kc = np.eye(cols.size, dtype=np.int64)
    for i in range(M.algebra.dim):
        if Kc.shape[1] == 0:
            break
        A = F.matmul(PMinv, F.matmul(M.dense(i), PM))
        B = F.matmul(PNinv, F.matmul(N.dense(i), PN))
        if F.k == 1 and max(n, m) * (F.p - 1) ** 2 < (1 << 24):
            R = _sylvester_residuals_f32(Kc, cols, A, B, n, m, F.p)
        else:
            X = np.zeros((Kc.shape[1], n * m), dtype=np.int64)
            X[:, cols] = Kc.T
            X = X.reshape(-1, n, m)
            # X A - B X for every basis candidate
            XA = F.matmul(X.reshape(-1, m), A).reshape(-1, n, m)
            BX = F.matmul(B, np.transpose(X, (1, 0, 2)).reshape(n, -1)).reshape(n, -1, m).transpose(1, 0, 2)
            R = F.vsub(XA, BX).reshape(-1, n * m).T
        ker = la.kernel_basis(R, F)
        Kc = F.matmul(Kc, ker)
    if Kc.shape[1] == 0:
        return np.zeros((n * m, 0), dtype=np.int64)
    # back to the original coordinates: X = PN X' PM^-1
    X = np.zeros((Kc.shape[1], n * m), dtype=np.int64)
    X[:, cols] = Kc.T
    X = X.reshape(-1, n, m)
    X = F.matmul(X.reshape(-1, m), PMinv).reshape(-1, n, m)
    X = F.matmul(PN, np.transpose(X, (1, 0, 2)).reshape(n, -1)).reshape(n, -1, m).transpose(1, 0, 2)
    return np.ascontiguousarray(X.reshape(-1, n * m).T)


def adjointness_check(M: FiniteModule, N: FiniteModule, gens_M) -> tuple[bool, dict]:
    """Hom(pi_I M, N) -> Hom(M, N), f -> f o proj, is bijective (requires I N = 0)."""
    F = M.field
    IM = np.hstack([np.asarray(G.toarray(), dtype=np.int64) for G in gens_M]) if gens_M else np.zeros((M.dim, 0), dtype=np.int64)
    Q, proj, _ = M.quotient_by(IM)
    H = hom_space(M, N)
    HQ = hom_space(Q, N) if Q.dim else np.zeros((0, 0), dtype=np.int64)
    if Q.dim == 0:
        return H.shape[1] == 0, {"dim_hom": H.shape[1], "dim_hom_quotient": 0}
    n = N.dim
    imgs = []
    for j in range(HQ.shape[1]):
        f = HQ[:, j].reshape(n, Q.dim)
        imgs.append(F.matmul(f, proj).reshape(-1))
    rk = la.rank(np.stack(imgs, axis=1), F) if imgs else 0
    ok = rk == HQ.shape[1] == H.shape[1]
    return ok, {"dim_hom": int(H.shape[1]), "dim_hom_quotient": int(HQ.shape[1]), "image_rank": int(rk)}


# ---------------------------------------------------------------------------
# filtrations


def graded_dims(degrees: Sequence[int], S: np.ndarray, F: GF) -> dict:
    """Per-degree dimensions of gr(V), gr(N) and gr(V/N) for N = span(S).

    V carries the filtration where V_{<=k} is spanned by basis vectors of
    degree at most k.
    """
    degrees = np.asarray(degrees)
    n = len(degrees)
    levels = sorted(set(int(d) for d in degrees))
    out = {}
    prevN = 0
    prevQ = 0
    for k in levels:
        idx = np.flatnonzero(degrees <= k)
        Vk = np.eye(n, dtype=np.int64)[:, idx]
        dimN = la.intersect(Vk, S, F).shape[1] if S.shape[1] else 0
        dimVN = la.rank(np.hstack([Vk, S]), F) if S.shape[1] else len(idx)
        dimS = la.rank(S, F) if S.shape[1] else 0
        dimQ = dimVN - dimS
        out[k] = {
            "V": int(np.sum(degrees == k)),
            "N": dimN - prevN,
            "Q": dimQ - prevQ,
        }
        prevN, prevQ = dimN, dimQ
    return out


def associated_graded(degrees: Sequence[int], S: Optional[np.ndarray], F: GF) -> tuple[bool, dict]:
    """gr(V/N) = gr(V)/gr(N) degreewise; trivial filtrations return V itself."""
    S = np.zeros((len(degrees), 0), dtype=np.int64) if S is None else S
    dims = graded_dims(degrees, S, F)
    ok = all(v["V"] - v["N"] == v["Q"] for v in dims.values())
    return ok, {"degrees": {str(k): v for k, v in dims.items()}}


def graded_freeness_check(fam: FamilyModule, max_degree: int) -> tuple[bool, dict]:
    """gr Q_chi is S(g)/(m): leading terms of the action are polynomial multiplication.

    For a complement vector x_j the action on x^a has the leading term
    x^(a+e_j) (or z_j x^(a-(p-1)e_j) when the exponent wraps) in PBW degree
    |a|+1, counting z_j with degree p; m-vectors lower the degree.  Also
    compares monomial counts of S(m-perp) with the free basis z^g x^a up to
    ``max_degree``.
    """
    dat = fam.datum
    eng = fam.engine
    p = dat.p
    s = dat.s

    def pbw_degree(b, poly):
        base = sum(eng.digits(b))
        return max(base + p * sum(e) for e in poly.terms)

    bad = 0
    for a in range(eng.size):
        deg_a = sum(eng.digits(a))
        for i in range(dat.n):
            col = eng.act(i, a)
            top = max((pbw_degree(b, c) for b, c in col.items()), default=-1)
            if i < s:
                digs = eng.digits(a)
                if digs[i] + 1 < p:
                    lead, lead_exp = a + eng.pw[i], (0,) * s
                else:
                    lead = a - digs[i] * eng.pw[i]
                    lead_exp = tuple(1 if t == i else 0 for t in range(s))
                c = col.get(lead)
                lead_ok = c is not None and c.terms.get(lead_exp) == 1
                higher = [b for b, cc in col.items() if pbw_degree(b, cc) > deg_a + 1]
                if top != deg_a + 1 or not lead_ok or higher:
                    bad += 1
            elif top > deg_a:
                bad += 1
    counts = {}
    for k in range(max_degree + 1):
        sym = comb(k + s - 1, s - 1) if s else int(k == 0)
        free = 0
        for a in range(eng.size):
            r = k - sum(eng.digits(a))
            if r >= 0 and r % p == 0:
                free += comb(r // p + s - 1, s - 1) if s else int(r == 0)
        counts[k] = (sym, free)
    ok = bad == 0 and all(a == b for a, b in counts.values())
    return ok, {"rank": eng.size, "leading_term_failures": bad, "degree_counts": {str(k): list(v) for k, v in counts.items()}}


def annihilator_in_pcentre_check(fam: FamilyModule, d: int) -> tuple[bool, dict]:
    """I(m) kills Q_chi, Q_chi is free of rank p^s, and no nonzero z-polynomial of degree <= d kills it."""
    dat = fam.datum
    F = dat.field
    eng = fam.engine
    ring = eng.ring
    one = fam.basis_vector(0)
    chi = dat.chi_adapted
    killed = True
    for k in range(dat.s, dat.n):
        w = fam.xi_apply(k, one)
        target = {0: ring.const(F.frobenius(int(chi[k])))} if int(chi[k]) else {}
        if w != target:
            killed = False
    # xi(x_j) acts as z_j, so xi-monomials applied to the generator give z^g
    xi_ok = True
    for j in range(dat.s):
        if fam.xi_apply(j, one) != {0: ring.var(j)}:
            xi_ok = False
    mons = monomials_up_to(dat.s, d)
    coords = []
    for g in mons:
        v = one
        for j, e in enumerate(g):
            for _ in range(e):
                v = fam.xi_apply(j, v)
        vec = np.zeros(len(mons), dtype=np.int64)
        pos = {m: t for t, m in enumerate(mons)}
        ok_shape = set(v) <= {0}
        if ok_shape and 0 in v:
            for e, c in v[0].terms.items():
                if e in pos:
                    vec[pos[e]] = c
                else:
                    ok_shape = False
        coords.append(vec if ok_shape else np.zeros(len(mons), dtype=np.int64))
    rk = la.rank(np.stack(coords, axis=1), F) if coords else 0
    free_ok, free_wit = graded_freeness_check(fam, min(d * dat.p, 2 * dat.p))
    ok = killed and xi_ok and rk == len(mons) and free_ok
    return ok, {
        "generators_kill": killed, "xi_acts_as_z": xi_ok, "rank": free_wit["rank"],
        "faithful_degree": d, "independent_monomials": int(rk), "monomials": len(mons),
        "graded_free": free_ok,
    }
