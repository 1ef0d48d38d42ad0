"""PBW straightening for reduced enveloping algebras and their central reductions.

Monomials x_1^a_1 ... x_N^a_N with 0 <= a_t < p are encoded as integers
sum a_t p^t.  A ``Straightener`` computes the left action of a basis vector
on a monomial, either inside the algebra itself or inside an induced module
where the trailing basis vectors act on the generator by scalars.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .field import GF
from .linalg import ContractViolation
from .liealg import NilpotentDatum, RestrictedLieAlgebra
from .poly import MultiPoly

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


# ---------------------------------------------------------------------------
# coefficient rings


class FieldCoeffs:
    """Coefficients in the field itself (reduced mode)."""

    def __init__(self, F: GF):
        self.F = F
        self.zero = 0
        self.one = 1

    def add(self, a, b):
        return self.F.add(a, b)

    def mul(self, a, b):
        return self.F.mul(a, b)

    def neg(self, a):
        return self.F.neg(a)

    def is_zero(self, a) -> bool:
        return a == 0

    def const(self, c: int):
        return int(c)

    def __eq__(self, other):
        return isinstance(other, FieldCoeffs) and other.F == self.F

    def __hash__(self):
        return hash(("field", self.F))


class PolyCoeffs:
    """Coefficients in a polynomial ring over the field (family mode)."""

    def __init__(self, F: GF, nvars: int):
        self.F = F
        self.nvars = nvars
        self.zero = MultiPoly.zero(F, nvars)
        self.one = MultiPoly.constant(F, nvars, 1)

    def add(self, a, b):
        return a + b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def is_zero(self, a) -> bool:
        return a.is_zero()

    def const(self, c: int):
        return MultiPoly.constant(self.F, self.nvars, int(c))

    def var(self, j: int):
        return MultiPoly.var(self.F, self.nvars, j)

    def __eq__(self, other):
        return isinstance(other, PolyCoeffs) and other.F == self.F and other.nvars == self.nvars

    def __hash__(self):
        return hash(("poly", self.F, self.nvars))


# ---------------------------------------------------------------------------
# straightening engine


def _axpy(out: dict, vec: dict, c, ring) -> None:
    """out += c * vec (dictionary vectors over ``ring``)."""
    add, mul, is_zero = ring.add, ring.mul, ring.is_zero
    for b, v in vec.items():
        t = mul(c, v)
        if is_zero(t):
            continue
        cur = out.get(b)
        if cur is None:
            out[b] = t
        else:
            t = add(cur, t)
            if is_zero(t):
                del out[b]
            else:
                out[b] = t


class Straightener:
    """Left action of basis vectors on PBW monomials in the first ``s`` basis vectors.

    ``algebra`` is given in the basis used for the monomial order.  Basis
    vectors ``s..n-1`` act on the generator ``1`` by the scalars ``tail``;
    when ``s == n`` this is the regular representation of the algebra.
    ``red[j]`` is the scalar r_j in x_j^p = x_j^[p] + r_j.
    """

    def __init__(self, algebra: RestrictedLieAlgebra, s: int, tail, red, ring):
        self.algebra = algebra
        self.n = algebra.dim
        self.s = s
        self.p = algebra.p
        self.ring = ring
        if len(tail) != self.n - s or len(red) != s:
            raise ContractViolation("reduction data has the wrong length")
        self.tail = list(tail)
        self.red = list(red)
        self.pw = [self.p ** t for t in range(s)]
        self.size = self.p ** s
        c = algebra.structure
        const = ring.const
        self.br = [
            [[(int(k), const(c[i, j, k])) for k in np.flatnonzero(c[i, j])] for j in range(self.n)]
            for i in range(self.n)
        ]
        self.pp = [[(int(k), const(algebra.ppower[j, k])) for k in np.flatnonzero(algebra.ppower[j])] for j in range(self.n)]
        self.memo: dict = {}

    def digits(self, a: int) -> list[int]:
        p = self.p
        out = []
        for _ in range(self.s):
            out.append(a % p)
            a //= p
        return out

    def index(self, exps) -> int:
        return sum(int(e) * w for e, w in zip(exps, self.pw))

    def _first(self, a: int) -> tuple[int, int]:
        p = self.p
        j = 0
        while a % p == 0:
            a //= p
            j += 1
        return j, a % p

    def act(self, i: int, a: int) -> dict:
        key = (i, a)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        ring = self.ring
        one = ring.one
        if a == 0:
            if i < self.s:
                out = {self.pw[i]: one}
            else:
                t = self.tail[i - self.s]
                out = {} if ring.is_zero(t) else {0: t}
            self.memo[key] = out
            return out
        j, aj = self._first(a)
        if i < j:
            out = {a + self.pw[i]: one}
        elif i == j:
            if aj + 1 < self.p:
                out = {a + self.pw[j]: one}
            else:
                rest = a - aj * self.pw[j]
                out = {}
                for k, c in self.pp[j]:
                    _axpy(out, self.act(k, rest), c, ring)
                r = self.red[j]
                if not ring.is_zero(r):
                    _axpy(out, {rest: one}, r, ring)
        else:
            a1 = a - self.pw[j]
            out = {}
            for b, c in self.act(i, a1).items():
                _axpy(out, self.act(j, b), c, ring)
            for k, c in self.br[i][j]:
                _axpy(out, self.act(k, a1), c, ring)
        self.memo[key] = out
        return out

    def act_vec(self, i: int, v: dict) -> dict:
        out: dict = {}
        for b, c in v.items():
            _axpy(out, self.act(i, b), c, self.ring)
        return out

    def act_element(self, x, v: dict) -> dict:
        """Action of a Lie algebra element given by coordinates ``x``."""
        out: dict = {}
        for i in np.flatnonzero(x):
            _axpy(out, self.act_vec(int(i), v), self.ring.const(x[i]), self.ring)
        return out

    def act_monomial(self, a: int, v: dict) -> dict:
        """x^a . v with x^a = x_1^a_1 ... x_s^a_s (rightmost factor first)."""
        digs = self.digits(a)
        for t in range(self.s - 1, -1, -1):
            for _ in range(digs[t]):
                v = self.act_vec(t, v)
        return v

    def dense_action(self, i: int, dtype=np.int64) -> np.ndarray:
        """Matrix of the action of basis vector i on the monomial basis (field coefficients)."""
        M = np.zeros((self.size, self.size), dtype=dtype)
        for a in range(self.size):
            for b, c in self.act(i, a).items():
                M[b, a] = c
        return M


# ---------------------------------------------------------------------------
# contexts and elements


@dataclass(frozen=True, eq=False)
class ReductionContext:
    """Reduction data realising U_eta(g) (reduced) or U_I(m)(g) (family).

    All indices refer to the adapted basis of ``datum``: complement vectors
    first, then the basis of m.
    """

    datum: NilpotentDatum
    mode: str
    eta: Optional[np.ndarray] = None  # standard-basis values (reduced mode)
    _engine: Optional[Straightener] = dc_field(default=None, repr=False)

    @classmethod
    def reduced(cls, datum: NilpotentDatum, eta=None) -> ReductionContext:
        eta = datum.chi.copy() if eta is None else np.asarray(eta, dtype=np.int64)
        check_eta(datum, eta)
        return cls(datum, "reduced", eta)

    @classmethod
    def family(cls, datum: NilpotentDatum) -> ReductionContext:
        return cls(datum, "family")

    @property
    def field(self) -> GF:
        return self.datum.field

    @property
    def ring(self):
        return self.engine.ring

    @property
    def n(self) -> int:
        return self.datum.n

    def reduction_scalars(self) -> list:
        """r_i in x_i^p = x_i^[p] + r_i for every adapted basis vector."""
        F = self.field
        dat = self.datum
        if self.mode == "reduced":
            eta_ad = dat.form_to_adapted(self.eta)
            return [F.frobenius(int(v)) for v in eta_ad]
        ring = PolyCoeffs(F, dat.s)
        chi_ad = dat.chi_adapted
        return [ring.var(j) for j in range(dat.s)] + [
            ring.const(F.frobenius(int(chi_ad[k]))) for k in range(dat.s, dat.n)
        ]

    @property
    def engine(self) -> Straightener:
        if self._engine is None:
            ring = FieldCoeffs(self.field) if self.mode == "reduced" else PolyCoeffs(self.field, self.datum.s)
            eng = Straightener(self.datum.adapted, self.n, [], self.reduction_scalars(), ring)
            object.__setattr__(self, "_engine", eng)
        return self._engine

    # element constructors
    def element(self, terms: dict) -> PBWElement:
        eng = self.engine
        vec = {}
        for exps, c in terms.items():
            if len(exps) != self.n or any(not 0 <= e < self.datum.p for e in exps):
                raise ContractViolation("exponents must lie in [0, p)")
            if not self.ring.is_zero(c):
                vec[eng.index(exps)] = c
        return PBWElement(self, vec)

    def one(self) -> PBWElement:
        return PBWElement(self, {0: self.ring.one})

    def scalar(self, c) -> PBWElement:
        return PBWElement(self, {} if self.ring.is_zero(c) else {0: c})

    def generator(self, i: int) -> PBWElement:
        return PBWElement(self, {self.engine.pw[i]: self.ring.one})

    def lie_element(self, x) -> PBWElement:
        """Image of an element of g given in adapted coordinates."""
        vec = {}
        for i in np.flatnonzero(x):
            vec[self.engine.pw[int(i)]] = self.ring.const(x[i])
        return PBWElement(self, vec)

    def standard_element(self, x) -> PBWElement:
        """Image of an element of g given in standard coordinates."""
        return self.lie_element(self.datum.to_adapted(x))

    def random_element(self, rng: np.random.Generator, nterms: int) -> PBWElement:
        eng = self.engine
        vec: dict = {}
        F = self.field
        for _ in range(nterms):
            a = int(rng.integers(0, eng.size))
            c = int(F.random_nonzero(rng))
            vec[a] = self.ring.const(c)
        return PBWElement(self, vec)

    def xi(self, i: int) -> PBWElement:
        """The image of x_i^p - x_i^[p] (a central scalar of the coefficient ring)."""
        return self.scalar(self.engine.red[i])


def check_eta(datum: NilpotentDatum, eta) -> None:
    """Raise ``DomainError`` unless eta agrees with chi on m."""
    F = datum.field
    eta = np.asarray(eta, dtype=np.int64)
    M = datum.m_basis
    if M.shape[1]:
        lhs = F.matmul(eta.reshape(1, -1), M)[0]
        rhs = F.matmul(datum.chi.reshape(1, -1), M)[0]
        if not np.array_equal(lhs, rhs):
            raise DomainError("eta differs from chi on m")


class DomainError(ValueError):
    """A linear form outside chi + m-perp was supplied where it is not allowed."""


@dataclass(frozen=True, eq=False)
class PBWElement:
    context: ReductionContext
    vec: dict  # monomial index -> coefficient

    @property
    def terms(self) -> dict:
        eng = self.context.engine
        return {tuple(eng.digits(a)): c for a, c in self.vec.items()}

    def _same(self, other: PBWElement) -> None:
        if not isinstance(other, PBWElement) or other.context is not self.context:
            raise ContractViolation("elements belong to different contexts")

    def __add__(self, other: PBWElement) -> PBWElement:
        self._same(other)
        out = dict(self.vec)
        _axpy(out, other.vec, self.context.ring.one, self.context.ring)
        return PBWElement(self.context, out)

    def __neg__(self) -> PBWElement:
        ring = self.context.ring
        return PBWElement(self.context, {a: ring.neg(c) for a, c in self.vec.items()})

    def __sub__(self, other: PBWElement) -> PBWElement:
        return self + (-other)

    def scale(self, c) -> PBWElement:
        out: dict = {}
        _axpy(out, self.vec, c, self.context.ring)
        return PBWElement(self.context, out)

    def __mul__(self, other):
        if isinstance(other, PBWElement):
            return multiply(self, other)
        return self.scale(self.context.ring.const(other))

    def __pow__(self, e: int) -> PBWElement:
        result = self.context.one()
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_zero(self) -> bool:
        return not self.vec

    def __eq__(self, other):
        if not isinstance(other, PBWElement):
            return NotImplemented
        return self.context is other.context and self.vec == other.vec

    def __hash__(self):
        return id(self)

    def max_z_degree(self) -> int:
        if self.context.mode != "family":
            return 0
        return max((c.total_degree() for c in self.vec.values()), default=-1)

    def __repr__(self):
        return f"PBWElement({len(self.vec)} terms)"


def multiply(a: PBWElement, b: PBWElement) -> PBWElement:
    """Straightened product a*b."""
    a._same(b)
    ctx = a.context
    eng = ctx.engine
    ring = ctx.ring
    out: dict = {}
    for mono, c in a.vec.items():
        _axpy(out, eng.act_monomial(mono, b.vec), c, ring)
    return PBWElement(ctx, out)


def xi(ctx: ReductionContext, i: int) -> PBWElement:
    return ctx.xi(i)


def truncate_z_degree(a: PBWElement, d: int) -> PBWElement:
    if a.context.mode != "family":
        raise ContractViolation("z-degree truncation needs a family context")
    out = {}
    for mono, c in a.vec.items():
        t = c.truncate(d)
        if not t.is_zero():
            out[mono] = t
    return PBWElement(a.context, out)


def specialize(a: PBWElement, target: ReductionContext) -> PBWElement:
    """Evaluate family coefficients at the point z_j = eta(x_j)^p of a reduced context."""
    if a.context.mode != "family" or target.mode != "reduced" or target.datum is not a.context.datum:
        raise ContractViolation("specialisation goes from a family context to a reduced one")
    point = target.reduction_scalars()[: a.context.datum.s]
    out = {}
    for mono, c in a.vec.items():
        v = c.eval(point)
        if v:
            out[mono] = v
    return PBWElement(target, out)


def centrality_check(ctx: ReductionContext) -> tuple[bool, dict]:
    """x^p equals x^[p] + r_x, and x^p commutes with every generator up to [x^[p], y]."""
    n = ctx.n
    alg = ctx.datum.adapted
    p = ctx.datum.p
    failures = []
    gens = [ctx.generator(i) for i in range(n)]
    for i in range(n):
        x = gens[i]
        xpp = ctx.lie_element(alg.ppower[i])
        power = x ** p
        if power != xpp + ctx.xi(i):
            failures.append({"power": i})
            continue
        for j in range(n):
            y = gens[j]
            left = y
            right = y
            for _ in range(p):
                left = x * left
                right = right * x
            if left - right != xpp * y - y * xpp:
                failures.append({"commute": [i, j]})
    return not failures, {"generators": n, "failures": failures[:5]}
