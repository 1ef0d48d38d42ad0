"""Sparse multivariate polynomials over a finite field."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from itertools import combinations_with_replacement
from typing import Iterable, Mapping

from .field import GF
from .linalg import ContractViolation


@dataclass(frozen=True)
class MultiPoly:
    """Polynomial in ``nvars`` variables with coefficients stored as field codes.

    ``terms`` maps exponent tuples to nonzero coefficients.
    """

    field: GF
    nvars: int
    terms: Mapping[tuple[int, ...], int] = dc_field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for exp, c in self.terms.items():
            if len(exp) != self.nvars:
                raise ContractViolation("exponent length does not match variable count")
            c = int(c) % self.field.q if self.field.k == 1 else int(c)
            if c:
                clean[tuple(int(e) for e in exp)] = c
        object.__setattr__(self, "terms", clean)

    # constructors -----------------------------------------------------

    @classmethod
    def _raw(cls, F: GF, nvars: int, terms: dict) -> MultiPoly:
        obj = object.__new__(cls)
        object.__setattr__(obj, "field", F)
        object.__setattr__(obj, "nvars", nvars)
        object.__setattr__(obj, "terms", terms)
        return obj

    @classmethod
    def zero(cls, F: GF, nvars: int) -> MultiPoly:
        return cls._raw(F, nvars, {})

    @classmethod
    def constant(cls, F: GF, nvars: int, c: int) -> MultiPoly:
        return cls._raw(F, nvars, {(0,) * nvars: c} if c else {})

    @classmethod
    def var(cls, F: GF, nvars: int, j: int) -> MultiPoly:
        exp = [0] * nvars
        exp[j] = 1
        return cls._raw(F, nvars, {tuple(exp): 1})

    # structure ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def constant_term(self) -> int:
        return self.terms.get((0,) * self.nvars, 0)

    def truncate(self, d: int) -> MultiPoly:
        """Drop all terms of total degree above ``d``."""
        return MultiPoly._raw(
            self.field, self.nvars, {e: c for e, c in self.terms.items() if sum(e) <= d}
        )

    def _check(self, other: MultiPoly) -> None:
        if other.field != self.field or other.nvars != self.nvars:
            raise ContractViolation("polynomials live in different rings")

    # arithmetic --------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.field, self.nvars, self.field.embed(int(other)))
        self._check(other)
        F = self.field
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = F.add(out.get(e, 0), c)
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return MultiPoly._raw(F, self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        F = self.field
        return MultiPoly._raw(F, self.nvars, {e: F.neg(c) for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(self.field, self.nvars, self.field.embed(int(other)))
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: int) -> MultiPoly:
        F = self.field
        if not c:
            return MultiPoly.zero(F, self.nvars)
        out = {}
        for e, a in self.terms.items():
            v = F.mul(a, c)
            if v:
                out[e] = v
        return MultiPoly._raw(F, self.nvars, out)

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return self.scale(self.field.embed(int(other)))
        self._check(other)
        F = self.field
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = F.add(out.get(e, 0), F.mul(c1, c2))
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return MultiPoly._raw(F, self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> MultiPoly:
        if n < 0:
            raise ContractViolation("negative exponent")
        result = MultiPoly.constant(self.field, self.nvars, 1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.field == other.field and self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, int):
            return self.terms == ({(0,) * self.nvars: other % self.field.q} if other % self.field.q else {})
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self.nvars, frozenset(self.terms.items())))

    # evaluation ----------------------------------------------------------

    def eval(self, point: Iterable[int]) -> int:
        return poly_eval(self, point)

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for e, c in sorted(self.terms.items()):
            mono = "*".join(
                f"z{j + 1}" + (f"^{k}" if k > 1 else "") for j, k in enumerate(e) if k
            )
            parts.append(f"{c}*{mono}" if mono else str(c))
        return " + ".join(parts)


def poly_eval(f: MultiPoly, point) -> int:
    """Evaluate ``f`` at a point given as field codes."""
    point = [int(v) for v in point]
    if len(point) != f.nvars:
        raise ContractViolation(f"point has length {len(point)}, expected {f.nvars}")
    F = f.field
    total = 0
    for exp, c in f.terms.items():
        term = c
        for v, k in zip(point, exp):
            if k:
                term = F.mul(term, F.pow(v, k))
        total = F.add(total, term)
    return total


def monomials_up_to(nvars: int, d: int) -> list[tuple[int, ...]]:
    """All exponent vectors of total degree at most ``d``, ordered by degree then lexicographically."""
    out = []
    for deg in range(d + 1):
        block = []
        for combo in combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for j in combo:
                e[j] += 1
            block.append(tuple(e))
        out.extend(sorted(set(block), reverse=True))
    return out
