"""Finite fields F_{p^k} with integer-coded elements.

An element of F_{p^k} is stored as the integer ``sum(a_t * p**t)`` where
``a_t`` are the coordinates in the power basis ``1, alpha, ..., alpha^{k-1}``
of a fixed irreducible polynomial.  The prime subfield is exactly the codes
``0 .. p-1``, so structure constants over F_p embed without conversion.

Scalar helpers (``add``, ``mul`` ...) work on Python ints and are meant for
hot loops; the ``v*`` helpers are their numpy-vectorised counterparts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

MAX_ORDER = 1024
_F32_EXACT = 1 << 24
_F64_EXACT = 1 << 53


class FieldError(ValueError):
    """Invalid field parameters."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, int(n ** 0.5) + 1))


def _poly_mod_p(a, b, p):
    """Remainder of ``a`` by monic ``b`` over F_p (coefficient lists, low first)."""
    a = list(a)
    db = len(b) - 1
    while len(a) - 1 >= db and any(a):
        if a[-1] == 0:
            a.pop()
            continue
        c = a[-1]
        shift = len(a) - 1 - db
        for i, bi in enumerate(b):
            a[shift + i] = (a[shift + i] - c * bi) % p
        a.pop()
    return a


def _irreducible(p: int, k: int) -> tuple[int, ...]:
    """Lexicographically first monic irreducible polynomial of degree k over F_p."""
    if k == 1:
        return (0, 1)
    for tail in itertools.product(range(p), repeat=k):
        f = list(tail) + [1]
        if f[0] == 0:
            continue
        reducible = False
        for d in range(1, k // 2 + 1):
            for gt in itertools.product(range(p), repeat=d):
                g = list(gt) + [1]
                r = _poly_mod_p(f, g, p)
                if not any(r):
                    reducible = True
                    break
            if reducible:
                break
        if not reducible:
            return tuple(f)
    raise FieldError(f"no irreducible polynomial of degree {k} over F_{p}")


def _matmul_mod_prime(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Exact ``a @ b mod p`` for integer arrays with entries in [0, p)."""
    inner = a.shape[-1]
    bound = inner * (p - 1) ** 2
    if bound < _F32_EXACT:
        out = np.asarray(a, dtype=np.float32) @ np.asarray(b, dtype=np.float32)
        return np.fmod(out, p).astype(np.int64)
    if bound < _F64_EXACT:
        out = np.asarray(a, dtype=np.float64) @ np.asarray(b, dtype=np.float64)
        return np.fmod(out, p).astype(np.int64)
    # chunk the inner dimension so float64 stays exact
    step = max(1, (_F64_EXACT - 1) // ((p - 1) ** 2))
    acc = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    for s in range(0, inner, step):
        part = np.asarray(a[:, s:s + step], dtype=np.float64) @ np.asarray(b[s:s + step], dtype=np.float64)
        acc = (acc + np.fmod(part, p).astype(np.int64)) % p
    return acc


@dataclass(frozen=True, eq=False)
class GF:
    """The finite field with ``p**k`` elements (p an odd prime)."""

    p: int
    k: int = 1
    modulus: tuple[int, ...] = dc_field(init=False)

    def __post_init__(self):
        if not is_prime(self.p):
            raise FieldError(f"{self.p} is not prime")
        if self.p < 3:
            raise FieldError("characteristic 2 is not supported; need p >= 3")
        if self.k < 1:
            raise FieldError("extension degree must be >= 1")
        if self.p ** self.k > MAX_ORDER:
            raise FieldError(f"field order {self.p ** self.k} exceeds {MAX_ORDER}")
        object.__setattr__(self, "modulus", _irreducible(self.p, self.k))
        if self.k > 1:
            self._build_tables()

    # identity ------------------------------------------------------------
    @property
    def q(self) -> int:
        return self.p ** self.k

    def __eq__(self, other):
        return isinstance(other, GF) and other.p == self.p and other.k == self.k

    def __hash__(self):
        return hash((self.p, self.k))

    def __repr__(self):
        return f"GF({self.p}^{self.k})" if self.k > 1 else f"GF({self.p})"

    # tables for k > 1 ----------------------------------------------------
    def _build_tables(self):
        p, k, q = self.p, self.k, self.q
        codes = np.arange(q)
        digits = np.stack([(codes // p ** t) % p for t in range(k)], axis=1)
        weights = p ** np.arange(k)
        add = (digits[:, None, :] + digits[None, :, :]) % p
        add_t = (add * weights).sum(axis=2)
        # reduction of alpha^u for u < 2k-1 into the power basis
        red = np.zeros((2 * k - 1, k), dtype=np.int64)
        for u in range(2 * k - 1):
            mono = [0] * u + [1]
            r = _poly_mod_p(mono, self.modulus, p) if u >= k else mono
            for i, c in enumerate(r[:k]):
                red[u, i] = c % p
        conv = np.zeros((q, q, 2 * k - 1), dtype=np.int64)
        for s in range(k):
            for t in range(k):
                conv[:, :, s + t] += digits[:, None, s] * digits[None, :, t]
        conv %= p
        prod_digits = np.einsum("abu,uv->abv", conv, red) % p
        mul_t = (prod_digits * weights).sum(axis=2)
        neg_t = ((-digits) % p * weights).sum(axis=1)
        inv_t = np.zeros(q, dtype=np.int64)
        rows, cols = np.nonzero(mul_t == 1)
        inv_t[rows] = cols
        object.__setattr__(self, "_add", add_t.astype(np.int64))
        object.__setattr__(self, "_mul", mul_t.astype(np.int64))
        object.__setattr__(self, "_neg", neg_t.astype(np.int64))
        object.__setattr__(self, "_inv", inv_t)
        object.__setattr__(self, "_red", red)
        object.__setattr__(self, "_addl", add_t.tolist())
        object.__setattr__(self, "_mull", mul_t.tolist())
        object.__setattr__(self, "_negl", neg_t.tolist())
        object.__setattr__(self, "_invl", inv_t.tolist())

    # scalar arithmetic ---------------------------------------------------
    def add(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a + b) % self.p
        return self._addl[a][b]

    def sub(self, a: int, b: int) -> int:
        if self.k == 1:
            return (a - b) % self.p
        return self._addl[a][self._negl[b]]

    def neg(self, a: int) -> int:
        if self.k == 1:
            return -a % self.p
        return self._negl[a]

    def mul(self, a: int, b: int) -> int:
        if self.k == 1:
            return a * b % self.p
        return self._mull[a][b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        if self.k == 1:
            return pow(a, -1, self.p)
        return self._invl[a]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self.inv(a), -e
        if self.k == 1:
            return pow(a, e, self.p)
        result, base = 1, a
        while e:
            if e & 1:
                result = self._mull[result][base]
            base = self._mull[base][base]
            e >>= 1
        return result

    def frobenius(self, a: int) -> int:
        return self.pow(a, self.p)

    def pth_root(self, a: int) -> int:
        """Inverse Frobenius: the unique b with b^p = a."""
        return self.pow(a, self.q // self.p)

    def embed(self, n: int) -> int:
        """Image of an integer under Z -> F_p -> F_q."""
        return n % self.p

    def elements(self):
        return range(self.q)

    def is_prime_field_element(self, a: int) -> bool:
        return 0 <= a < self.p

    # vectorised arithmetic -----------------------------------------------
    def vadd(self, a, b):
        if self.k == 1:
            return (np.asarray(a) + np.asarray(b)) % self.p
        return self._add[a, b]

    def vsub(self, a, b):
        if self.k == 1:
            return (np.asarray(a) - np.asarray(b)) % self.p
        return self._add[a, self._neg[b]]

    def vneg(self, a):
        if self.k == 1:
            return (-np.asarray(a)) % self.p
        return self._neg[a]

    def vmul(self, a, b):
        if self.k == 1:
            return (np.asarray(a) * np.asarray(b)) % self.p
        return self._mul[a, b]

    def vinv(self, a):
        a = np.asarray(a)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero")
        if self.k == 1:
            return np.asarray(pow_mod_array(a, self.p - 2, self.p))
        return self._inv[a]

    def matmul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Exact matrix product over the field."""
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        vec = b.ndim == 1
        if vec:
            b = b[:, None]
        if a.shape[1] == 0:
            out = np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
        elif self.k == 1:
            out = _matmul_mod_prime(a, b, self.p)
        else:
            out = self._matmul_ext(a, b)
        return out[:, 0] if vec else out

    def _matmul_ext(self, a, b):
        p, k = self.p, self.k
        da = [(a // p ** t) % p for t in range(k)]
        db = [(b // p ** t) % p for t in range(k)]
        planes = [np.zeros((a.shape[0], b.shape[1]), dtype=np.int64) for _ in range(2 * k - 1)]
        for s in range(k):
            for t in range(k):
                planes[s + t] = (planes[s + t] + _matmul_mod_prime(da[s], db[t], p)) % p
        out = np.zeros_like(planes[0])
        for v in range(k):
            coord = np.zeros_like(planes[0])
            for u in range(2 * k - 1):
                c = int(self._red[u, v])
                if c:
                    coord = (coord + c * planes[u]) % p
            out += coord * p ** v
        return out

    def random(self, rng: np.random.Generator, size=None):
        return rng.integers(0, self.q, size=size)

    def random_nonzero(self, rng: np.random.Generator, size=None):
        return rng.integers(1, self.q, size=size)


def pow_mod_array(a: np.ndarray, e: int, p: int) -> np.ndarray:
    result = np.ones_like(a)
    base = a % p
    while e:
        if e & 1:
            result = result * base % p
        base = base * base % p
        e >>= 1
    return result


@lru_cache(maxsize=None)
def get_field(p: int, k: int = 1) -> GF:
    return GF(p, k)


class FieldElement:
    """Immutable element of a finite field with operator overloading.

    This is the user-facing scalar type; internal loops use raw integer codes.
    """

    __slots__ = ("field", "value")

    def __init__(self, field: GF, value: int):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "value", int(value) % field.q if field.k == 1 else int(value))
        if not 0 <= self.value < field.q:
            raise FieldError(f"code {value} out of range for {field}")

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field != self.field:
                raise FieldError("elements of different fields")
            return other.value
        if isinstance(other, (int, np.integer)):
            return self.field.embed(int(other))
        return NotImplemented

    def _wrap(self, v: int) -> FieldElement:
        return FieldElement(self.field, v)

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.add(self.value, o))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.sub(self.value, o))

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.sub(o, self.value))

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.mul(self.value, o))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.field.div(self.value, o))

    def __neg__(self):
        return self._wrap(self.field.neg(self.value))

    def __pow__(self, e: int):
        return self._wrap(self.field.pow(self.value, e))

    def frobenius(self) -> FieldElement:
        return self._wrap(self.field.frobenius(self.value))

    def inverse(self) -> FieldElement:
        return self._wrap(self.field.inv(self.value))

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.value == o

    def __hash__(self):
        return hash((self.field.p, self.field.k, self.value))

    def __bool__(self):
        return self.value != 0

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.value}@{self.field!r}"
