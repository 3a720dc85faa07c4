"""Arithmetic in F_q and in o2 = F_q[w]/(w^2) for an odd prime q.

An element of o2 is a + w*b with a, b residues mod q.  Everything here is
scalar and immutable; the batched matrix code lives in ``matrices``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SUPPORTED_Q = (3, 5, 7)


class NonUnit(ArithmeticError):
    pass


def check_q(q: int) -> int:
    q = int(q)
    if q < 3 or q % 2 == 0 or any(q % d == 0 for d in range(2, int(q**0.5) + 1)):
        raise ValueError(f"q must be an odd prime, got {q}")
    return q


@dataclass(frozen=True)
class FqElem:
    value: int
    q: int

    def __post_init__(self):
        object.__setattr__(self, "value", self.value % self.q)

    def __add__(self, other):
        return FqElem(self.value + _v(other), self.q)

    __radd__ = __add__

    def __sub__(self, other):
        return FqElem(self.value - _v(other), self.q)

    def __neg__(self):
        return FqElem(-self.value, self.q)

    def __mul__(self, other):
        return FqElem(self.value * _v(other), self.q)

    __rmul__ = __mul__

    def inv(self) -> "FqElem":
        if self.value == 0:
            raise NonUnit("0 has no inverse in F_q")
        return FqElem(pow(self.value, -1, self.q), self.q)

    def __int__(self):
        return self.value


def _v(x):
    return x.value if isinstance(x, FqElem) else int(x)


@dataclass(frozen=True)
class O2Elem:
    """a + w*b with w^2 = 0."""

    a: int
    b: int
    q: int

    def __post_init__(self):
        object.__setattr__(self, "a", self.a % self.q)
        object.__setattr__(self, "b", self.b % self.q)

    @classmethod
    def lift(cls, x, q):
        return cls(_v(x), 0, q)

    @classmethod
    def uniformizer(cls, q):
        return cls(0, 1, q)

    def reduce(self) -> FqElem:
        return FqElem(self.a, self.q)

    def is_unit(self) -> bool:
        return self.a != 0

    def __add__(self, o):
        o = self._coerce(o)
        return O2Elem(self.a + o.a, self.b + o.b, self.q)

    __radd__ = __add__

    def __sub__(self, o):
        o = self._coerce(o)
        return O2Elem(self.a - o.a, self.b - o.b, self.q)

    def __neg__(self):
        return O2Elem(-self.a, -self.b, self.q)

    def __mul__(self, o):
        o = self._coerce(o)
        return O2Elem(self.a * o.a, self.a * o.b + self.b * o.a, self.q)

    __rmul__ = __mul__

    def inv(self) -> "O2Elem":
        return o2_inv(self)

    def code(self) -> int:
        return self.a + self.q * self.b

    @classmethod
    def from_code(cls, c, q):
        return cls(c % q, c // q, q)

    def _coerce(self, o):
        if isinstance(o, O2Elem):
            if o.q != self.q:
                raise ValueError("mixed moduli")
            return o
        return O2Elem(_v(o), 0, self.q)

    def __repr__(self):
        return f"{self.a}+{self.b}w" if self.b else f"{self.a}"


def o2_inv(x: O2Elem) -> O2Elem:
    if x.a == 0:
        raise NonUnit(f"{x!r} is not a unit of o2")
    ai = pow(x.a, -1, x.q)
    return O2Elem(ai, -ai * ai * x.b, x.q)


def squares(q):
    return {(y * y) % q for y in range(q)}


def find_nonsquare(q: int) -> FqElem:
    q = check_q(q)
    sq = squares(q)
    return FqElem(next(a for a in range(1, q) if a not in sq), q)


def find_cubic_param(q: int) -> FqElem:
    """Smallest a for which y^3 - y - a has no root in F_q."""
    q = check_q(q)
    values = {(y**3 - y) % q for y in range(q)}
    return FqElem(next(a for a in range(q) if a not in values), q)


def primitive_root(q: int) -> int:
    q = check_q(q)
    for g in range(2, q + 1):
        if len({pow(g, k, q) for k in range(q - 1)}) == q - 1:
            return g % q
    return 1  # unreachable for q >= 3


def discrete_log_table(q: int) -> np.ndarray:
    """log[x] = k with g^k = x for the fixed primitive root g; log[0] = -1."""
    g = primitive_root(q)
    log = np.full(q, -1, dtype=np.int64)
    for k in range(q - 1):
        log[pow(g, k, q)] = k
    return log


@dataclass(frozen=True)
class EmbeddingParams:
    q: int
    alpha: int
    cubic_a: int

    @classmethod
    def for_q(cls, q):
        return cls(q, find_nonsquare(q).value, find_cubic_param(q).value)

    def quadratic(self, c, d) -> np.ndarray:
        """c + d*sqrt(alpha) as a 2x2 matrix over F_q."""
        q = self.q
        return np.array([[c, d * self.alpha], [d, c]], dtype=np.int64) % q

    def cubic(self, a0, a1, a2) -> np.ndarray:
        """a0 + a1*z + a2*z^2 with z^3 = z + cubic_a, as a 3x3 matrix over F_q."""
        q, a = self.q, self.cubic_a
        return np.array(
            [[a0, a2 * a, a1 * a], [a1, a0 + a2, a1 + a2 * a], [a2, a1, a2 + a0]],
            dtype=np.int64,
        ) % q

    def field_units(self, degree):
        """All nonzero images of F_{q^degree} (degree 2 or 3) as matrices."""
        q = self.q
        if degree == 2:
            mats = [self.quadratic(c, d) for c in range(q) for d in range(q) if c or d]
        elif degree == 3:
            mats = [self.cubic(a0, a1, a2) for a0 in range(q) for a1 in range(q)
                    for a2 in range(q) if a0 or a1 or a2]
        else:
            raise ValueError("degree must be 2 or 3")
        return np.array(mats)
