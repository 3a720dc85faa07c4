"""Exact arithmetic in Z[zeta_m].

Values are dense integer vectors indexed by powers of zeta_m (length m).
Reduction modulo the m-th cyclotomic polynomial happens lazily, only for
equality tests and conversions.
"""
from __future__ import annotations

import cmath
from functools import lru_cache
from math import gcd

import numpy as np


class NonIntegral(ArithmeticError):
    pass


def lcm(*xs):
    out = 1
    for x in xs:
        out = out * x // gcd(out, x)
    return out


def modulus_for(q):
    """One global ring per q: every character value used lies in it."""
    return lcm(q, q - 1, q * q - 1, q**3 - 1)


@lru_cache(maxsize=None)
def cyclotomic_poly(m):
    """Integer coefficients (low to high) of Phi_m."""
    # x^m - 1 = prod_{d | m} Phi_d
    num = np.zeros(m + 1, dtype=object)
    num[0], num[m] = -1, 1
    poly = list(num)
    for d in range(1, m):
        if m % d == 0:
            poly = _poly_div_exact(poly, list(cyclotomic_poly(d)))
    return tuple(int(c) for c in poly)


def _poly_div_exact(num, den):
    num = list(num)
    while num and num[-1] == 0:
        num.pop()
    out = [0] * (len(num) - len(den) + 1)
    for i in range(len(out) - 1, -1, -1):
        c = num[i + len(den) - 1] // den[-1]
        out[i] = c
        for j, d in enumerate(den):
            num[i + j] -= c * d
    if any(num):
        raise ArithmeticError("inexact polynomial division")
    return out


@lru_cache(maxsize=None)
def reduction_matrix(m):
    """Row k holds the coefficients of zeta^k in the power basis of degree phi(m)."""
    phi = cyclotomic_poly(m)
    deg = len(phi) - 1
    rows = np.zeros((m, deg), dtype=np.int64)
    cur = [0] * deg
    cur[0] = 1
    for k in range(m):
        rows[k] = cur
        # multiply by x and reduce with the monic Phi_m
        top = cur[-1]
        cur = [0] + cur[:-1]
        if top:
            cur = [c - top * p for c, p in zip(cur, phi[:-1])]
    return rows


DENSE_LIMIT = 4000


def _long_division(coeffs, m):
    phi = np.array(cyclotomic_poly(m), dtype=np.int64)
    deg = len(phi) - 1
    v = coeffs.copy()
    for k in range(m - 1, deg - 1, -1):
        c = v[k]
        if c:
            v[k - deg:k] -= c * phi[:-1]
            v[k] = 0
    return v[:deg]


class CycValue:
    __slots__ = ("coeffs", "m")

    def __init__(self, coeffs, m):
        self.coeffs = np.asarray(coeffs, dtype=np.int64)
        self.m = m
        if self.coeffs.shape != (m,):
            raise ValueError("coefficient vector must have length m")

    @classmethod
    def zero(cls, m):
        return cls(np.zeros(m, dtype=np.int64), m)

    @classmethod
    def integer(cls, value, m):
        c = np.zeros(m, dtype=np.int64)
        c[0] = value
        return cls(c, m)

    @classmethod
    def root(cls, k, m):
        c = np.zeros(m, dtype=np.int64)
        c[int(k) % m] = 1
        return cls(c, m)

    @classmethod
    def from_exponents(cls, exps, m, weights=None):
        """Sum of zeta^e over e in exps (optionally weighted)."""
        exps = np.asarray(exps, dtype=np.int64) % m
        c = np.bincount(exps, weights=weights, minlength=m)
        return cls(np.rint(c).astype(np.int64) if weights is not None else c, m)

    def _check(self, other):
        if isinstance(other, (int, np.integer)):
            return CycValue.integer(int(other), self.m)
        if other.m != self.m:
            raise ValueError("different cyclotomic moduli")
        return other

    def __add__(self, other):
        other = self._check(other)
        return CycValue(self.coeffs + other.coeffs, self.m)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._check(other)
        return CycValue(self.coeffs - other.coeffs, self.m)

    def __neg__(self):
        return CycValue(-self.coeffs, self.m)

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return CycValue(self.coeffs * int(other), self.m)
        other = self._check(other)
        full = np.convolve(self.coeffs, other.coeffs)
        out = full[: self.m].copy()
        out[: len(full) - self.m] += full[self.m:]
        return CycValue(out, self.m)

    __rmul__ = __mul__

    def conj(self):
        idx = (-np.arange(self.m)) % self.m
        out = np.zeros(self.m, dtype=np.int64)
        np.add.at(out, idx, self.coeffs)
        return CycValue(out, self.m)

    def reduced(self) -> np.ndarray:
        """Coordinates in the power basis 1, zeta, ..., zeta^{phi(m)-1}."""
        if self.m <= DENSE_LIMIT:
            return self.coeffs @ reduction_matrix(self.m)
        return _long_division(self.coeffs, self.m)

    def __eq__(self, other):
        other = self._check(other)
        return bool(np.array_equal(self.reduced(), other.reduced()))

    def __hash__(self):
        return hash(self.reduced().tobytes())

    def is_zero(self):
        return not np.any(self.reduced())

    def exact_div(self, d: int) -> "CycValue":
        """Division by an integer; the reduced form must be divisible."""
        r = self.reduced()
        if np.any(r % d):
            raise NonIntegral(f"value not divisible by {d}")
        out = np.zeros(self.m, dtype=np.int64)
        out[: len(r)] = r // d
        return CycValue(out, self.m)

    def to_integer(self) -> int:
        r = self.reduced()
        if np.any(r[1:]):
            raise NonIntegral("cyclotomic value is not a rational integer")
        return int(r[0])

    def to_complex(self) -> complex:
        z = np.exp(2j * np.pi * np.arange(self.m) / self.m)
        return complex(np.dot(self.coeffs, z))

    def canonical(self):
        """Reduced coefficient list, for reports and hashing."""
        return [int(c) for c in self.reduced()]

    def __repr__(self):
        r = self.reduced()
        nz = [(i, int(c)) for i, c in enumerate(r) if c]
        if not nz:
            return "0"
        return " + ".join(f"{c}*z^{i}" if i else f"{c}" for i, c in nz)


def float_check(value: CycValue, expected: complex, tol=1e-6) -> bool:
    return abs(value.to_complex() - expected) < tol


def root_of_unity_complex(k, m):
    return cmath.exp(2j * cmath.pi * k / m)
