"""Additive and one-dimensional characters, extensions, regular classes.

Characters take values in the roots of unity of Z[zeta_M], M = modulus_for(q),
so a character is stored as an exponent map: element -> k mod M.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import gcd
from typing import Callable

import numpy as np

from . import groups as grp
from . import matrices as mx
from .cyclotomic import CycValue, modulus_for
from .local_ring import EmbeddingParams, FqElem, O2Elem, discrete_log_table, squares


class NotNormal(ValueError):
    pass


class ScalarInput(ValueError):
    pass


class NoSolution(ValueError):
    pass


class InconsistentOnIntersection(ValueError):
    pass


# --- additive characters ----------------------------------------------------

@dataclass(frozen=True)
class AdditiveChar:
    """psi0(a + w b) = zeta_q^{scale (a + b)}."""

    q: int
    scale: int = 1

    @property
    def m(self):
        return modulus_for(self.q)

    def exponent(self, a, b=0):
        return (self.scale * (np.asarray(a) + np.asarray(b)) * (self.m // self.q)) % self.m

    def __call__(self, x: O2Elem) -> CycValue:
        return CycValue.root(self.exponent(x.a, x.b), self.m)

    def residue_exponent(self, t):
        """psi0(w t) for t in F_q, the induced character of the residue field."""
        return self.exponent(0, t)


class OneDimChar:
    """A one-dimensional character given by a vectorised exponent map."""

    def __init__(self, domain, fn: Callable[[np.ndarray], np.ndarray], m: int, label=""):
        self.domain = domain
        self._fn = fn
        self.m = m
        self.label = label

    def exponents(self, xs):
        xs = np.asarray(xs, dtype=np.int64)
        return np.asarray(self._fn(xs), dtype=np.int64) % self.m

    def exponent(self, x):
        return int(self.exponents(np.asarray(x)[None])[0])

    def __call__(self, x) -> CycValue:
        return CycValue.root(self.exponent(x), self.m)

    def __mul__(self, other: "OneDimChar"):
        return OneDimChar(self.domain, lambda xs: self.exponents(xs) + other.exponents(xs),
                          self.m, f"{self.label}*{other.label}")

    def conj(self):
        return OneDimChar(self.domain, lambda xs: -self.exponents(xs), self.m,
                          f"conj({self.label})")

    def __repr__(self):
        return f"OneDimChar({self.label})"


class TableChar(OneDimChar):
    """Character stored as a lookup table over an enumerated group."""

    def __init__(self, domain, codes, exps, m, label=""):
        order = np.argsort(codes)
        self.codes = np.asarray(codes, dtype=np.int64)[order]
        self.table = np.asarray(exps, dtype=np.int64)[order] % m
        q = domain.q

        def fn(xs):
            c = mx.pack(xs, q)[:, 0]
            pos = np.minimum(np.searchsorted(self.codes, c), len(self.codes) - 1)
            if not np.all(self.codes[pos] == c):
                raise ValueError("element outside the character's domain")
            return self.table[pos]

        super().__init__(domain, fn, m, label)


def trivial_char(domain, q):
    return OneDimChar(domain, lambda xs: np.zeros(len(xs), dtype=np.int64), modulus_for(q),
                      "1")


def phi_A(a, psi0: AdditiveChar, on_kernel=True):
    """X -> psi0(tr(A X)).

    With on_kernel=True the character lives on J^1 = I + w M_n(F_q):
    I + w X -> psi0(w tr(A X)), A a residue matrix.  Otherwise A is a
    matrix over o2 (2, n, n) and the input is an additive batch of the
    same shape.
    """
    q = psi0.q
    if on_kernel:
        a = np.asarray(a, dtype=np.int64) % q
        n = a.shape[-1]

        def fn(xs):
            t = np.trace(a @ xs[:, 1], axis1=-2, axis2=-1) % q
            return psi0.exponent(0, t)

        return OneDimChar(grp.kernel_group(n, q), fn, psi0.m, "phi_A")
    a = np.asarray(a, dtype=np.int64)

    def fn(xs):
        ax = mx.mul(a, xs, q)
        tr = mx.trace(ax, q)
        return psi0.exponent(tr[:, 0], tr[:, 1])

    return OneDimChar(None, fn, psi0.m, "psi_A")


def psi_N(psi0: AdditiveChar):
    """Character of N = {(I X; 0 I)}: X -> psi0(tr X)."""
    q = psi0.q

    def fn(xs):
        x = xs[:, :, :2, 2:]
        tr = (x[:, :, 0, 0] + x[:, :, 1, 1]) % q
        return psi0.exponent(tr[:, 0], tr[:, 1])

    return OneDimChar(grp.catalog("N", q), fn, psi0.m, "psi")


def unit_char(q, j, t, scale=1):
    """Character of o2^x: a + w b -> zeta_{q-1}^{j log a} zeta_q^{scale t b / a}."""
    m = modulus_for(q)
    log = discrete_log_table(q)
    inv = np.array([pow(int(a), -1, q) if a else 0 for a in range(q)], dtype=np.int64)

    def fn(xs):
        a = xs[:, 0, 0, 0] % q
        b = xs[:, 1, 0, 0] % q
        if np.any(a == 0):
            raise ValueError("non-unit")
        return (j * log[a] * (m // (q - 1)) + scale * t * ((b * inv[a]) % q) * (m // q)) % m

    return OneDimChar(grp.catalog("GL1", q), fn, m, f"chi({j},{t})")


def unit_char_level(chi: OneDimChar, q):
    """The t with chi(1 + w x) = zeta_q^{t x} (relative to scale 1)."""
    m = chi.m
    e = chi.exponent(mx.from_o2([[O2Elem(1, 1, q)]], q))
    return (e // (m // q)) % q


def scalar_restriction(chi: OneDimChar, n, q):
    """The character z -> chi(z I_n) of o2^x, as a function on 1x1 matrices."""
    def fn(xs):
        return chi.exponents(_scalar_batch(xs, n))

    return OneDimChar(grp.catalog("GL1", q), fn, chi.m, f"{chi.label}|Z")


def _scalar_batch(xs1, n):
    out = np.zeros((len(xs1), 2, n, n), dtype=np.int64)
    for i in range(n):
        out[:, :, i, i] = xs1[:, :, 0, 0]
    return out


def units_of_o2(q):
    """All 1x1 matrices a + w b with a != 0."""
    return np.array([mx.from_o2([[O2Elem(a, b, q)]], q) for a in range(1, q) for b in range(q)])


def same_character(c1: OneDimChar, c2: OneDimChar, elements) -> bool:
    return bool(np.array_equal(c1.exponents(elements), c2.exponents(elements)))


def zj1_char(omega: OneDimChar, b, psi0: AdditiveChar, n=2):
    """omega * phi_B on Z J^1: z (I + w X) -> omega(z) psi0(w tr(B X))."""
    q = psi0.q
    b = np.asarray(b, dtype=np.int64) % q
    # consistency on Z cap J^1 = {(1 + w x) I}
    for x in range(q):
        lhs = omega.exponent(mx.from_o2([[O2Elem(1, x, q)]], q))
        rhs = int(psi0.exponent(0, x * int(np.trace(b)) % q))
        if lhs != rhs:
            raise InconsistentOnIntersection(
                "omega and phi_B disagree on the scalars of J^1")
    inv = np.array([pow(int(a), -1, q) if a else 0 for a in range(q)], dtype=np.int64)

    def fn(xs):
        a = xs[:, 0, 0, 0] % q
        ai = inv[a]
        z = np.zeros((len(xs), 2, 1, 1), dtype=np.int64)
        z[:, 0, 0, 0] = a
        x = (xs[:, 1] * ai[:, None, None]) % q
        t = np.trace(b @ x, axis1=-2, axis2=-1) % q
        return omega.exponents(z) + psi0.exponent(0, t)

    return OneDimChar(grp.catalog("ZJ1_2", q) if n == 2 else None, fn, psi0.m, "omega*phi_B")


# --- extensions ------------------------------------------------------------

def _solve_root(e, target, m):
    """All x mod m with e x = target (mod m)."""
    g = gcd(e, m)
    if target % g:
        return []
    e2, t2, m2 = e // g, target // g, m // g
    x0 = (t2 * pow(e2, -1, m2)) % m2 if m2 > 1 else 0
    return [(x0 + k * m2) % m for k in range(g)]


def all_extensions(h: grp.SubgroupSpec, k: grp.SubgroupSpec, lam: OneDimChar,
                   elements=None, budget=grp.DEFAULT_BUDGET):
    """Every one-dimensional character of H restricting to lam on K.

    Works through the quotient H/K, which must be abelian; an empty list
    means lam does not extend.
    """
    q = h.q
    m = lam.m
    if not np.all(k.member(mx.mul(mx.mul(h.generators[:, None], k.generators[None], q),
                                  mx.inv(h.generators, q)[:, None], q).reshape(
                                      (-1,) + h.generators.shape[1:]))):
        raise NotNormal(f"{k.name} is not normal in {h.name}")
    elems = enumerate_or(h, elements, budget)
    keys = k.keys(elems)
    first = {}
    for i, key in enumerate(keys):
        first.setdefault(key, i)
    reps = elems[list(first.values())]
    nq = len(reps)
    if nq * k.order != h.order:
        raise grp.OrderMismatch("coset count of H/K does not match orders")
    index = {key: j for j, key in enumerate(first)}
    # lam must be invariant under conjugation by H
    kg = k.generators
    for g in h.generators:
        conj = mx.mul(mx.mul(mx.inv(g, q)[None], kg, q), g[None], q)
        if not np.array_equal(lam.exponents(conj), lam.exponents(kg)):
            return []
    prod = mx.mul(reps[:, None], reps[None, :], q).reshape((-1,) + reps.shape[1:])
    prod_idx = np.array([index[key] for key in k.keys(prod)]).reshape(nq, nq)
    if not np.array_equal(prod_idx, prod_idx.T):
        raise NotImplementedError("H/K is not abelian")
    kappa = mx.mul(mx.inv(reps[prod_idx.reshape(-1)], q), prod, q)
    if not np.all(k.member(kappa)):
        raise grp.FingerprintUnsound("coset decomposition failed")
    cocycle = lam.exponents(kappa).reshape(nq, nq)

    ident = int(np.argmax(mx.is_identity(reps)))
    # greedy generators of the quotient
    qgens = []
    covered = {ident}
    while len(covered) < nq:
        g = next(j for j in range(nq) if j not in covered)
        qgens.append(g)
        frontier = list(covered)
        while frontier:
            nxt = []
            for a in frontier:
                for b in qgens:
                    c = int(prod_idx[a, b])
                    if c not in covered:
                        covered.add(c)
                        nxt.append(c)
            frontier = nxt

    choices = []
    for g in qgens:
        e, power = 1, reps[g]
        while not k.contains(power):
            power = mx.mul(power, reps[g], q)
            e += 1
        choices.append(_solve_root(e, lam.exponent(power), m))

    found = []
    for assignment in product(*choices):
        mu = _propagate(ident, qgens, assignment, prod_idx, cocycle, m)
        if mu is None:
            continue
        lhs = (mu[:, None] + mu[None, :]) % m
        rhs = (mu[prod_idx] + cocycle) % m
        if np.array_equal(lhs, rhs):
            found.append(mu)

    out = []
    codes = mx.pack(elems, q)[:, 0]
    coset_of = np.array([index[key] for key in keys])
    local = lam.exponents(mx.mul(mx.inv(reps[coset_of], q), elems, q))
    for i, mu in enumerate(found):
        exps = (mu[coset_of] + local) % m
        out.append(TableChar(h, codes, exps, m, label=f"ext{i}"))
    return out


def _propagate(ident, qgens, assignment, prod_idx, cocycle, m):
    nq = prod_idx.shape[0]
    mu = np.full(nq, -1, dtype=np.int64)
    mu[ident] = 0
    frontier = [ident]
    while frontier:
        nxt = []
        for a in frontier:
            for g, val in zip(qgens, assignment):
                c = prod_idx[a, g]
                v = (mu[a] + val - cocycle[a, g]) % m
                if mu[c] < 0:
                    mu[c] = v
                    nxt.append(c)
                elif mu[c] != v:
                    return None
        frontier = nxt
    return mu


_ENUM_CACHE = {}


def enumerate_or(spec, elements=None, budget=grp.DEFAULT_BUDGET):
    if elements is not None:
        return elements
    key = id(spec)
    if key not in _ENUM_CACHE:
        _ENUM_CACHE[key] = (spec, grp.enumerate_group(spec, budget))
    return _ENUM_CACHE[key][1]


# --- regular classes ---------------------------------------------------------

@dataclass(frozen=True)
class RegularClass:
    family: str  # "X1", "X2" or "X3"
    params: tuple
    q: int
    alpha: int

    @property
    def matrix(self) -> np.ndarray:
        q = self.q
        if self.family == "X1":
            m, n = self.params
            return np.array([[m, n * self.alpha], [n, m]], dtype=np.int64) % q
        if self.family == "X2":
            (m,) = self.params
            return np.array([[m, 1], [0, m]], dtype=np.int64) % q
        m, n = self.params
        return np.array([[m, 0], [0, n]], dtype=np.int64) % q

    @property
    def trace(self):
        return int(np.trace(self.matrix)) % self.q


def regular_taxonomy(b, q) -> RegularClass:
    b = np.asarray(b, dtype=np.int64) % q
    if b[0, 1] == 0 and b[1, 0] == 0 and b[0, 0] == b[1, 1]:
        raise ScalarInput("scalar matrices are not regular")
    alpha = EmbeddingParams.for_q(q).alpha
    tr = int(b[0, 0] + b[1, 1]) % q
    det = int(b[0, 0] * b[1, 1] - b[0, 1] * b[1, 0]) % q
    half = pow(2, -1, q)
    disc = (tr * tr - 4 * det) % q
    m = (tr * half) % q
    if disc == 0:
        return RegularClass("X2", (m,), q, alpha)
    if disc in squares(q):
        roots = sorted(r for r in range(q) if (r * r - tr * r + det) % q == 0)
        return RegularClass("X3", tuple(roots), q, alpha)
    n2 = ((m * m - det) * pow(alpha, -1, q)) % q
    n = min(r for r in range(1, q) if (r * r) % q == n2)
    return RegularClass("X1", (m, n), q, alpha)


def regular_classes(q, trace=None):
    """Representatives of all regular classes of M_2(F_q), in X1, X2, X3 order."""
    alpha = EmbeddingParams.for_q(q).alpha
    out = []
    for m in range(q):
        for n in range(1, (q + 1) // 2):
            out.append(RegularClass("X1", (m, n), q, alpha))
    for m in range(q):
        out.append(RegularClass("X2", (m,), q, alpha))
    for m in range(q):
        for n in range(m + 1, q):
            out.append(RegularClass("X3", (m, n), q, alpha))
    if trace is not None:
        out = [c for c in out if c.trace == trace % q]
    return out


def is_regular_3x3(c, q) -> bool:
    return grp.is_regular_residue(np.asarray(c) % q, q)


def is_elliptic(b, q) -> bool:
    """Characteristic polynomial irreducible over F_q."""
    pattern = grp.factor_pattern(grp.charpoly(b, q), q)
    return pattern == [(np.asarray(b).shape[0], 1)]


def solve_m0(omega: OneDimChar, psi0: AdditiveChar) -> FqElem:
    """The m0 in F_q with psi0(2 m0 x) = omega(1 + w x) for every x."""
    q = psi0.q
    targets = [omega.exponent(mx.from_o2([[O2Elem(1, x, q)]], q)) for x in range(q)]
    for m0 in range(q):
        if all(int(psi0.exponent(2 * m0 * x % q)) == targets[x] for x in range(q)):
            return FqElem(m0, q)
    raise NoSolution("no m0 matches the central character")
