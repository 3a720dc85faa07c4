"""Subgroups of GL_n(o2), transversals, double cosets and conjugacy classes.

A subgroup is described by a membership predicate, a generating set, a coset
fingerprint and its exact order.  Nothing here ever enumerates GL_4(o2);
coset spaces are explored by breadth-first search on fingerprints.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from . import cache as _cache
from . import kernels as K
from . import matrices as mx
from .local_ring import EmbeddingParams, O2Elem, check_q, primitive_root

DEFAULT_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    pass


class ClosureMismatch(RuntimeError):
    pass


class FingerprintUnsound(RuntimeError):
    pass


class UnknownName(KeyError):
    pass


class OrderMismatch(RuntimeError):
    pass


@dataclass(eq=False)
class SubgroupSpec:
    name: str
    n: int
    q: int
    generators: np.ndarray
    member: Callable[[np.ndarray], np.ndarray]
    fingerprint: Callable[[np.ndarray], np.ndarray]
    order: int
    data: dict = field(default_factory=dict)

    def contains(self, x) -> bool:
        return bool(self.member(np.asarray(x)[None])[0])

    def keys(self, xs):
        """Hashable coset keys for a batch."""
        fp = self.fingerprint(np.ascontiguousarray(xs, dtype=np.int64))
        if fp.shape[1] == 1:
            return fp[:, 0].tolist()
        return [tuple(r) for r in fp.tolist()]

    def __repr__(self):
        return f"SubgroupSpec({self.name}, n={self.n}, q={self.q}, order={self.order})"


# --- closed forms ----------------------------------------------------------

def gl_order_fq(n, q):
    out = 1
    for i in range(n):
        out *= q**n - q**i
    return out


def gl_order(n, q):
    return q ** (n * n) * gl_order_fq(n, q)


def gaussian_binomial(n, k, q):
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def charpoly(b, q):
    """Coefficients [c0, ..., c_{n-1}, 1] of det(xI - b) over F_q (n <= 3)."""
    b = np.asarray(b, dtype=np.int64) % q
    n = b.shape[0]
    tr = int(np.trace(b))
    det = int(round(np.linalg.det(b)))
    if n == 1:
        return [(-tr) % q, 1]
    if n == 2:
        return [det % q, (-tr) % q, 1]
    if n == 3:
        m2 = sum(int(b[i, i] * b[j, j] - b[i, j] * b[j, i])
                 for i in range(3) for j in range(i + 1, 3))
        return [(-det) % q, m2 % q, (-tr) % q, 1]
    raise ValueError("n <= 3 only")


def _divide_root(poly, r, q):
    out = [0] * (len(poly) - 1)
    carry = 0
    for i in range(len(poly) - 1, 0, -1):
        carry = (poly[i] + r * carry) % q
        out[i - 1] = carry
    return out


def factor_pattern(coeffs, q):
    """[(degree, multiplicity), ...] of a monic polynomial of degree <= 3."""
    poly = [c % q for c in coeffs]
    roots = {}
    while len(poly) > 1:
        r = next((r for r in range(q)
                  if sum(c * pow(r, i, q) for i, c in enumerate(poly)) % q == 0), None)
        if r is None:
            break
        poly = _divide_root(poly, r, q)
        roots[r] = roots.get(r, 0) + 1
    pattern = [(1, m) for m in roots.values()]
    if len(poly) > 1:
        pattern.append((len(poly) - 1, 1))
    return pattern


def algebra_unit_count(pattern, q):
    out = 1
    for d, e in pattern:
        out *= q ** (d * e) - q ** (d * (e - 1))
    return out


# --- generators ------------------------------------------------------------

def gl_generators(n, q, with_kernel=True):
    g = primitive_root(q)
    gens = [mx.from_parts(np.diag([g] + [1] * (n - 1)))]
    if n >= 2:
        gens.append(mx.elementary(n, 0, 1, 1, q))
        gens.append(mx.permutation([(j + 1) % n for j in range(n)]))
        gens.append(mx.permutation([1, 0] + list(range(2, n))))
    if with_kernel:
        gens.append(mx.elementary(n, 0, 0, O2Elem(0, 1, q), q))
    return gens


def embed(block, n, offset):
    """Place a square matrix (2, m, m) into I_n at (offset, offset)."""
    out = mx.identity(n)
    m = block.shape[-1]
    out[:, offset:offset + m, offset:offset + m] = block
    return out


def kernel_generators(n, q):
    return [mx.elementary(n, i, j, O2Elem(0, 1, q), q) for i in range(n) for j in range(n)]


def _res_closure(gens, q, limit=10**6):
    """Codes of the subgroup of GL_n(F_q) generated by residue matrices."""
    n = gens[0].shape[0]
    ident = np.eye(n, dtype=np.int64)
    w = q ** np.arange(n * n, dtype=np.int64)
    seen = {int(ident.reshape(-1) @ w)}
    frontier = [ident]
    while frontier:
        nxt = []
        for x in frontier:
            for s in gens:
                y = (s @ x) % q
                c = int(y.reshape(-1) @ w)
                if c not in seen:
                    seen.add(c)
                    nxt.append(y)
                    if len(seen) > limit:
                        raise BudgetExceeded("residue closure too large")
        frontier = nxt
    return seen


def polynomial_units(b, q):
    """Invertible elements of F_q[b] for a residue matrix b."""
    b = np.asarray(b, dtype=np.int64) % q
    n = b.shape[0]
    powers = [np.eye(n, dtype=np.int64)]
    for _ in range(n - 1):
        powers.append((powers[-1] @ b) % q)
    units = []
    seen = set()
    for coeffs in np.ndindex(*([q] * n)):
        m = sum(c * p for c, p in zip(coeffs, powers)) % q
        key = m.tobytes()
        if key in seen:
            continue
        seen.add(key)
        if round(np.linalg.det(m)) % q != 0:
            units.append(m)
    return units


def greedy_generators(elements, q):
    w = q ** np.arange(elements[0].size, dtype=np.int64)
    covered = {int(np.eye(elements[0].shape[0], dtype=np.int64).reshape(-1) @ w)}
    gens = []
    for e in elements:
        if int(e.reshape(-1) @ w) in covered:
            continue
        gens.append(e)
        covered = _res_closure(gens, q)
        if len(covered) == len(elements):
            break
    return gens


def is_regular_residue(b, q):
    """Minimal polynomial has degree n (I, b, ..., b^{n-1} independent)."""
    b = np.asarray(b, dtype=np.int64) % q
    n = b.shape[0]
    vecs = [np.eye(n, dtype=np.int64).reshape(-1)]
    for _ in range(n - 1):
        vecs.append(((vecs[-1].reshape(n, n) @ b) % q).reshape(-1))
    return rank_mod(np.array(vecs), q) == n


def rank_mod(a, q):
    a = np.array(a, dtype=np.int64) % q
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if a[i, c] % q), None)
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r] = (a[r] * pow(int(a[r, c]), -1, q)) % q
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % q
        r += 1
        if r == rows:
            break
    return r


# --- membership predicates ---------------------------------------------------

def _commutes(xs, b, q):
    r = xs[..., 0, :, :]
    return np.all((r @ b - b @ r) % q == 0, axis=(-2, -1))


def _lower_zero(xs, k):
    return np.all(xs[..., :, k:, :k] == 0, axis=(-3, -2, -1))


# --- catalog ---------------------------------------------------------------

CATALOG_NAMES = ("GL1", "GL2", "GL3", "GL4", "P", "Q", "N", "U", "Borel2", "Z", "J1_2",
                 "ZJ1_2", "DeltaGL2_N", "BorelTilde2")
PARAM_NAMES = ("Inertia", "T1T2N", "SUO", "GLres")


def _fp_trivial(xs):
    return np.zeros((len(xs), 1), dtype=np.int64)


def _gl(n, q):
    return SubgroupSpec(
        f"GL{n}", n, q, np.array(gl_generators(n, q)),
        member=lambda xs: mx.is_invertible(xs, q),
        fingerprint=_fp_trivial, order=gl_order(n, q))


def _parabolic(k, q, name):
    n = 4
    a = gl_generators(k, q)
    b = gl_generators(n - k, q)
    gens = [embed(g, n, 0) for g in a] + [embed(g, n, k) for g in b]
    gens.append(mx.elementary(n, 0, k, 1, q))
    return SubgroupSpec(
        name, n, q, np.array(gens),
        member=lambda xs: _lower_zero(xs, k),
        fingerprint=lambda xs: K.flag_codes(xs, q, k),
        order=gl_order(k, q) * gl_order(n - k, q) * q ** (2 * k * (n - k)))


def _unipotent_radical(k, q, name):
    n = 4
    gens = []
    for i in range(k):
        for j in range(k, n):
            gens.append(mx.elementary(n, i, j, 1, q))
            gens.append(mx.elementary(n, i, j, O2Elem(0, 1, q), q))
    ident = mx.identity(n)

    def member(xs):
        d = xs - ident
        d[..., :, :k, k:] = 0
        return np.all(d == 0, axis=(-3, -2, -1))

    return SubgroupSpec(name, n, q, np.array(gens), member=member,
                        fingerprint=lambda xs: K.unipotent_radical_codes(xs, q, k),
                        order=q ** (2 * k * (n - k)))


def _borel(q, tilde):
    g = primitive_root(q)
    u = O2Elem(1, 1, q)
    gens = [mx.from_parts(np.diag([g, 1])), mx.from_parts(np.diag([1, g])),
            mx.from_o2([[u, 0], [0, 1]], q), mx.from_o2([[1, 0], [0, u]], q),
            mx.elementary(2, 0, 1, 1, q)]
    order = (q * (q - 1)) ** 2 * q**2
    if tilde:
        gens.append(mx.elementary(2, 1, 0, O2Elem(0, 1, q), q))
        return SubgroupSpec("BorelTilde2", 2, q, np.array(gens),
                            member=lambda xs: xs[..., 0, 1, 0] == 0,
                            fingerprint=lambda xs: K.residue_line_codes(xs, q),
                            order=order * q)
    return SubgroupSpec("Borel2", 2, q, np.array(gens),
                        member=lambda xs: np.all(xs[..., :, 1, 0] == 0, axis=-1),
                        fingerprint=lambda xs: K.flag_codes(xs, q, 1), order=order)


def _scalars(q, n=2):
    g = primitive_root(q)
    gens = [mx.scalar(n, O2Elem(g, 0, q)), mx.scalar(n, O2Elem(1, 1, q))]
    eye = np.eye(n, dtype=bool)

    def member(xs):
        off = np.all(xs[..., :, ~eye] == 0, axis=(-2, -1))
        d = np.diagonal(xs, axis1=-2, axis2=-1)
        return off & np.all(d == d[..., :1], axis=(-2, -1))

    return SubgroupSpec("Z", n, q, np.array(gens), member=member,
                        fingerprint=lambda xs: K.scalar_normal_codes(xs, q, False),
                        order=q * (q - 1))


def _kernel(q, n=2):
    eye = np.eye(n, dtype=np.int64)
    return SubgroupSpec(f"J1_{n}", n, q, np.array(kernel_generators(n, q)),
                        member=lambda xs: np.all(xs[..., 0, :, :] == eye, axis=(-2, -1)),
                        fingerprint=lambda xs: K.residue_codes(xs, q), order=q ** (n * n))


def kernel_group(n, q):
    """J^1 = I + w M_n(F_q)."""
    return _kernel(q, n)


def _zj1(q, n=2):
    z = _scalars(q, n)
    j = _kernel(q, n)
    eye = np.eye(n, dtype=bool)

    def member(xs):
        r = xs[..., 0, :, :]
        off = np.all(r[..., ~eye] == 0, axis=-1)
        d = np.diagonal(r, axis1=-2, axis2=-1)
        return off & np.all(d == d[..., :1], axis=-1)

    return SubgroupSpec("ZJ1_2", n, q, np.concatenate([z.generators, j.generators]),
                        member=member,
                        fingerprint=lambda xs: K.scalar_normal_codes(xs, q, True),
                        order=q ** (n * n) * (q - 1))


def _delta_n(q):
    gens = [mx.block_diag(g, g) for g in gl_generators(2, q)]
    gens += list(_unipotent_radical(2, q, "N").generators)

    def member(xs):
        return _lower_zero(xs, 2) & np.all(xs[..., :, :2, :2] == xs[..., :, 2:, 2:],
                                           axis=(-3, -2, -1))

    return SubgroupSpec("DeltaGL2_N", 4, q, np.array(gens), member=member,
                        fingerprint=lambda xs: K.diagonal_quotient_codes(xs, q),
                        order=gl_order(2, q) * q**8)


def inertia(b, q, name=None):
    """Preimage in GL_n(o2) of the centralizer of a regular residue matrix b."""
    b = np.asarray(b, dtype=np.int64) % q
    n = b.shape[0]
    if not is_regular_residue(b, q):
        raise ValueError("inertia groups are built for regular matrices only")
    units = polynomial_units(b, q)
    expected = algebra_unit_count(factor_pattern(charpoly(b, q), q), q)
    if len(units) != expected:
        raise OrderMismatch(f"centralizer has {len(units)} units, closed form {expected}")
    gens = [mx.lift(u) for u in greedy_generators(units, q)] + kernel_generators(n, q)
    bc = np.ascontiguousarray(b)
    return SubgroupSpec(
        name or f"Inertia{n}", n, q, np.array(gens),
        member=lambda xs: _commutes(xs, bc, q),
        fingerprint=lambda xs: K.centralizer_labels(np.ascontiguousarray(xs), bc, q),
        order=expected * q ** (n * n), data={"B": bc})


def t1t2n(b1, b2, q):
    """T1 T2 N inside P, T_i the inertia group of b_i in GL_2(o2)."""
    t1, t2 = inertia(b1, q), inertia(b2, q)
    gens = [embed(g, 4, 0) for g in t1.generators] + [embed(g, 4, 2) for g in t2.generators]
    gens += list(_unipotent_radical(2, q, "N").generators)
    c1, c2 = t1.data["B"], t2.data["B"]
    r = q**4

    def member(xs):
        return (_lower_zero(xs, 2) & _commutes(xs[..., :, :2, :2], c1, q)
                & _commutes(xs[..., :, 2:, 2:], c2, q))

    def fingerprint(xs):
        w = K.block_pair_codes(np.ascontiguousarray(xs), q, c1, c2)
        return ((w[:, 0] * r + w[:, 1]) * r + w[:, 2]).reshape(-1, 1)

    return SubgroupSpec("T1T2N", 4, q, np.array(gens), member=member,
                        fingerprint=fingerprint, order=t1.order * t2.order * q**8,
                        data={"B1": c1, "B2": c2, "T1": t1, "T2": t2})


def suo(c, q):
    """S U o2^x inside Q, S the inertia group of c in GL_3(o2)."""
    s = inertia(c, q)
    g = primitive_root(q)
    gens = [embed(x, 4, 0) for x in s.generators]
    gens.append(embed(mx.from_parts([[g]]), 4, 3))
    gens.append(embed(mx.from_o2([[O2Elem(1, 1, q)]], q), 4, 3))
    gens += list(_unipotent_radical(3, q, "U").generators)
    cc = s.data["B"]
    r = q**9

    def member(xs):
        return _lower_zero(xs, 3) & _commutes(xs[..., :, :3, :3], cc, q)

    def fingerprint(xs):
        w = K.block_31_codes(np.ascontiguousarray(xs), q, cc)
        return (w[:, 0] * r + w[:, 1]).reshape(-1, 1)

    return SubgroupSpec("SUO", 4, q, np.array(gens), member=member, fingerprint=fingerprint,
                        order=s.order * q**6 * q * (q - 1), data={"C": cc, "S": s})


def residue_gl(n, q):
    """GL_n(F_q) as the constant matrices inside GL_n(o2)."""
    return SubgroupSpec(f"GL{n}res", n, q, np.array(gl_generators(n, q, with_kernel=False)),
                        member=lambda xs: np.all(xs[..., 1, :, :] == 0, axis=(-2, -1)),
                        fingerprint=lambda xs: K.constant_quotient_codes(
                            np.ascontiguousarray(xs), q),
                        order=gl_order_fq(n, q))


def subgroup_catalog(name, q, **params) -> SubgroupSpec:
    q = check_q(q)
    if name in ("GL1", "GL2", "GL3", "GL4"):
        return _gl(int(name[2]), q)
    if name == "P":
        return _parabolic(2, q, "P")
    if name == "Q":
        return _parabolic(3, q, "Q")
    if name == "N":
        return _unipotent_radical(2, q, "N")
    if name == "U":
        return _unipotent_radical(3, q, "U")
    if name == "Borel2":
        return _borel(q, tilde=False)
    if name == "BorelTilde2":
        return _borel(q, tilde=True)
    if name == "Z":
        return _scalars(q)
    if name == "J1_2":
        return _kernel(q)
    if name == "ZJ1_2":
        return _zj1(q)
    if name == "DeltaGL2_N":
        return _delta_n(q)
    if name == "Inertia":
        return inertia(params["B"], q)
    if name == "T1T2N":
        return t1t2n(params["B1"], params["B2"], q)
    if name == "SUO":
        return suo(params["C"], q)
    if name == "GLres":
        return residue_gl(params.get("n", 2), q)
    raise UnknownName(name)


@lru_cache(maxsize=None)
def catalog(name, q):
    return subgroup_catalog(name, q)


# --- enumeration -----------------------------------------------------------

def _codes_as_keys(codes):
    if codes.shape[1] == 1:
        return codes[:, 0]
    return np.array([int(a) | (int(b) << 64) for a, b in codes.tolist()], dtype=object)


def enumerate_group(spec: SubgroupSpec, budget=DEFAULT_BUDGET) -> np.ndarray:
    """All elements, by closure of the generators under multiplication."""
    if spec.order > budget:
        raise BudgetExceeded(f"{spec.name}: order {spec.order} over budget {budget}")
    q = spec.q
    ident = mx.identity(spec.n)[None]
    seen = set(_codes_as_keys(mx.pack(ident, q)).tolist())
    chunks = [ident]
    frontier = ident
    while len(frontier):
        fresh = []
        for s in spec.generators:
            cand = mx.mul(frontier, s, q)
            keys = _codes_as_keys(mx.pack(cand, q)).tolist()
            keep = []
            for i, k in enumerate(keys):
                if k not in seen:
                    seen.add(k)
                    keep.append(i)
            if keep:
                fresh.append(cand[keep])
            if len(seen) > spec.order:
                raise ClosureMismatch(f"{spec.name}: closure exceeds declared order {spec.order}")
        frontier = np.concatenate(fresh) if fresh else frontier[:0]
        if len(frontier):
            chunks.append(frontier)
    elems = np.concatenate(chunks)
    if len(elems) != spec.order:
        raise ClosureMismatch(f"{spec.name}: closure has {len(elems)} elements, "
                              f"declared {spec.order}")
    return elems


# --- transversals ----------------------------------------------------------

@dataclass(eq=False)
class Transversal:
    ambient: SubgroupSpec | None
    subgroup: SubgroupSpec
    reps: np.ndarray
    lookup: dict

    @property
    def index(self):
        return len(self.reps)

    def locate(self, xs):
        """Coset numbers of a batch (-1 when not found)."""
        return np.array([self.lookup.get(k, -1) for k in self.subgroup.keys(xs)],
                        dtype=np.int64)


def coset_bfs(gens, seeds, h: SubgroupSpec, limit=DEFAULT_BUDGET, verify=True):
    """Left cosets xH reachable from the seeds under left multiplication.

    Returns (reps, lookup).  Colliding fingerprints are confirmed by the
    exact test x^-1 y in H.
    """
    q = h.q
    seeds = np.ascontiguousarray(seeds, dtype=np.int64)
    reps_chunks = []
    lookup = {}
    count = 0

    def admit(cand):
        nonlocal count
        keys = h.keys(cand)
        new_idx, clash_idx, clash_rep = [], [], []
        for i, k in enumerate(keys):
            j = lookup.get(k)
            if j is None:
                lookup[k] = count
                count += 1
                new_idx.append(i)
            elif verify:
                clash_idx.append(i)
                clash_rep.append(j)
        return new_idx, clash_idx, clash_rep

    pending_checks = []
    new_idx, _, _ = admit(seeds)
    frontier = seeds[new_idx]
    reps_chunks.append(frontier)
    all_reps = [frontier]
    while len(frontier):
        fresh = []
        for s in gens:
            cand = mx.mul(s, frontier, q)
            new_idx, clash_idx, clash_rep = admit(cand)
            if new_idx:
                fresh.append(cand[new_idx])
            if clash_idx:
                pending_checks.append((cand[clash_idx], np.array(clash_rep)))
            if count > limit:
                raise BudgetExceeded(f"more than {limit} cosets of {h.name}")
        frontier = np.concatenate(fresh) if fresh else frontier[:0]
        if len(frontier):
            all_reps.append(frontier)
        if verify and pending_checks:
            reps_now = np.concatenate(all_reps)
            for cand, idx in pending_checks:
                test = mx.mul(mx.inv(reps_now[idx], q), cand, q)
                if not np.all(h.member(test)):
                    raise FingerprintUnsound(f"fingerprint of {h.name} merged distinct cosets")
            pending_checks = []
    return np.concatenate(all_reps), lookup


def _transversal_cache_path(cache_dir, g, h):
    ghash = _cache.generator_hash(np.concatenate([g.generators.reshape(-1),
                                                  h.generators.reshape(-1)]))
    extra = ""
    for key in ("B", "B1", "B2", "C"):
        if key in h.data:
            extra += "_" + "".join(map(str, np.asarray(h.data[key]).reshape(-1)))
    return Path(cache_dir) / f"tv_q{g.q}_{g.name}_{h.name}{extra}.bin", ghash


def transversal(g: SubgroupSpec, h: SubgroupSpec, budget=DEFAULT_BUDGET,
                cache_dir=None) -> Transversal:
    q = g.q
    if not np.all(g.member(h.generators)):
        raise ValueError(f"{h.name} is not inside {g.name}")
    if g.order % h.order:
        raise OrderMismatch(f"|{h.name}| does not divide |{g.name}|")
    index = g.order // h.order
    if index > budget:
        raise BudgetExceeded(f"[{g.name}:{h.name}] = {index} over budget {budget}")
    cache_dir = _cache.resolve(cache_dir)
    if cache_dir is not None:
        path, ghash = _transversal_cache_path(cache_dir, g, h)
        words = _cache.read(path, q, g.n, f"{g.name}/{h.name}", ghash)
        if words is not None and len(words) == index:
            reps = _words_to_mats(words, q, g.n)
            lookup = {k: i for i, k in enumerate(h.keys(reps))}
            if len(lookup) == index:
                return Transversal(g, h, reps, lookup)
    reps, lookup = coset_bfs(g.generators, mx.identity(g.n)[None], h, limit=index)
    if len(reps) != index:
        raise FingerprintUnsound(f"found {len(reps)} cosets of {h.name}, expected {index}")
    if cache_dir is not None:
        _cache.write(path, q, g.n, f"{g.name}/{h.name}", ghash, _mats_to_words(reps, q))
    return Transversal(g, h, reps, lookup)


def _mats_to_words(reps, q):
    c = mx.pack(reps, q)
    if c.shape[1] == 1:
        c = np.concatenate([c, np.zeros_like(c)], axis=1)
    return c


def _words_to_mats(words, q, n):
    if n <= 3:
        return mx.unpack(words[:, :1], q, n)
    return mx.unpack(words, q, n)


def tower_transversal(outer: Transversal, inner: Transversal, h: SubgroupSpec) -> Transversal:
    """G/H from G/K and K/H: reps r*y, outer index major."""
    q = h.q
    reps = mx.mul(outer.reps[:, None], inner.reps[None, :], q).reshape(
        (-1,) + outer.reps.shape[1:])
    return Transversal(outer.ambient, h, reps, lookup=None)


# --- double cosets ---------------------------------------------------------

def _union_orbits(n_points, edges):
    src = np.concatenate([e[0] for e in edges])
    dst = np.concatenate([e[1] for e in edges])
    graph = coo_matrix((np.ones(len(src), dtype=np.int8), (src, dst)),
                       shape=(n_points, n_points))
    _, labels = connected_components(graph, directed=True, connection="weak")
    return labels


def double_cosets(kk: SubgroupSpec, g: SubgroupSpec, h: SubgroupSpec,
                  budget=DEFAULT_BUDGET, cache_dir=None, trans=None):
    """Orbits of K on G/H: [(representative, orbit size)], minimal index first."""
    t = trans or transversal(g, h, budget=budget, cache_dir=cache_dir)
    q = g.q
    idx = np.arange(t.index)
    edges = []
    for s in kk.generators:
        img = t.locate(mx.mul(s, t.reps, q))
        if np.any(img < 0):
            raise FingerprintUnsound("coset image not in transversal")
        edges.append((idx, img))
    labels = _union_orbits(t.index, edges)
    out = []
    seen = {}
    for i, lab in enumerate(labels.tolist()):
        if lab not in seen:
            seen[lab] = len(out)
            out.append([i, 0])
        out[seen[lab]][1] += 1
    return [(t.reps[i], size) for i, size in out], labels, t


def orbit_of(kk_gens, x, h: SubgroupSpec, limit=DEFAULT_BUDGET):
    return coset_bfs(kk_gens, np.asarray(x)[None], h, limit=limit, verify=False)


def same_double_coset(kk: SubgroupSpec, h: SubgroupSpec, x, y, limit=DEFAULT_BUDGET) -> bool:
    """y in K x H."""
    _, lookup = orbit_of(kk.generators, x, h, limit=limit)
    return h.keys(np.asarray(y)[None])[0] in lookup


# --- conjugacy classes -----------------------------------------------------

@dataclass(eq=False)
class ConjClasses:
    group: SubgroupSpec
    reps: np.ndarray
    sizes: np.ndarray
    elements: np.ndarray
    element_class: np.ndarray
    _codes: np.ndarray = None
    _order: np.ndarray = None

    def __len__(self):
        return len(self.reps)

    def class_of(self, xs):
        codes = _codes_as_keys(mx.pack(xs, self.group.q)).astype(np.int64)
        pos = np.searchsorted(self._codes, codes)
        pos = np.minimum(pos, len(self._codes) - 1)
        if not np.all(self._codes[pos] == codes):
            raise KeyError("element not in group")
        return self.element_class[self._order[pos]]


def conjugacy_classes(spec: SubgroupSpec, budget=DEFAULT_BUDGET) -> ConjClasses:
    q = spec.q
    elems = enumerate_group(spec, budget)
    codes = _codes_as_keys(mx.pack(elems, q)).astype(np.int64)
    order = np.argsort(codes)
    sorted_codes = codes[order]
    idx = np.arange(len(elems))
    edges = []
    for s in spec.generators:
        img = mx.conj(s, elems, q)
        ic = _codes_as_keys(mx.pack(img, q)).astype(np.int64)
        edges.append((idx, order[np.searchsorted(sorted_codes, ic)]))
    labels = _union_orbits(len(elems), edges)
    # class representative: smallest code; classes ordered by that code
    rep_of = {}
    for lab, c, i in sorted(zip(labels.tolist(), codes.tolist(), idx.tolist())):
        if lab not in rep_of or c < rep_of[lab][0]:
            rep_of[lab] = (c, i)
    ordered = sorted(rep_of.items(), key=lambda kv: kv[1][0])
    relabel = {lab: k for k, (lab, _) in enumerate(ordered)}
    element_class = np.array([relabel[l] for l in labels.tolist()], dtype=np.int64)
    sizes = np.bincount(element_class, minlength=len(ordered))
    reps = elems[[i for _, (_, i) in ordered]]
    return ConjClasses(spec, reps, sizes, elems, element_class, sorted_codes, order)


# --- assorted structures used by the checks --------------------------------

def embedding_params(q):
    return EmbeddingParams.for_q(q)
