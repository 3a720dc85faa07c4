"""Named machine checks, suites and reports.

Every check returns (computed, expected) as plain JSON data built from
integers; a check passes iff the two are equal.  Expected values are either
closed-form evaluations in q ("closed-form") or frozen outputs of an
independent computation ("frozen-oracle").
"""
from __future__ import annotations

import hashlib
import json
import threading
import time
from collections import defaultdict
from concurrent.futures import FIRST_COMPLETED, ThreadPoolExecutor, wait
from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations
from pathlib import Path
from typing import Callable

import numpy as np

from . import characters as ch
from . import groups as grp
from . import jacquet as jq
from . import matrices as mx
from . import representations as rp
from .local_ring import EmbeddingParams, O2Elem

SCHEMA_VERSION = 1


class UnknownCheck(KeyError):
    pass


class UnsupportedQ(ValueError):
    pass


class Cost(str, Enum):
    INSTANT = "Instant"
    MINUTES = "Minutes"
    HOURS = "Hours"


@dataclass(frozen=True)
class CheckSpec:
    id: str
    claim: str
    q_values: tuple
    cost_class: Cost
    depends_on: tuple
    expected_source: str
    fn: Callable = field(repr=False, compare=False)
    section: str = ""


@dataclass
class CheckReport:
    id: str
    q: int
    status: str
    computed: object = None
    expected: object = None
    wall_time: float = 0.0
    claim: str = ""
    reason: str = ""
    expected_source: str = ""
    path_agreement: dict | None = None

    def to_json(self):
        out = {"id": self.id, "claim_quote": self.claim, "status": self.status,
               "computed": self.computed, "expected": self.expected,
               "wall_time_ms": int(round(self.wall_time * 1000)),
               "expected_source": self.expected_source}
        if self.reason:
            out["reason"] = self.reason
        if self.path_agreement is not None:
            out["path_agreement"] = self.path_agreement
        return out


# --- shared state --------------------------------------------------------------

class Session:
    """Memoised inputs and Jacquet evaluations for one (q, psi0)."""

    def __init__(self, q, psi_scale=1, cache_dir=None):
        self.q = q
        self.psi0 = ch.AdditiveChar(q, psi_scale)
        self.cache_dir = cache_dir
        self._memo = {}
        self._locks = defaultdict(threading.Lock)
        self._guard = threading.Lock()
        self._alt = None

    def memo(self, key, fn):
        with self._guard:
            lock = self._locks[key]
        with lock:
            if key not in self._memo:
                self._memo[key] = fn()
            return self._memo[key]

    def alternative(self):
        """The same session with psi0 replaced by a -> psi0(2a)."""
        with self._guard:
            if self._alt is None:
                self._alt = Session(self.q, 2 * self.psi0.scale % self.q, self.cache_dir)
            return self._alt

    @property
    def classes(self):
        return rp.gl2_classes(self.q)

    def cf(self, key, build):
        return self.memo(("cf", key), lambda: rp.class_function_of(build(), self.classes))

    def transversal(self, kind):
        return self.memo(("tv", kind),
                         lambda: rp.parabolic_transversal(kind, self.q, self.cache_dir))

    # P-side inputs: pairs of strongly cuspidal representations of GL_2(o2)
    def x1(self, m, n=1):
        return ch.RegularClass("X1", (m, n), self.q, EmbeddingParams.for_q(self.q).alpha)

    def p_input(self, name):
        return self.memo(("p_input", name), lambda: self._p_input(name))

    def _p_input(self, name):
        q, psi0 = self.q, self.psi0
        b1 = self.x1(0)
        pi1 = rp.regular_gl2(b1, 0, psi0)
        if name == "distinct":
            pi2 = rp.regular_gl2(self.x1(1), 0, psi0)
        elif name == "equal":
            pi2 = pi1
        elif name == "equal_twisted":
            # same B, an extension whose central character differs on F_q^x only
            units = ch.units_of_o2(q)
            w1 = rp.central_character(pi1).exponents(units)
            _, exts = rp.inertia_extensions(b1.matrix, q, psi0)
            j = next(j for j in range(len(exts))
                     if not np.array_equal(
                         rp.central_character(rp.regular_gl2(b1, j, psi0)).exponents(units), w1))
            pi2 = rp.regular_gl2(b1, j, psi0)
        else:
            raise KeyError(name)
        return pi1, pi2

    def p_rep(self, name):
        return self.memo(("p_rep", name), lambda: rp.rep_from_P(
            *self.p_input(name), cache_dir=self.cache_dir))

    # Q-side inputs: (rho, chi) with rho strongly cuspidal on GL_3(o2)
    def q_input(self, name):
        return self.memo(("q_input", name), lambda: self._q_input(name))

    def _q_input(self, name):
        q, psi0 = self.q, self.psi0
        c = EmbeddingParams.for_q(q).cubic(0, 1, 0)
        rho = self.memo(("rho", 0), lambda: rp.strongly_cuspidal_gl3(c, 0, psi0))
        chi = ch.unit_char(q, 0, 0, psi0.scale)
        if name == "base":
            return rho, chi
        if name == "other_central":
            return rho, ch.unit_char(q, 1, 0, psi0.scale)
        if name == "same_central":
            # another extension, with chi adjusted so that omega_rho * chi is unchanged
            units = ch.units_of_o2(q)
            target = (rp.central_character(rho) * chi).exponents(units)
            for j in range(1, 4):
                rho2 = rp.strongly_cuspidal_gl3(c, j, psi0)
                w2 = rp.central_character(rho2)
                for a in range(q - 1):
                    for t in range(q):
                        chi2 = ch.unit_char(q, a, t, psi0.scale)
                        if np.array_equal((w2 * chi2).exponents(units), target):
                            return rho2, chi2
            raise ch.NoSolution("no second input with the same central character")
        raise KeyError(name)

    def q_rep(self, name):
        return self.memo(("q_rep", name), lambda: rp.rep_from_Q(
            *self.q_input(name), cache_dir=self.cache_dir))

    def jacquet(self, kind, name, path):
        def run():
            rep = self.p_rep(name) if kind == "P" else self.q_rep(name)
            if path == "fast":
                return jq.jacquet_fast(rep, self.psi0, self.classes, self.cache_dir)
            if path == "brute":
                return jq.jacquet_brute(rep, self.psi0, classes=self.classes)
            return jq.jacquet_pieces(rep, self.psi0, self.classes)
        return self.memo(("jacquet", kind, name, path), run)

    def omega(self, rep):
        return rp.central_character(rep)

    def omega_pi_P(self, name):
        pi1, pi2 = self.p_input(name)
        return self.omega(pi1), self.omega(pi2)

    def omega_pi_Q(self, name):
        rho, chi = self.q_input(name)
        return self.omega(rho) * chi


def _same(f, g):
    return int(f == g)


def _digest(f: rp.ClassFunction):
    return hashlib.sha256(np.ascontiguousarray(f.reduced()).tobytes()).hexdigest()[:16]


# --- preliminaries ----------------------------------------------------------------

def check_gl_orders(s: Session):
    q = s.q
    enumerated = {}
    for name in ("GL1", "GL2", "Borel2", "BorelTilde2", "Z", "J1_2", "ZJ1_2"):
        enumerated[name] = len(grp.enumerate_group(grp.catalog(name, q)))
    gl3_res = len(grp.enumerate_group(grp.residue_gl(3, q)))
    enumerated["GL3"] = gl3_res * q**9
    # |GL_4| = [GL_4 : P] |P| with the index counted by coset search
    enumerated["GL4"] = s.transversal("P").index * enumerated["GL2"] ** 2 * q**8
    expected = {"GL1": q * (q - 1), "GL2": grp.gl_order(2, q),
                "Borel2": (q * (q - 1)) ** 2 * q**2, "BorelTilde2": (q * (q - 1)) ** 2 * q**3,
                "Z": q * (q - 1), "J1_2": q**4, "ZJ1_2": (q - 1) * q**4,
                "GL3": grp.gl_order(3, q), "GL4": grp.gl_order(4, q)}
    return enumerated, expected


def _residue_products(left, right, q):
    """Number of distinct products l r over F_q."""
    codes = set()
    n = left.shape[-1]
    w = q ** np.arange(n * n, dtype=np.int64)
    for r in right:
        prod = np.einsum("aij,jk->aik", left, r) % q
        codes.update((prod.reshape(len(left), -1) @ w).tolist())
    return len(codes)


def check_pn1_factorization(s: Session):
    q = s.q
    emb = EmbeddingParams.for_q(q)
    computed, expected = {}, {}
    for n in (2, 3):
        res = grp.enumerate_group(grp.residue_gl(n, q))[:, 0]
        p1 = res[np.all(res[:, 1:, 0] == 0, axis=1)]
        computed[f"n{n}"] = _residue_products(p1, emb.field_units(n), q)
        expected[f"n{n}"] = grp.gl_order_fq(n, q)
    return computed, expected


def check_borel_cosets(s: Session):
    q = s.q
    g, b = grp.catalog("GL2", q), grp.catalog("Borel2", q)
    orbits, labels, t = grp.double_cosets(b, g, b, cache_dir=s.cache_dir)
    listed = [mx.identity(2), mx.permutation([1, 0]),
              mx.from_o2([[1, 0], [O2Elem(0, 1, q), 1]], q)]
    hit = {int(labels[t.locate(x[None])[0]]) for x in listed}
    singles = [mx.from_o2([[1, 0], [O2Elem(a, c, q), 1]], q) for a in range(q) for c in range(q)]
    singles += [mx.from_o2([[O2Elem(0, y, q), 1], [1, 0]], q) for y in range(q)]
    keys = {k for k in b.keys(np.array(singles))}
    computed = {"double_cosets": len(orbits), "listed_double_cosets_hit": len(hit),
                "single_cosets": t.index, "listed_single_cosets_distinct": len(keys)}
    expected = {"double_cosets": 3, "listed_double_cosets_hit": 3,
                "single_cosets": q * q + q, "listed_single_cosets_distinct": q * q + q}
    return computed, expected


def _unit_chars(q):
    return [ch.unit_char(q, j, t) for j in range(q - 1) for t in range(q)]


def _ps_case(c1, c2, q):
    units = ch.units_of_o2(q)
    if np.array_equal(c1.exponents(units), c2.exponents(units)):
        return "equal"
    principal = units[units[:, 0, 0, 0] == 1]
    if np.array_equal(c1.exponents(principal), c2.exponents(principal)):
        return "agree_on_1+wo"
    return "differ_on_1+wo"


def check_ps_components(s: Session):
    q, classes = s.q, s.classes
    norms = defaultdict(set)
    dims = {}
    for c1 in _unit_chars(q):
        for c2 in _unit_chars(q):
            case = _ps_case(c1, c2, q)
            f = rp.class_function_of(rp.principal_series(c1, c2), classes)
            norms[case].add(rp.inner_product(f, f))
            if case == "differ_on_1+wo" or case in dims:
                continue
            # split off Ind from the preimage Borel
            f1 = rp.class_function_of(rp.ind_borel_tilde(c1, c2), classes)
            pieces = [f - f1]
            if case == "equal":
                det = rp.class_function_of(rp.det_char(c1), classes)
                pieces += [det, f1 - det]
            else:
                pieces.append(f1)
            if any(rp.inner_product(p, p) != 1 for p in pieces):
                dims[case] = "reducible piece"
                continue
            dims[case] = sorted(p.dim() for p in pieces)
    computed = {"self_inner": {k: sorted(v) for k, v in sorted(norms.items())},
                "component_dims": dict(sorted(dims.items()))}
    expected = {"self_inner": {"agree_on_1+wo": [2], "differ_on_1+wo": [1], "equal": [3]},
                "component_dims": {"agree_on_1+wo": [q + 1, q * q - 1],
                                   "equal": [1, q, q * q - 1]}}
    return computed, expected


def check_btilde_split(s: Session):
    q = s.q
    bt = grp.catalog("BorelTilde2", q)
    classes = rp.classes_of(bt)
    out = set()
    for c1 in _unit_chars(q):
        for c2 in _unit_chars(q):
            if _ps_case(c1, c2, q) == "differ_on_1+wo":
                continue
            f = rp.class_function_of(rp.borel_to_tilde(c1, c2), classes)
            ext = rp.from_one_dim(classes, rp.borel_tilde_char(c1, c2))
            rest = f - ext
            out.add((rp.inner_product(f, f), rp.inner_product(f, ext),
                     rp.inner_product(rest, rest), ext.dim(), rest.dim()))
    keys = ("self_inner", "mult_of_extension", "rest_self_inner", "dim_one", "dim_rest")
    computed = [dict(zip(keys, t)) for t in sorted(out)]
    expected = [dict(zip(keys, (2, 1, 1, 1, q - 1)))]
    return computed, expected


def check_regular_irreducible(s: Session):
    q, classes, psi0 = s.q, s.classes, s.psi0
    computed, expected = {}, {}
    for family in ("X1", "X2", "X3"):
        b = next(c for c in ch.regular_classes(q) if c.family == family)
        h, exts = rp.inertia_extensions(b.matrix, q, psi0)
        norms, dims = set(), set()
        for j in range(len(exts)):
            f = rp.class_function_of(rp.regular_gl2(b, j, psi0), classes)
            norms.add(rp.inner_product(f, f))
            dims.add(f.dim())
        computed[family] = {"extensions": len(exts), "self_inner": sorted(norms),
                            "dims": sorted(dims)}
        index = grp.gl_order(2, q) // h.order
        n_ext = {"X1": q * q - 1, "X2": q * (q - 1), "X3": (q - 1) ** 2}[family]
        expected[family] = {"extensions": n_ext, "self_inner": [1], "dims": [index]}
    return computed, expected


def check_whittaker_unique(s: Session):
    q, psi0 = s.q, s.psi0
    vals = set()
    for b in ch.regular_classes(q):
        if b.family != "X1":
            continue
        _, exts = rp.inertia_extensions(b.matrix, q, psi0)
        for j in range(len(exts)):
            vals.add(rp.whittaker_dim_gl2(rp.regular_gl2(b, j, psi0), psi0))
    ps = set()
    for c1 in _unit_chars(q):
        for c2 in _unit_chars(q):
            if _ps_case(c1, c2, q) == "differ_on_1+wo":
                ps.add(rp.whittaker_dim_gl2(rp.principal_series(c1, c2), psi0))
    computed = {"strongly_cuspidal": sorted(vals), "irreducible_principal_series": sorted(ps)}
    return computed, {"strongly_cuspidal": [1], "irreducible_principal_series": [1]}


# --- double cosets --------------------------------------------------------------

def _lower_left_rank(x, q, rows, cols):
    return grp.rank_mod(np.asarray(x)[0][rows][:, cols] % q, q)


def _weyl_double_cosets(k1, k2):
    """|W_{P_k1} \\ S_4 / W_{P_k2}| by brute force over permutations."""
    def blocks(k):
        return [tuple(range(k)), tuple(range(k, 4))]

    seen = set()
    for w in permutations(range(4)):
        # the double coset of w is determined by block-to-block counts
        key = tuple(sum(1 for j in b2 if w[j] in b1) for b1 in blocks(k1) for b2 in blocks(k2))
        seen.add(key)
    return len(seen)


def check_double_cosets_PGP(s: Session):
    q = s.q
    g, p = grp.catalog("GL4", q), grp.catalog("P", q)
    orbits, labels, t = grp.double_cosets(p, g, p, trans=s.transversal("P"))
    deltas = jq.p_deltas(q)
    hit = {int(labels[t.locate(d[None])[0]]) for d in deltas.values()}
    residue = {_lower_left_rank(r, q, [2, 3], [0, 1]) for r, _ in orbits}
    computed = {"orbits": len(orbits), "deltas_in_distinct_orbits": len(hit),
                "orbit_sizes_sum": int(sum(sz for _, sz in orbits)),
                "orbit_sizes_dividing_P": sum(1 for _, sz in orbits if p.order % sz == 0),
                "residue_double_cosets": len(residue),
                "weyl_double_cosets": _weyl_double_cosets(2, 2)}
    expected = {"orbits": 6, "deltas_in_distinct_orbits": 6,
                "orbit_sizes_sum": q**4 * grp.gaussian_binomial(4, 2, q),
                "orbit_sizes_dividing_P": 6, "residue_double_cosets": 3,
                "weyl_double_cosets": 3}
    return computed, expected


def check_double_cosets_PGQ(s: Session):
    q = s.q
    g, p, qq = grp.catalog("GL4", q), grp.catalog("P", q), grp.catalog("Q", q)
    orbits, labels, t = grp.double_cosets(p, g, qq, trans=s.transversal("Q"))
    deltas = jq.q_deltas(q)
    hit = {int(labels[t.locate(d[None])[0]]) for d in deltas.values()}
    residue = {_lower_left_rank(r, q, [2, 3], [0, 1, 2]) for r, _ in orbits}
    computed = {"orbits": len(orbits), "deltas_in_distinct_orbits": len(hit),
                "orbit_sizes_sum": int(sum(sz for _, sz in orbits)),
                "residue_double_cosets": len(residue),
                "weyl_double_cosets": _weyl_double_cosets(2, 3)}
    expected = {"orbits": 3, "deltas_in_distinct_orbits": 3,
                "orbit_sizes_sum": q**3 * (q**4 - 1) // (q - 1),
                "residue_double_cosets": 2, "weyl_double_cosets": 2}
    return computed, expected


def check_gamma_count(s: Session):
    q = s.q
    return {"gamma": jq.gamma_count_delta6(q)}, {"gamma": (q + 1) * (q * q - 1)}


# --- induction from P -----------------------------------------------------------

def _pieces_P(s, name="distinct"):
    return s.jacquet("P", name, "pieces").pieces


def _ps_of_central(s, name):
    w1, w2 = s.omega_pi_P(name)
    return s.cf(("ps", name), lambda: rp.principal_series(w1, w2))


def _b_diag(s, name):
    pi1, pi2 = s.p_input(name)
    q = s.q
    t1 = int(np.trace(pi1.parts["B"])) % q
    t2 = int(np.trace(pi2.parts["B"])) % q
    return t1, t2


def _ind_zj1_P(s, name, order=(0, 1)):
    t = _b_diag(s, name)
    w1, w2 = s.omega_pi_P(name)
    b = np.diag([t[order[0]], t[order[1]]])
    return s.cf(("indzj1_P", name, order), lambda: rp.ind_ZJ1(w1 * w2, b, s.psi0))


def check_deltas_vanish_P(s: Session):
    pieces = _pieces_P(s)
    computed = {d: int(not pieces[d].is_zero()) for d in ("delta1", "delta2", "delta3")}
    return ({f"{d}_nonzero": v for d, v in computed.items()},
            {f"{d}_nonzero": 0 for d in computed})


def check_delta4_iso(s: Session):
    pi1, pi2 = s.p_input("distinct")
    f1 = s.cf(("pi", id(pi1)), lambda: pi1)
    f2 = s.cf(("pi", id(pi2)), lambda: pi2)
    piece = _pieces_P(s)["delta4"]
    return ({"dim": piece.dim(), "equals_product": _same(piece, f1 * f2)},
            {"dim": pi1.dim * pi2.dim, "equals_product": 1})


def check_delta5_dim(s: Session):
    q = s.q
    return {"dim": _pieces_P(s)["delta5"].dim()}, {"dim": q * (q + 1)}


def check_delta5_iso(s: Session):
    """The piece against I(omega1, omega2) in all three cases of the case split;
    the cases with equal central characters on 1 + w o2 need equal traces."""
    q = s.q
    computed, expected = {}, {}
    for name, norm in (("distinct", 1), ("equal_twisted", 2), ("equal", 3)):
        piece = _pieces_P(s, name)["delta5"]
        sigma = _ps_of_central(s, name)
        computed[name] = {"dim": piece.dim(), "equals_ps": _same(piece, sigma),
                          "self_inner": rp.inner_product(piece, piece)}
        expected[name] = {"dim": q * (q + 1), "equals_ps": 1, "self_inner": norm}
    return computed, expected


def check_delta6_dim(s: Session):
    q = s.q
    return {"dim": _pieces_P(s)["delta6"].dim()}, {"dim": q * (q * q - 1)}


def check_delta6_mult(s: Session):
    q, psi0, classes = s.q, s.psi0, s.classes
    piece = _pieces_P(s)["delta6"]
    t1, t2 = _b_diag(s, "distinct")
    w1, w2 = s.omega_pi_P("distinct")
    units = ch.units_of_o2(q)
    omega = (w1 * w2).exponents(units)
    computed, expected = {}, {}
    hits = 0
    for b in ch.regular_classes(q):
        if b.family != "X3":
            continue
        m, n = b.params
        _, exts = rp.inertia_extensions(b.matrix, q, psi0)
        row_c, row_e = [], []
        for j in range(len(exts)):
            sigma = rp.regular_gl2(b, j, psi0)
            mult = rp.inner_product(piece, rp.class_function_of(sigma, classes))
            central = np.array_equal(rp.central_character(sigma).exponents(units), omega)
            row_c.append(mult)
            row_e.append(int(central and {m, n} == {t1, t2}))
            hits += mult
        computed[f"{m},{n}"] = row_c
        expected[f"{m},{n}"] = row_e
    computed["constituents"] = hits
    expected["constituents"] = q - 1
    return computed, expected


def check_delta6_iso(s: Session):
    piece = _pieces_P(s)["delta6"]
    return ({"equals_ind_B": _same(piece, _ind_zj1_P(s, "distinct")),
             "equals_ind_B_swapped": _same(piece, _ind_zj1_P(s, "distinct", (1, 0)))},
            {"equals_ind_B": 1, "equals_ind_B_swapped": 1})


def check_thm_indP_full(s: Session):
    q = s.q
    pi1, pi2 = s.p_input("distinct")
    total = s.jacquet("P", "distinct", "fast").values
    f1 = s.cf(("pi", id(pi1)), lambda: pi1)
    f2 = s.cf(("pi", id(pi2)), lambda: pi2)
    rhs = f1 * f2 + _ps_of_central(s, "distinct") + _ind_zj1_P(s, "distinct")
    return ({"dim": total.dim(), "equals_three_summands": _same(total, rhs)},
            {"dim": pi1.dim * pi2.dim + q * (q + 1) + q * (q * q - 1),
             "equals_three_summands": 1})


# --- induction from Q -----------------------------------------------------------

def check_deltas_vanish_Q(s: Session):
    pieces = s.jacquet("Q", "base", "pieces").pieces
    return ({"I4_nonzero": int(not pieces["I4"].is_zero()),
             "Iw_nonzero": int(not pieces["Iw"].is_zero())},
            {"I4_nonzero": 0, "Iw_nonzero": 0})


def check_dim_24coset(s: Session):
    q = s.q
    piece = s.jacquet("Q", "base", "pieces").pieces["(24)"]
    return {"dim": piece.dim()}, {"dim": q * q * (q * q - 1)}


def _regular_multiplicities(s: Session, f: rp.ClassFunction, omega: ch.OneDimChar, m0):
    """m(f, sigma) for every regular irreducible sigma, with the predicted value
    1 iff tr B = 2 m0 and sigma has central character omega."""
    q, psi0 = s.q, s.psi0
    units = ch.units_of_o2(q)
    w = omega.exponents(units)
    out = {}
    for b in ch.regular_classes(q):
        _, exts = rp.inertia_extensions(b.matrix, q, psi0)
        rows = []
        for j in range(len(exts)):
            sigma = rp.regular_gl2(b, j, psi0)
            sf = s.cf(("reg", b, j), lambda: sigma)
            central = np.array_equal(rp.central_character(sigma).exponents(units), w)
            rows.append((rp.inner_product(f, sf), int(central and b.trace == 2 * m0 % q)))
        out[b] = rows
    return out


def _q_multiplicities(s: Session):
    def run():
        f = s.jacquet("Q", "base", "pieces").pieces["(24)"]
        omega = s.omega_pi_Q("base")
        m0 = ch.solve_m0(omega, s.psi0).value
        return _regular_multiplicities(s, f, omega, m0)
    return s.memo(("q_mults",), run)


def _mult_check(family):
    def check(s: Session):
        computed, expected = {}, {}
        for b, rows in _q_multiplicities(s).items():
            if b.family == family:
                key = ",".join(map(str, b.params))
                computed[key] = [c for c, _ in rows]
                expected[key] = [e for _, e in rows]
        return computed, expected
    check.__name__ = f"check_mult_{family}"
    return check


def _indQ_rhs(s: Session, name):
    omega = s.omega_pi_Q(name)
    m0 = ch.solve_m0(omega, s.psi0).value
    bs = ch.regular_classes(s.q, trace=2 * m0)
    fs = [s.cf(("indzj1_Q", name, b), lambda b=b: rp.ind_ZJ1(omega, b, s.psi0)) for b in bs]
    return bs, fs


def check_thm_indQ_full(s: Session):
    q = s.q
    total = s.jacquet("Q", "base", "fast").values
    bs, fs = _indQ_rhs(s, "base")
    rhs = fs[0]
    for f in fs[1:]:
        rhs = rhs + f
    families = {fam: sum(1 for b in bs if b.family == fam) for fam in ("X1", "X2", "X3")}
    return ({"summands": len(fs), "families": families, "summand_dims": [f.dim() for f in fs],
             "dim": total.dim(), "equals_sum": _same(total, rhs)},
            {"summands": q, "families": {"X1": (q - 1) // 2, "X2": 1, "X3": (q - 1) // 2},
             "summand_dims": [q * (q * q - 1)] * q, "dim": q * q * (q * q - 1),
             "equals_sum": 1})


def check_alt_psi_thm_indQ_full(s: Session):
    return check_thm_indQ_full(s.alternative())


def check_cor_multfree(s: Session):
    q = s.q
    total = s.jacquet("Q", "base", "fast").values
    mults = [c for rows in _q_multiplicities(s).values() for c, _ in rows]
    constituents = sum(1 for c in mults if c)
    return ({"max_multiplicity": max(mults), "constituents": constituents,
             "self_inner": rp.inner_product(total, total)},
            {"max_multiplicity": 1, "constituents": q * q, "self_inner": q * q})


def check_cor_central_indep(s: Session):
    units = ch.units_of_o2(s.q)
    a = s.jacquet("Q", "base", "fast").values
    b = s.jacquet("Q", "same_central", "fast").values
    c = s.jacquet("Q", "other_central", "fast").values
    same = np.array_equal(s.omega_pi_Q("base").exponents(units),
                          s.omega_pi_Q("same_central").exponents(units))
    return ({"central_characters_equal": int(same), "equal_central_equal_jacquet": _same(a, b),
             "other_central_equal_jacquet": _same(a, c)},
            {"central_characters_equal": 1, "equal_central_equal_jacquet": 1,
             "other_central_equal_jacquet": 0})


# --- cross-checks ----------------------------------------------------------------

def _triple(s, kind, name):
    r = {p: s.jacquet(kind, name, p) for p in ("brute", "fast", "pieces")}
    digests = {p: _digest(v.values) for p, v in r.items()}
    agree = {"brute_equals_fast": _same(r["brute"].values, r["fast"].values),
             "fast_equals_pieces": _same(r["fast"].values, r["pieces"].values)}
    return agree, digests


def check_path_agreement(s: Session):
    computed, digests = {}, {}
    for kind, name in (("P", "distinct"), ("Q", "base"), ("Q", "same_central"),
                       ("Q", "other_central")):
        computed[f"{kind}:{name}"], digests[f"{kind}:{name}"] = _triple(s, kind, name)
    expected = {k: {"brute_equals_fast": 1, "fast_equals_pieces": 1} for k in computed}
    return computed, expected, {"path_agreement": digests}


def check_exploratory_equal_trace(s: Session):
    """tr B1 = tr B2 lies outside the proven range; report what the pieces give."""
    q = s.q
    res = s.jacquet("P", "equal", "pieces")
    fast = s.jacquet("P", "equal", "fast")
    pieces = res.pieces
    computed = {"piece_dims": {k: v.dim() for k, v in pieces.items()},
                "piece_self_inner": {k: rp.inner_product(v, v) for k, v in pieces.items()},
                "fast_equals_pieces": _same(fast.values, res.values)}
    expected = {"fast_equals_pieces": 1}
    return {"fast_equals_pieces": computed["fast_equals_pieces"]}, expected, \
        {"observations": computed}


# --- registry ---------------------------------------------------------------------

Q3 = (3,)
Q35 = (3, 5)
C, D = "closed-form", "frozen-oracle"

REGISTRY: dict[str, CheckSpec] = {}


def _register(id, claim, q_values, cost, fn, depends_on=(), source=C, section=""):
    if id in REGISTRY:
        raise ValueError(f"duplicate check id {id}")
    for d in depends_on:
        if d not in REGISTRY:
            raise ValueError(f"{id} depends on unregistered {d}")
    REGISTRY[id] = CheckSpec(id, claim, tuple(q_values), cost, tuple(depends_on), source, fn,
                             section)


_register("prelim_gl_orders", "orders of the catalog groups over o2", Q35, Cost.MINUTES,
          check_gl_orders, section="preliminaries")
_register("prelim_pn1_factorization",
          "GL_n(F_q) = P_{1,n-1} F_{q^n}^x for the fixed field embeddings, n = 2, 3", Q35,
          Cost.INSTANT, check_pn1_factorization, section="preliminaries")
_register("prelim_borel_cosets",
          "B\\GL_2(o2)/B has representatives I, w0, u(w); GL_2(o2)/B has q^2+q listed cosets",
          Q35, Cost.INSTANT, check_borel_cosets, section="preliminaries")
_register("prelim_ps_components",
          "I(chi) has 1, 2 or 3 components by the case split, of dimensions (q+1, q^2-1) "
          "or (1, q, q^2-1)", Q35, Cost.MINUTES, check_ps_components, section="preliminaries")
_register("prelim_btilde_split",
          "Ind from the Borel to its preimage splits into dimensions 1 and q-1", Q35,
          Cost.INSTANT, check_btilde_split, section="preliminaries")
_register("prelim_thm22_irred",
          "an extension of phi_B to its inertia group induces an irreducible regular "
          "representation", Q35, Cost.MINUTES, check_regular_irreducible, section="preliminaries")
_register("prelim_whittaker_unique",
          "regular and irreducible principal series representations have one-dimensional "
          "Whittaker spaces", Q35, Cost.MINUTES, check_whittaker_unique,
          section="preliminaries")
_register("double_cosets_PGP", "P\\GL_4(o2)/P has 6 elements, represented by delta_1..6",
          Q35, Cost.MINUTES, check_double_cosets_PGP, section="induction from P")
_register("gamma_count_delta6", "N\\P/P_delta6 has (q+1)(q^2-1) elements", Q35,
          Cost.INSTANT, check_gamma_count, section="induction from P")
_register("deltas_vanish_P", "the delta_1, delta_2, delta_3 pieces vanish", Q3, Cost.MINUTES,
          check_deltas_vanish_P, section="induction from P")
_register("delta4_iso", "the delta_4 piece is pi_1 x pi_2 restricted to the diagonal", Q3,
          Cost.MINUTES, check_delta4_iso, ("deltas_vanish_P",), section="induction from P")
_register("delta5_dim", "the delta_5 piece has dimension q(q+1)", Q3, Cost.MINUTES,
          check_delta5_dim, ("deltas_vanish_P",), section="induction from P")
_register("delta5_iso", "the delta_5 piece is I(omega_1, omega_2)", Q3, Cost.HOURS,
          check_delta5_iso, ("delta5_dim",), section="induction from P")
_register("delta6_dim", "the delta_6 piece has dimension q(q^2-1)", Q3, Cost.MINUTES,
          check_delta6_dim, ("gamma_count_delta6",), section="induction from P")
_register("delta6_mult",
          "a split-type sigma = Ind(phi_diag(m,n)) occurs in the delta_6 piece iff "
          "{m,n} = {tr B1, tr B2}, with q-1 constituents", Q3, Cost.MINUTES,
          check_delta6_mult, ("delta6_dim",), section="induction from P")
_register("delta6_iso", "the delta_6 piece is Ind_{ZJ^1}(omega phi_B), B = diag(tr B1, tr B2)",
          Q3, Cost.MINUTES, check_delta6_iso, ("delta6_dim",), section="induction from P")
_register("thm_indP_full",
          "for tr B1 != tr B2 the Jacquet module is the sum of the delta_4, delta_5 and "
          "delta_6 terms", Q3, Cost.MINUTES, check_thm_indP_full,
          ("delta4_iso", "delta5_iso", "delta6_iso"), section="induction from P")
_register("double_cosets_PGQ", "P\\GL_4(o2)/Q is represented by I_4, I^w, (24)", Q35,
          Cost.INSTANT, check_double_cosets_PGQ, section="induction from Q")
_register("deltas_vanish_Q", "the I_4 and I^w pieces vanish", Q3, Cost.MINUTES,
          check_deltas_vanish_Q, ("double_cosets_PGQ",), section="induction from Q")
_register("dim_24coset", "the (24) piece has dimension q^2(q^2-1)", Q3, Cost.MINUTES,
          check_dim_24coset, ("deltas_vanish_Q",), section="induction from Q")
for _fam in ("X1", "X2", "X3"):
    _register(f"mult_{_fam}",
              f"each regular sigma of type {_fam} with trace 2 m0 and central character "
              "omega_pi occurs once, every other regular sigma not at all", Q3,
              Cost.MINUTES, _mult_check(_fam), ("dim_24coset",), D,
              section="induction from Q")
_register("thm_indQ_full",
          "the Jacquet module is the sum of Ind_{ZJ^1}(omega phi_B) over the q classes of "
          "trace 2 m0", Q3, Cost.MINUTES, check_thm_indQ_full,
          ("mult_X1", "mult_X2", "mult_X3"), section="induction from Q")
_register("cor_multfree", "the Jacquet module is multiplicity free", Q3, Cost.MINUTES,
          check_cor_multfree, ("thm_indQ_full",), section="induction from Q")
_register("cor_central_indep",
          "inputs with the same central character have isomorphic Jacquet modules", Q3,
          Cost.MINUTES, check_cor_central_indep, ("thm_indQ_full",),
          section="induction from Q")
_register("alt_psi_thm_indQ_full", "thm_indQ_full rerun with psi0(a) replaced by psi0(2a)",
          Q3, Cost.MINUTES, check_alt_psi_thm_indQ_full, ("thm_indQ_full",),
          section="cross-checks")
_register("path_agreement", "brute, affine-fiber and Mackey-piece evaluations agree exactly",
          Q3, Cost.HOURS, check_path_agreement, ("thm_indP_full", "thm_indQ_full"), D,
          section="cross-checks")
_register("exploratory_equal_trace",
          "exploratory: tr B1 = tr B2, outside the proven range", Q3, Cost.MINUTES,
          check_exploratory_equal_trace, ("thm_indP_full",), D, section="exploratory")

PROFILES = {"smoke": 3, "paper-q3": 3, "extended-q5": 5}

NOTES = [
    "The cases of the delta_5 multiplicity split with equal restrictions to 1 + w o2 "
    "need tr B1 = tr B2; delta5_iso realises them with such inputs.",
    "The mixed-characteristic ring W_2(F_q), general l > 2 and general n are out of scope.",
]


def _check_q(spec: CheckSpec, q):
    if q not in spec.q_values:
        raise UnsupportedQ(f"{spec.id} runs at q in {spec.q_values}, not {q}")


def _topological(ids):
    order, state = [], {}

    def visit(i):
        if state.get(i) == 1:
            raise ValueError("dependency cycle")
        if state.get(i) == 2:
            return
        state[i] = 1
        for d in REGISTRY[i].depends_on:
            if d in ids:
                visit(d)
        state[i] = 2
        order.append(i)

    for i in REGISTRY:
        if i in ids:
            visit(i)
    return order


def run_check(id, q, options=None, session=None) -> CheckReport:
    if id not in REGISTRY:
        raise UnknownCheck(id)
    spec = REGISTRY[id]
    _check_q(spec, q)
    options = options or {}
    session = session or Session(q, options.get("psi_scale", 1), options.get("cache_dir"))
    t0 = time.perf_counter()
    report = CheckReport(id, q, "fail", claim=spec.claim, expected_source=spec.expected_source)
    try:
        out = spec.fn(session)
    except grp.BudgetExceeded as e:
        report.status, report.reason = "skipped", f"budget: {e}"
        report.wall_time = time.perf_counter() - t0
        return report
    computed, expected = out[0], out[1]
    extra = out[2] if len(out) > 2 else {}
    report.computed, report.expected = _plain(computed), _plain(expected)
    report.status = "pass" if report.computed == report.expected else "fail"
    report.path_agreement = extra.get("path_agreement")
    if "observations" in extra:
        report.reason = "exploratory: " + json.dumps(_plain(extra["observations"]),
                                                     sort_keys=True)
    report.wall_time = time.perf_counter() - t0
    return report


def _plain(x):
    """Normalise numpy scalars and tuples to JSON-ready Python values."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


@dataclass
class Suite:
    q: int
    reports: list
    seconds: float
    notes: list = field(default_factory=list)

    def summary(self):
        counts = {k: sum(1 for r in self.reports if r.status == k)
                  for k in ("pass", "fail", "skipped")}
        return {**counts, "total_seconds": round(self.seconds, 3)}

    @property
    def failed(self):
        return any(r.status == "fail" for r in self.reports)


def select(profile=None, checks=None, q=None):
    """(q, ids to run, ids skipped for budget)."""
    if profile is not None and profile not in PROFILES:
        raise ValueError(f"unknown profile {profile}")
    q = q or PROFILES.get(profile or "paper-q3")
    if checks:
        for c in checks:
            if c not in REGISTRY:
                raise UnknownCheck(c)
        ids = list(checks)
    elif profile == "smoke":
        ids = [i for i, s in REGISTRY.items() if s.cost_class == Cost.INSTANT]
    else:
        ids = list(REGISTRY)
    run = [i for i in ids if q in REGISTRY[i].q_values]
    skipped = [i for i in ids if q not in REGISTRY[i].q_values]
    return q, run, skipped


def run_suite(profile="paper-q3", jobs=1, cache_dir=None, checks=None, q=None,
              progress=None) -> Suite:
    q, ids, skipped = select(profile, checks, q)
    session = Session(q, 1, cache_dir)
    t0 = time.perf_counter()
    order = _topological(set(ids))
    done = {}
    if jobs <= 1:
        for i in order:
            done[i] = run_check(i, q, session=session)
            if progress:
                progress(done[i])
    else:
        pending = list(order)
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            running = {}
            while pending or running:
                for i in list(pending):
                    deps = [d for d in REGISTRY[i].depends_on if d in ids]
                    if all(d in done for d in deps):
                        pending.remove(i)
                        running[pool.submit(run_check, i, q, None, session)] = i
                finished, _ = wait(running, return_when=FIRST_COMPLETED)
                for fut in finished:
                    i = running.pop(fut)
                    done[i] = fut.result()
                    if progress:
                        progress(done[i])
    reports = [done[i] for i in order]
    for i in skipped:
        spec = REGISTRY[i]
        reports.append(CheckReport(i, q, "skipped", claim=spec.claim,
                                   expected_source=spec.expected_source,
                                   reason=f"budget: runs at q in {list(spec.q_values)}"))
    rank = {i: k for k, i in enumerate(REGISTRY)}
    reports.sort(key=lambda r: rank[r.id])
    return Suite(q, reports, time.perf_counter() - t0, list(NOTES))


def emit_report(reports, format="json", q=None, notes=None, summary=None) -> bytes:
    """reports: a Suite or a list of CheckReport."""
    if isinstance(reports, Suite):
        q, notes, summary = reports.q, reports.notes, reports.summary()
        reports = reports.reports
    if format == "json":
        doc = {"schema_version": SCHEMA_VERSION, "q": q,
               "checks": [r.to_json() for r in reports]}
        if summary is not None:
            doc["summary"] = summary
        if notes:
            doc["notes"] = list(notes)
        return (json.dumps(doc, indent=2, sort_keys=False) + "\n").encode()
    if format == "markdown":
        lines = [f"# Verification report (q = {q})", ""]
        section = None
        for r in reports:
            sec = REGISTRY[r.id].section if r.id in REGISTRY else ""
            if sec != section:
                section = sec
                lines += ["", f"## {sec}", "",
                          "| check | claim | status | computed | expected | ms |",
                          "|---|---|---|---|---|---|"]
            lines.append(f"| `{r.id}` | {r.claim} | {r.status.upper()} | "
                         f"`{json.dumps(r.computed)}` | `{json.dumps(r.expected)}` | "
                         f"{int(round(r.wall_time * 1000))} |")
        if summary is not None:
            lines += ["", "Summary: " + ", ".join(f"{k} {v}" for k, v in summary.items())]
        if notes:
            lines += ["", "Notes:", *[f"- {n}" for n in notes]]
        return ("\n".join(lines) + "\n").encode()
    raise ValueError(f"unknown format {format}")


def write_report(suite, path, format="json"):
    Path(path).write_bytes(emit_report(suite, format))
