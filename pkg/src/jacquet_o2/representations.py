"""Monomial representations, induced characters and class functions."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import characters as ch
from . import groups as grp
from . import matrices as mx
from .cyclotomic import CycValue, NonIntegral, modulus_for, reduction_matrix, DENSE_LIMIT
from .local_ring import O2Elem


class NotElliptic(ValueError):
    pass


class CentralNotInside(ValueError):
    pass


@dataclass(eq=False)
class MonomialRep:
    """Ind_H^G lam, presented by a transversal of G/H.

    For the large GL_4 inductions the transversal is kept as a tower
    (outer reps of G/K, inner reps of K/H) and only materialised on demand.
    """

    ambient: grp.SubgroupSpec
    inducing: grp.SubgroupSpec
    lam: ch.OneDimChar
    outer: grp.Transversal | None = None
    inner: np.ndarray | None = None
    label: str = ""
    parts: dict = field(default_factory=dict)
    _reps: np.ndarray | None = None

    @property
    def q(self):
        return self.ambient.q

    @property
    def m(self):
        return self.lam.m

    @property
    def dim(self):
        if self.inner is None:
            return self.outer.index
        return self.outer.index * len(self.inner)

    @property
    def reps(self):
        if self._reps is None:
            if self.inner is None:
                self._reps = self.outer.reps
            else:
                t = grp.tower_transversal(self.outer, grp.Transversal(None, self.inducing,
                                                                      self.inner, None),
                                          self.inducing)
                self._reps = t.reps
        return self._reps

    def __repr__(self):
        return f"MonomialRep({self.label}, dim={self.dim})"


def monomial(ambient, inducing, lam, label="", cache_dir=None, **parts) -> MonomialRep:
    t = grp.transversal(ambient, inducing, cache_dir=cache_dir)
    return MonomialRep(ambient, inducing, lam, outer=t, label=label, parts=dict(parts))


def one_dim_rep(group, lam, label=""):
    """A character of G viewed as Ind_G^G."""
    t = grp.Transversal(group, group, mx.identity(group.n)[None], {0: 0})
    return MonomialRep(group, group, lam, outer=t, label=label)


# --- induced characters ------------------------------------------------------

CHUNK = 1 << 16


def induced_coeffs(rep: MonomialRep, gs) -> np.ndarray:
    """Coefficient vectors (len(gs), m) of the induced character at each g.

    chi(g) = sum over reps x with x^-1 g x in H of lam(x^-1 g x).
    """
    q, m = rep.q, rep.m
    gs = np.asarray(gs, dtype=np.int64)
    reps = rep.reps
    out = np.zeros((len(gs), m), dtype=np.int64)
    xinv_all = mx.inv(reps, q)
    for start in range(0, len(reps), CHUNK):
        xs = reps[start:start + CHUNK]
        xinv = xinv_all[start:start + CHUNK]
        for k, g in enumerate(gs):
            h = mx.mul(mx.mul(xinv, g[None], q), xs, q)
            mask = rep.inducing.member(h)
            if np.any(mask):
                out[k] += np.bincount(rep.lam.exponents(h[mask]), minlength=m)
    return out


def induced_char(rep: MonomialRep, g) -> CycValue:
    return CycValue(induced_coeffs(rep, np.asarray(g)[None])[0], rep.m)


def monomial_trace(rep: MonomialRep, g) -> CycValue:
    """Trace of the explicit monomial matrix of g.

    Independent of the membership test: column j maps to the coset found
    by fingerprint lookup of g x_j.
    """
    q = rep.q
    reps = rep.reps
    lookup = {k: i for i, k in enumerate(rep.inducing.keys(reps))}
    gx = mx.mul(np.asarray(g)[None], reps, q)
    target = np.array([lookup[k] for k in rep.inducing.keys(gx)])
    h = mx.mul(mx.inv(reps[target], q), gx, q)
    if not np.all(rep.inducing.member(h)):
        raise grp.FingerprintUnsound("monomial matrix column outside H")
    diag = target == np.arange(len(reps))
    return CycValue.from_exponents(rep.lam.exponents(h[diag]), rep.m)


# --- class functions ---------------------------------------------------------

_CLASS_CACHE: dict = {}


def classes_of(group: grp.SubgroupSpec) -> grp.ConjClasses:
    key = id(group)
    if key not in _CLASS_CACHE:
        _CLASS_CACHE[key] = (group, grp.conjugacy_classes(group))
    return _CLASS_CACHE[key][1]


def gl2_classes(q) -> grp.ConjClasses:
    return classes_of(grp.catalog("GL2", q))


def _reduce(coeffs, m):
    if m <= DENSE_LIMIT:
        return coeffs @ reduction_matrix(m)
    return np.array([CycValue(c, m).reduced() for c in coeffs])


@dataclass(eq=False)
class ClassFunction:
    classes: grp.ConjClasses
    coeffs: np.ndarray  # (number of classes, m)
    m: int

    @property
    def values(self):
        return [CycValue(c, self.m) for c in self.coeffs]

    @property
    def group_order(self):
        return int(self.classes.sizes.sum())

    def at(self, xs) -> np.ndarray:
        """Coefficient vectors at arbitrary elements."""
        return self.coeffs[self.classes.class_of(xs)]

    def value_at(self, x) -> CycValue:
        return CycValue(self.at(np.asarray(x)[None])[0], self.m)

    def dim(self) -> int:
        n = self.classes.group.n
        return self.value_at(mx.identity(n)).to_integer()

    def _other(self, other):
        if other.classes is not self.classes or other.m != self.m:
            raise ValueError("class functions on different class data")
        return other

    def __add__(self, other):
        other = self._other(other)
        return ClassFunction(self.classes, self.coeffs + other.coeffs, self.m)

    def __sub__(self, other):
        other = self._other(other)
        return ClassFunction(self.classes, self.coeffs - other.coeffs, self.m)

    def __neg__(self):
        return ClassFunction(self.classes, -self.coeffs, self.m)

    def scale(self, k: int):
        return ClassFunction(self.classes, self.coeffs * int(k), self.m)

    def __mul__(self, other):
        other = self._other(other)
        out = np.zeros_like(self.coeffs)
        for i, (a, b) in enumerate(zip(self.coeffs, other.coeffs)):
            out[i] = _sparse_product(a, b, self.m, 1)
        return ClassFunction(self.classes, out, self.m)

    def conj(self):
        idx = (-np.arange(self.m)) % self.m
        out = np.zeros_like(self.coeffs)
        out[:, idx] = self.coeffs
        return ClassFunction(self.classes, out, self.m)

    def reduced(self):
        return _reduce(self.coeffs, self.m)

    def __eq__(self, other):
        other = self._other(other)
        return bool(np.array_equal(self.reduced(), other.reduced()))

    def is_zero(self):
        return not np.any(self.reduced())

    def integer_values(self):
        """Values as integers when all of them are rational (else NonIntegral)."""
        r = self.reduced()
        if np.any(r[:, 1:]):
            raise NonIntegral("class function has irrational values")
        return [int(v) for v in r[:, 0]]

    def digest(self):
        return [[int(c) for c in row] for row in self.reduced()]


def _sparse_product(a, b, m, sign):
    """Coefficients of A * B (sign=1) or A * conj(B) (sign=-1) in Z[zeta_m]."""
    ia, ib = np.nonzero(a)[0], np.nonzero(b)[0]
    out = np.zeros(m, dtype=np.int64)
    if len(ia) and len(ib):
        idx = (ia[:, None] + sign * ib[None, :]) % m
        np.add.at(out, idx.ravel(), (a[ia][:, None] * b[ib][None, :]).ravel())
    return out


def class_function_of(rep: MonomialRep, classes=None) -> ClassFunction:
    classes = classes or classes_of(rep.ambient)
    if classes.group.n != rep.ambient.n or classes.group.q != rep.q:
        raise ValueError("class data do not belong to the ambient group")
    return ClassFunction(classes, induced_coeffs(rep, classes.reps), rep.m)


def from_one_dim(classes, lam: ch.OneDimChar) -> ClassFunction:
    e = lam.exponents(classes.reps)
    coeffs = np.zeros((len(e), lam.m), dtype=np.int64)
    coeffs[np.arange(len(e)), e] = 1
    return ClassFunction(classes, coeffs, lam.m)


def trivial_class_function(classes, q) -> ClassFunction:
    return from_one_dim(classes, ch.trivial_char(classes.group, q))


def inner_product(f1: ClassFunction, f2: ClassFunction) -> int:
    """(1/|G|) sum over classes of size * f1 * conj(f2), as an exact integer."""
    f1._other(f2)
    acc = np.zeros(f1.m, dtype=np.int64)
    for size, a, b in zip(f1.classes.sizes, f1.coeffs, f2.coeffs):
        acc += int(size) * _sparse_product(a, b, f1.m, -1)
    return CycValue(acc, f1.m).exact_div(f1.group_order).to_integer()


def tensor(f1: ClassFunction, f2: ClassFunction) -> ClassFunction:
    return f1 * f2


def dim_of(f: ClassFunction) -> int:
    return f.dim()


def restricted_inner_product(lam: ch.OneDimChar, elements, sigma: ClassFunction) -> int:
    """<lam, Res_H sigma>_H over an enumerated subgroup H."""
    m = lam.m
    acc = np.zeros(m, dtype=np.int64)
    e = lam.exponents(elements)
    vals = sigma.at(elements)
    for k, row in zip(e, vals):
        nz = np.nonzero(row)[0]
        np.add.at(acc, (k - nz) % m, row[nz])
    return CycValue(acc, m).exact_div(len(elements)).to_integer()


def central_character(rep: MonomialRep) -> ch.OneDimChar:
    """z -> lam(z I) on o2^x; needs the scalars inside the inducing group."""
    q, n = rep.q, rep.ambient.n
    units = ch.units_of_o2(q)
    if not np.all(rep.inducing.member(ch._scalar_batch(units, n))):
        raise CentralNotInside(f"scalars are not contained in {rep.inducing.name}")
    return ch.scalar_restriction(rep.lam, n, q)


# --- constructors ------------------------------------------------------------

def _regular_matrix(b, q):
    if isinstance(b, ch.RegularClass):
        return b.matrix
    return np.asarray(b, dtype=np.int64) % q


@lru_cache(maxsize=None)
def _extensions_cached(bkey, n, q, scale):
    b = np.array(bkey, dtype=np.int64).reshape(n, n)
    h = grp.inertia(b, q)
    psi0 = ch.AdditiveChar(q, scale)
    return h, ch.all_extensions(h, grp.kernel_group(n, q), ch.phi_A(b, psi0))


def inertia_extensions(b, q, psi0=None):
    """(I(phi_B), all extensions of phi_B to it), deterministic order."""
    psi0 = psi0 or ch.AdditiveChar(q)
    b = np.asarray(b, dtype=np.int64) % q
    return _extensions_cached(tuple(b.reshape(-1).tolist()), b.shape[0], q, psi0.scale)


def regular_gl2(b, ext_index=0, psi0=None, cache_dir=None) -> MonomialRep:
    """Ind_{I(phi_B)}^{GL_2(o2)} of an extension of phi_B, B regular."""
    psi0 = psi0 or ch.AdditiveChar(_q_of(b))
    q = psi0.q
    bm = _regular_matrix(b, q)
    ch.regular_taxonomy(bm, q)
    h, exts = inertia_extensions(bm, q, psi0)
    lam = exts[ext_index]
    return monomial(grp.catalog("GL2", q), h, lam, label=f"reg(B={bm.tolist()},{ext_index})",
                    cache_dir=cache_dir, B=bm, ext_index=ext_index)


def _q_of(b):
    if isinstance(b, ch.RegularClass):
        return b.q
    raise ValueError("pass psi0 to fix q")


def strongly_cuspidal_gl2(b, ext_index=0, psi0=None, cache_dir=None) -> MonomialRep:
    q = psi0.q if psi0 else _q_of(b)
    bm = _regular_matrix(b, q)
    if ch.regular_taxonomy(bm, q).family != "X1":
        raise NotElliptic("B is not elliptic")
    return regular_gl2(bm, ext_index, psi0 or ch.AdditiveChar(q), cache_dir)


def strongly_cuspidal_gl3(c, ext_index=0, psi0=None, cache_dir=None) -> MonomialRep:
    psi0 = psi0 or ch.AdditiveChar(3)
    q = psi0.q
    c = np.asarray(c, dtype=np.int64) % q
    if not ch.is_regular_3x3(c, q) or not ch.is_elliptic(c, q):
        raise NotElliptic("C must be regular with irreducible characteristic polynomial")
    h, exts = inertia_extensions(c, q, psi0)
    return monomial(grp.catalog("GL3", q), h, exts[ext_index],
                    label=f"cusp3({ext_index})", cache_dir=cache_dir, C=c,
                    ext_index=ext_index)


def borel_char(chi1: ch.OneDimChar, chi2: ch.OneDimChar, domain):
    """(x y; * w) -> chi1(x) chi2(w)."""
    def fn(xs):
        return chi1.exponents(xs[:, :, :1, :1]) + chi2.exponents(xs[:, :, 1:, 1:])

    return ch.OneDimChar(domain, fn, chi1.m, f"{chi1.label}x{chi2.label}")


def principal_series(chi1, chi2, cache_dir=None) -> MonomialRep:
    q = chi1.domain.q
    b = grp.catalog("Borel2", q)
    return monomial(grp.catalog("GL2", q), b, borel_char(chi1, chi2, b),
                    label=f"I({chi1.label},{chi2.label})", cache_dir=cache_dir,
                    chi1=chi1, chi2=chi2)


def _det2(xs, q):
    """Determinants of a batch of 2x2 matrices over o2, as 1x1 matrices."""
    x00, x01 = xs[:, :, 0, 0], xs[:, :, 0, 1]
    x10, x11 = xs[:, :, 1, 0], xs[:, :, 1, 1]
    d = np.zeros((len(xs), 2, 1, 1), dtype=np.int64)
    d[:, 0, 0, 0] = (x00[:, 0] * x11[:, 0] - x01[:, 0] * x10[:, 0]) % q
    d[:, 1, 0, 0] = (x00[:, 0] * x11[:, 1] + x00[:, 1] * x11[:, 0]
                     - x01[:, 0] * x10[:, 1] - x01[:, 1] * x10[:, 0]) % q
    return d


def borel_tilde_char(chi1, chi2):
    """The extension of chi1 x chi2 to the preimage Borel, for chi1, chi2 equal
    on 1 + w o2: g -> chi2(det g) (chi1/chi2)(g_11).

    The naive g -> chi1(g_11) chi2(g_22) is multiplicative there only when the
    common restriction to 1 + w o2 is trivial.
    """
    q = chi1.domain.q
    domain = grp.catalog("BorelTilde2", q)

    def fn(xs):
        x = xs[:, :, :1, :1]
        return chi2.exponents(_det2(xs, q)) + chi1.exponents(x) - chi2.exponents(x)

    return ch.OneDimChar(domain, fn, chi1.m, f"{chi1.label}x{chi2.label}~")


def ind_borel_tilde(chi1, chi2, cache_dir=None) -> MonomialRep:
    """Ind from the preimage Borel to GL_2(o2) of the extended chi1 x chi2."""
    q = chi1.domain.q
    bt = grp.catalog("BorelTilde2", q)
    return monomial(grp.catalog("GL2", q), bt, borel_tilde_char(chi1, chi2),
                    label="IndBt", cache_dir=cache_dir)


def borel_to_tilde(chi1, chi2) -> MonomialRep:
    """Ind from the Borel to the preimage Borel (ambient is the preimage Borel)."""
    q = chi1.domain.q
    b = grp.catalog("Borel2", q)
    return monomial(grp.catalog("BorelTilde2", q), b, borel_char(chi1, chi2, b),
                    label="Ind_B^Bt")


def det_char(chi: ch.OneDimChar, group=None) -> MonomialRep:
    """chi o det on GL_2(o2)."""
    q = chi.domain.q
    group = group or grp.catalog("GL2", q)

    def fn(xs):
        return chi.exponents(_det2(xs, q))

    return one_dim_rep(group, ch.OneDimChar(group, fn, chi.m, f"{chi.label}.det"),
                       label=f"{chi.label}.det")


def ind_ZJ1(omega: ch.OneDimChar, b, psi0=None, cache_dir=None) -> MonomialRep:
    psi0 = psi0 or ch.AdditiveChar(omega.domain.q)
    q = psi0.q
    bm = _regular_matrix(b, q)
    ch.regular_taxonomy(bm, q)
    zj = grp.catalog("ZJ1_2", q)
    lam = ch.zj1_char(omega, bm, psi0)
    return monomial(grp.catalog("GL2", q), zj, lam, label=f"IndZJ1(B={bm.tolist()})",
                    cache_dir=cache_dir, B=bm, omega=omega)


def whittaker_dim_gl2(rep: MonomialRep, psi0=None) -> int:
    """dim Hom_{N'}(rep, psi0) for the upper unipotent N' of GL_2(o2)."""
    q = rep.q
    psi0 = psi0 or ch.AdditiveChar(q)
    us, exps = [], []
    for a in range(q):
        for b in range(q):
            us.append(mx.from_o2([[1, O2Elem(a, b, q)], [0, 1]], q))
            exps.append(int(psi0.exponent(a, b)))
    vals = induced_coeffs(rep, np.array(us))
    acc = np.zeros(rep.m, dtype=np.int64)
    for row, e in zip(vals, exps):
        nz = np.nonzero(row)[0]
        np.add.at(acc, (nz - e) % rep.m, row[nz])
    return CycValue(acc, rep.m).exact_div(q * q).to_integer()


# --- GL_4 inductions ---------------------------------------------------------

@lru_cache(maxsize=None)
def parabolic_transversal(kind, q, cache_dir=None) -> grp.Transversal:
    g = grp.catalog("GL4", q)
    return grp.transversal(g, grp.catalog(kind, q), cache_dir=cache_dir)


def rep_from_P(pi1: MonomialRep, pi2: MonomialRep, cache_dir=None) -> MonomialRep:
    """Ind_P^G(pi1 x pi2) = Ind_{T1 T2 N}^G(lam1 x lam2 x 1)."""
    q = pi1.q
    h = grp.t1t2n(pi1.parts["B"], pi2.parts["B"], q)
    l1, l2 = pi1.lam, pi2.lam

    def fn(xs):
        return l1.exponents(xs[:, :, :2, :2]) + l2.exponents(xs[:, :, 2:, 2:])

    lam = ch.OneDimChar(h, fn, pi1.m, "lam1 x lam2 x 1")
    r1, r2 = pi1.reps, pi2.reps
    inner = np.array([mx.block_diag(a, b) for a in r1 for b in r2])
    return MonomialRep(grp.catalog("GL4", q), h, lam,
                       outer=parabolic_transversal("P", q, cache_dir), inner=inner,
                       label=f"IndP({pi1.label},{pi2.label})",
                       parts={"kind": "P", "pi1": pi1, "pi2": pi2})


def rep_from_Q(rho: MonomialRep, chi: ch.OneDimChar, cache_dir=None) -> MonomialRep:
    """Ind_Q^G(rho x chi) = Ind_{S U o2^x}^G(lam_rho x 1 x chi)."""
    q = rho.q
    h = grp.suo(rho.parts["C"], q)
    lr = rho.lam

    def fn(xs):
        return lr.exponents(xs[:, :, :3, :3]) + chi.exponents(xs[:, :, 3:, 3:])

    lam = ch.OneDimChar(h, fn, rho.m, "lam_rho x 1 x chi")
    one = mx.identity(1)
    inner = np.array([mx.block_diag(y, one) for y in rho.reps])
    return MonomialRep(grp.catalog("GL4", q), h, lam,
                       outer=parabolic_transversal("Q", q, cache_dir), inner=inner,
                       label=f"IndQ({rho.label},{chi.label})",
                       parts={"kind": "Q", "rho": rho, "chi": chi})
