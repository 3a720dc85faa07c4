import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacquet_o2 import characters as ch, groups as grp, matrices as mx
from jacquet_o2 import representations as rp

Q = 3
PSI = ch.AdditiveChar(Q)


@pytest.fixture(scope="module")
def classes():
    return rp.gl2_classes(Q)


@pytest.fixture(scope="module")
def regular_reps(classes):
    out = []
    for b in ch.regular_classes(Q):
        _, exts = rp.inertia_extensions(b.matrix, Q, PSI)
        for j in range(len(exts)):
            rep = rp.regular_gl2(b, j, PSI)
            out.append((b, j, rep, rp.class_function_of(rep, classes)))
    return out


def test_regular_reps_orthonormal(regular_reps):
    fs = [f for *_, f in regular_reps]
    gram = np.array([[rp.inner_product(a, b) for b in fs] for a in fs])
    assert (gram == np.eye(len(fs), dtype=int)).all()
    assert len(fs) == 54


def test_regular_exhaustion(regular_reps, classes):
    """Regular dims squared plus the q scalar-type blocks of size |GL_2(F_q)| fill |G|."""
    order = grp.gl_order(2, Q)
    regular = sum(rep.dim**2 for _, _, rep, _ in regular_reps)
    res_order = grp.gl_order_fq(2, Q)
    kernel = grp.kernel_group(2, Q)
    for a in range(Q):
        ind = rp.monomial(grp.catalog("GL2", Q), kernel,
                          ch.phi_A(a * np.eye(2, dtype=np.int64), PSI), cache_dir=False)
        f = rp.class_function_of(ind, classes)
        assert rp.inner_product(f, f) == res_order
        assert all(rp.inner_product(f, g) == 0 for *_, g in regular_reps[:10])
    assert regular == order - Q * res_order == 3744


def test_induced_char_matches_monomial_trace(regular_reps, classes):
    rng = np.random.default_rng(5)
    for _, _, rep, _ in regular_reps[::9]:
        for g in classes.reps[rng.choice(len(classes), 6, replace=False)]:
            assert rp.induced_char(rep, g) == rp.monomial_trace(rep, g)


def test_vanishing_off_conjugates(classes):
    ps = rp.principal_series(ch.unit_char(Q, 0, 1), ch.unit_char(Q, 1, 2))
    f = rp.class_function_of(ps, classes)
    for i, g in enumerate(classes.reps):
        if ch.is_elliptic(g[0], Q):
            assert f.value_at(g).is_zero()


def test_principal_series_case_split(classes):
    units = ch.units_of_o2(Q)
    principal = units[units[:, 0, 0, 0] == 1]
    chars = [ch.unit_char(Q, j, t) for j in range(Q - 1) for t in range(Q)]
    for c1 in chars:
        for c2 in chars:
            f = rp.class_function_of(rp.principal_series(c1, c2), classes)
            if np.array_equal(c1.exponents(units), c2.exponents(units)):
                expected = 3
            elif np.array_equal(c1.exponents(principal), c2.exponents(principal)):
                expected = 2
            else:
                expected = 1
            assert rp.inner_product(f, f) == expected


def test_whittaker(regular_reps):
    for b, _, rep, _ in regular_reps:
        if b.family == "X1":
            assert rp.whittaker_dim_gl2(rep, PSI) == 1
    triv = rp.det_char(ch.unit_char(Q, 0, 0))
    assert rp.whittaker_dim_gl2(triv, PSI) == 0


def test_ind_zj1_norms(classes):
    omega = ch.unit_char(Q, 0, 0)
    got = {}
    for b in ch.regular_classes(Q, trace=0):
        f = rp.class_function_of(rp.ind_ZJ1(omega, b, PSI), classes)
        got[b.family] = (f.dim(), rp.inner_product(f, f))
    assert got == {"X1": (24, Q + 1), "X2": (24, Q), "X3": (24, Q - 1)}


def test_central_character_of_regular(regular_reps):
    units = ch.units_of_o2(Q)
    for b, _, rep, _ in regular_reps[::7]:
        omega = rp.central_character(rep)
        assert ch.solve_m0(omega, PSI).value * 2 % Q == b.trace


def test_not_elliptic_rejected():
    x3 = next(c for c in ch.regular_classes(Q) if c.family == "X3")
    with pytest.raises(rp.NotElliptic):
        rp.strongly_cuspidal_gl2(x3, 0, PSI)


# --- property suites --------------------------------------------------------------

def _frobenius_candidates():
    """(inducing group, character) pairs inside GL_2(o2) at q = 3."""
    out = []
    b2 = grp.catalog("Borel2", Q)
    out.append((b2, rp.borel_char(ch.unit_char(Q, 1, 2), ch.unit_char(Q, 0, 1), b2)))
    for b in ch.regular_classes(Q, trace=2)[:2]:
        out.append((grp.catalog("ZJ1_2", Q), ch.zj1_char(ch.unit_char(Q, 1, 2), b.matrix, PSI)))
        h, exts = rp.inertia_extensions(b.matrix, Q, PSI)
        out.append((h, exts[-1]))
    return out


FROB = _frobenius_candidates()


@pytest.mark.property
@settings(max_examples=8)
@given(st.integers(0, len(FROB) - 1), st.integers(0, 53))
def test_frobenius_reciprocity(classes, regular_reps, i, k):
    h, lam = FROB[i]
    sigma = regular_reps[k][3]
    ind = rp.class_function_of(rp.monomial(grp.catalog("GL2", Q), h, lam, cache_dir=False),
                               classes)
    elems = grp.enumerate_group(h)
    assert rp.inner_product(ind, sigma) == rp.restricted_inner_product(lam, elems, sigma)


GL2_FQ = [g for g in grp.enumerate_group(grp.residue_gl(2, Q))]


@pytest.mark.property
@settings(max_examples=10)
@given(st.integers(0, Q * (Q - 1) // 2 - 1), st.sampled_from(range(len(GL2_FQ))))
def test_strongly_cuspidal_conjugation_invariant(classes, k, gi):
    b = [c for c in ch.regular_classes(Q) if c.family == "X1"][k].matrix
    g = GL2_FQ[gi][0]
    c = (g @ b @ mx.inv(mx.lift(g), Q)[0]) % Q

    def digests(m):
        _, exts = rp.inertia_extensions(m, Q, PSI)
        return sorted(str(rp.class_function_of(rp.strongly_cuspidal_gl2(m, j, PSI),
                                                 classes).digest())
                      for j in range(len(exts)))

    assert digests(b) == digests(c)


def test_borel_tilde_extension_is_multiplicative():
    bt = grp.catalog("BorelTilde2", Q)
    elems = grp.enumerate_group(bt)
    rng = np.random.default_rng(3)
    i, j = rng.integers(len(elems), size=(2, 300))
    for t in range(Q):
        lam = rp.borel_tilde_char(ch.unit_char(Q, 1, t), ch.unit_char(Q, 0, t))
        lhs = (lam.exponents(elems[i]) + lam.exponents(elems[j])) % lam.m
        assert (lhs == lam.exponents(mx.mul(elems[i], elems[j], Q))).all()
        b = grp.enumerate_group(grp.catalog("Borel2", Q))
        naive = rp.borel_char(ch.unit_char(Q, 1, t), ch.unit_char(Q, 0, t),
                              grp.catalog("Borel2", Q))
        assert (lam.exponents(b) == naive.exponents(b)).all()
