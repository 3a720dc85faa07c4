import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacquet_o2 import characters as ch, groups as grp, matrices as mx
from jacquet_o2.cyclotomic import CycValue
from jacquet_o2.local_ring import O2Elem


def _gram(chars, elements):
    """Exact sum_h lam(h) conj(mu(h)) for all pairs, as integers."""
    exps = [c.exponents(elements) for c in chars]
    m = chars[0].m
    out = np.zeros((len(chars), len(chars)), dtype=object)
    for i, a in enumerate(exps):
        for j, b in enumerate(exps):
            out[i, j] = CycValue.from_exponents(a - b, m).to_integer()
    return out


def test_additive_character_values():
    psi = ch.AdditiveChar(3)
    assert psi(O2Elem(0, 0, 3)) == CycValue.integer(1, psi.m)
    # sum over o2 of a nontrivial character vanishes
    total = sum((psi(O2Elem(a, b, 3)) for a in range(3) for b in range(3)),
                CycValue.zero(psi.m))
    assert total.is_zero()


@pytest.mark.property
def test_unit_characters_orthonormal():
    q = 3
    units = ch.units_of_o2(q)
    chars = [ch.unit_char(q, j, t) for j in range(q - 1) for t in range(q)]
    assert (_gram(chars, units) == len(units) * np.eye(len(chars), dtype=int)).all()


@pytest.mark.property
@pytest.mark.parametrize("family", ["X1", "X2", "X3"])
def test_extensions_orthogonal(family):
    q = 3
    psi = ch.AdditiveChar(q)
    b = next(c for c in ch.regular_classes(q) if c.family == family)
    h = grp.inertia(b.matrix, q)
    exts = ch.all_extensions(h, grp.kernel_group(2, q), ch.phi_A(b.matrix, psi))
    assert len(exts) == h.order // q**4
    elems = grp.enumerate_group(h)
    assert (_gram(exts, elems) == len(elems) * np.eye(len(exts), dtype=int)).all()
    # every extension restricts to phi_B on J^1
    k = grp.enumerate_group(grp.kernel_group(2, q))
    phi = ch.phi_A(b.matrix, psi).exponents(k)
    assert all((e.exponents(k) == phi).all() for e in exts)


def test_zj1_extension_counts():
    q = 3
    psi = ch.AdditiveChar(q)
    zj = grp.catalog("ZJ1_2", q)
    counts = {}
    for b in ch.regular_classes(q, trace=0):
        omega = ch.unit_char(q, 0, 0)
        h = grp.inertia(b.matrix, q)
        counts[b.family] = len(ch.all_extensions(h, zj, ch.zj1_char(omega, b.matrix, psi)))
    assert counts == {"X1": q + 1, "X2": q, "X3": q - 1}


def test_zj1_inconsistent_central_character():
    q = 3
    b = ch.regular_classes(q, trace=0)[0]
    with pytest.raises(ch.InconsistentOnIntersection):
        ch.zj1_char(ch.unit_char(q, 0, 1), b.matrix, ch.AdditiveChar(q))


def test_solve_m0():
    q = 5
    psi = ch.AdditiveChar(q)
    for t in range(q):
        m0 = ch.solve_m0(ch.unit_char(q, 1, t), psi)
        assert (2 * m0.value) % q == t


def test_regular_class_list():
    q = 3
    cls = ch.regular_classes(q)
    assert [c.family for c in cls].count("X1") == q * (q - 1) // 2
    assert [c.family for c in cls].count("X2") == q
    assert [c.family for c in cls].count("X3") == q * (q - 1) // 2
    assert all(ch.regular_taxonomy(c.matrix, q) == c for c in cls)
    assert all(ch.is_elliptic(c.matrix, q) == (c.family == "X1") for c in cls)
    assert len(ch.regular_classes(q, trace=2)) == q


def test_scalar_rejected():
    with pytest.raises(ch.ScalarInput):
        ch.regular_taxonomy(2 * np.eye(2, dtype=np.int64), 3)


def _invertible(q):
    import itertools
    return [np.array(e).reshape(2, 2) for e in itertools.product(range(q), repeat=4)
            if (e[0] * e[3] - e[1] * e[2]) % q]


INVERTIBLE = {q: _invertible(q) for q in (3, 5, 7)}


@st.composite
def matrix_and_conjugator(draw):
    q = draw(st.sampled_from([3, 5, 7]))
    b = np.array(draw(st.lists(st.integers(0, q - 1), min_size=4, max_size=4))).reshape(2, 2)
    return q, b, draw(st.sampled_from(INVERTIBLE[q]))


@pytest.mark.property
@settings(max_examples=300)
@given(matrix_and_conjugator())
def test_taxonomy_conjugation_invariant(qbg):
    q, b, g = qbg
    if b[0, 1] == 0 and b[1, 0] == 0 and b[0, 0] == b[1, 1]:
        return
    gi = mx.inv(mx.lift(g), q)[0]
    c = (g @ b @ gi) % q
    assert ch.regular_taxonomy(c, q) == ch.regular_taxonomy(b, q)


def test_taxonomy_partitions_regular_matrices():
    """Class sizes |GL_2(F_q)| / |centralizer| add up to all non-scalar matrices."""
    q = 3
    sizes = {"X1": q * q - q, "X2": q * q - 1, "X3": q * q + q}
    total = sum(sizes[c.family] for c in ch.regular_classes(q))
    assert total == q**4 - q
