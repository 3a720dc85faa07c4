import pytest
from hypothesis import given, strategies as st

from jacquet_o2.local_ring import (EmbeddingParams, FqElem, NonUnit, O2Elem, check_q,
                                   discrete_log_table, find_cubic_param, find_nonsquare,
                                   o2_inv, primitive_root)

QS = st.sampled_from([3, 5, 7])


@st.composite
def o2_pairs(draw):
    q = draw(QS)
    el = st.builds(O2Elem, st.integers(0, q - 1), st.integers(0, q - 1), st.just(q))
    return draw(el), draw(el), draw(el)


@given(o2_pairs())
def test_ring_axioms(xyz):
    x, y, z = xyz
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x + (-x) == O2Elem(0, 0, x.q)


@given(o2_pairs())
def test_unit_inverse_formula(xyz):
    x = xyz[0]
    if x.is_unit():
        xi = o2_inv(x)
        assert x * xi == O2Elem(1, 0, x.q)
        ai = pow(x.a, -1, x.q)
        assert xi == O2Elem(ai, -ai * ai * x.b, x.q)
    else:
        with pytest.raises(NonUnit):
            o2_inv(x)


def test_uniformizer_squares_to_zero():
    w = O2Elem.uniformizer(5)
    assert w * w == O2Elem(0, 0, 5)
    assert w.reduce() == FqElem(0, 5)
    assert O2Elem.lift(3, 5).reduce() == FqElem(3, 5)


def test_additive_group_order():
    q = 3
    assert len({O2Elem(a, b, q) for a in range(q) for b in range(q)}) == q * q


def test_fq_inverse():
    for q in (3, 5, 7):
        for a in range(1, q):
            assert (FqElem(a, q) * FqElem(a, q).inv()).value == 1
        with pytest.raises(NonUnit):
            FqElem(0, q).inv()


def test_rejects_bad_q():
    for q in (2, 4, 9, 1):
        with pytest.raises(ValueError):
            check_q(q)


def test_frozen_parameters():
    assert find_nonsquare(3).value == 2
    assert find_nonsquare(5).value == 2
    assert find_nonsquare(7).value == 3
    assert find_cubic_param(3).value == 1
    assert primitive_root(3) == 2 and primitive_root(5) == 2 and primitive_root(7) == 3


def test_discrete_log_table():
    for q in (3, 5, 7):
        g, log = primitive_root(q), discrete_log_table(q)
        assert log[0] == -1
        for x in range(1, q):
            assert pow(g, int(log[x]), q) == x


@pytest.mark.parametrize("q", [3, 5, 7])
def test_cubic_embedding_is_a_field(q):
    """Nonzero images are invertible and closed under multiplication."""
    import numpy as np
    from jacquet_o2 import groups as grp

    emb = EmbeddingParams.for_q(q)
    a = emb.cubic_a
    assert all((y**3 - y - a) % q for y in range(q))
    units = emb.field_units(3)
    assert len(units) == q**3 - 1
    assert all(grp.rank_mod(u, q) == 3 for u in units)
    z = emb.cubic(0, 1, 0)
    lhs = (z @ z @ z) % q
    rhs = (z + a * np.eye(3, dtype=np.int64)) % q
    assert (lhs == rhs).all()


@pytest.mark.parametrize("q", [3, 5, 7])
def test_quadratic_embedding_is_a_field(q):
    from jacquet_o2 import groups as grp

    emb = EmbeddingParams.for_q(q)
    units = emb.field_units(2)
    assert len(units) == q * q - 1
    assert all(grp.rank_mod(u, q) == 2 for u in units)
    s = emb.quadratic(0, 1)
    assert ((s @ s) % q == (emb.alpha * __import__("numpy").eye(2, dtype=int)) % q).all()
