import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacquet_o2 import matrices as mx
from jacquet_o2.local_ring import O2Elem


@st.composite
def o2_matrices(draw, n=None):
    q = draw(st.sampled_from([3, 5]))
    n = n or draw(st.integers(1, 4))
    vals = draw(st.lists(st.integers(0, q - 1), min_size=2 * n * n, max_size=2 * n * n))
    return q, np.array(vals, dtype=np.int64).reshape(2, n, n)


@settings(max_examples=200)
@given(o2_matrices())
def test_inverse_or_singular(qx):
    q, x = qx
    n = x.shape[-1]
    if mx.is_invertible(x[None], q)[0]:
        xi = mx.inv(x, q)
        assert mx.is_identity(mx.mul(x, xi, q))
        assert mx.is_identity(mx.mul(xi, x, q))
    else:
        with pytest.raises(mx.Singular):
            mx.inv(x, q)
        # singular over o2 iff the residue is singular over F_q
        from jacquet_o2.groups import rank_mod
        assert rank_mod(x[0], q) < n


@settings(max_examples=200)
@given(o2_matrices())
def test_pack_roundtrip(qx):
    q, x = qx
    n = x.shape[-1]
    codes = mx.pack(x[None], q)
    assert (mx.unpack(codes, q, n)[0] == x).all()


@given(o2_matrices(n=3), o2_matrices(n=3))
def test_multiplication_matches_scalar_ring(a, b):
    q = a[0]
    x, y = a[1] % q, b[1] % q
    z = mx.mul(x, y, q)
    for i in range(3):
        for j in range(3):
            s = O2Elem(0, 0, q)
            for k in range(3):
                s = s + mx.entry(x, i, k, q) * mx.entry(y, k, j, q)
            assert mx.entry(z, i, j, q) == s


def test_reduce_of_congruence_elements():
    q = 3
    x = mx.identity(2) + mx.from_o2([[0, O2Elem(0, 1, q)], [0, 0]], q)
    assert mx.is_identity(mx.lift(mx.reduce_res(x)))
    w0 = mx.permutation([1, 0])
    assert (mx.lift(mx.reduce_res(w0)) == w0).all()


def test_block_diag_and_trace():
    q = 5
    a = mx.from_o2([[1, 2], [3, O2Elem(4, 1, q)]], q)
    b = mx.from_o2([[O2Elem(2, 3, q)]], q)
    d = mx.block_diag(a, b)
    assert d.shape == (2, 3, 3)
    assert (mx.trace(d[None], q)[0] == [2, 4]).all()
