"""Batched matrices over o2.

A matrix over o2 is an int64 array of shape (2, n, n): index 0 is the
residue part, index 1 the w-part.  Batches carry leading axes, so a stack
of k matrices has shape (k, 2, n, n).  All entries live in [0, q).
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .local_ring import O2Elem


class Singular(ArithmeticError):
    pass


def identity(n, batch=()):
    out = np.zeros(tuple(batch) + (2, n, n), dtype=np.int64)
    out[..., 0, :, :] = np.eye(n, dtype=np.int64)
    return out


def from_parts(res, wpart=None):
    res = np.asarray(res, dtype=np.int64)
    if wpart is None:
        wpart = np.zeros_like(res)
    return np.stack([res, np.asarray(wpart, dtype=np.int64)], axis=-3)


def from_o2(rows, q):
    """Build one matrix from nested lists of O2Elem or ints."""
    n = len(rows)
    out = np.zeros((2, n, n), dtype=np.int64)
    for i, row in enumerate(rows):
        for j, e in enumerate(row):
            if isinstance(e, O2Elem):
                out[0, i, j], out[1, i, j] = e.a, e.b
            else:
                out[0, i, j] = int(e) % q
    return out


def entry(x, i, j, q) -> O2Elem:
    return O2Elem(int(x[0, i, j]), int(x[1, i, j]), q)


def mul(x, y, q):
    x0, x1 = x[..., 0, :, :], x[..., 1, :, :]
    y0, y1 = y[..., 0, :, :], y[..., 1, :, :]
    return np.stack([(x0 @ y0) % q, (x0 @ y1 + x1 @ y0) % q], axis=-3)


def add(x, y, q):
    return (x + y) % q


def reduce_res(x):
    """Residue part (the image in M_n(F_q))."""
    return x[..., 0, :, :]


def lift(res):
    return from_parts(res)


def block_diag(*blocks):
    n = sum(b.shape[-1] for b in blocks)
    batch = np.broadcast_shapes(*(b.shape[:-3] for b in blocks))
    out = np.zeros(batch + (2, n, n), dtype=np.int64)
    k = 0
    for b in blocks:
        m = b.shape[-1]
        out[..., :, k:k + m, k:k + m] = b
        k += m
    return out


def elementary(n, i, j, value: O2Elem | int, q):
    """I + value * E_ij."""
    out = identity(n)
    v = value if isinstance(value, O2Elem) else O2Elem(int(value), 0, q)
    out[0, i, j] = (out[0, i, j] + v.a) % q
    out[1, i, j] = (out[1, i, j] + v.b) % q
    return out


def scalar(n, value: O2Elem):
    out = np.zeros((2, n, n), dtype=np.int64)
    out[0] = np.eye(n, dtype=np.int64) * value.a
    out[1] = np.eye(n, dtype=np.int64) * value.b
    return out


def permutation(perm):
    """Matrix sending e_j to e_perm[j]."""
    n = len(perm)
    out = np.zeros((2, n, n), dtype=np.int64)
    for j, i in enumerate(perm):
        out[0, i, j] = 1
    return out


def trace(x, q):
    return np.trace(x, axis1=-2, axis2=-1) % q


def is_identity(x):
    n = x.shape[-1]
    return np.all(x == identity(n), axis=(-3, -2, -1))


# --- inversion -------------------------------------------------------------

@njit(cache=True)
def _inv_res(a, q, out):
    """Gauss-Jordan inverse of an n x n matrix mod q; False if singular."""
    n = a.shape[0]
    m = np.zeros((n, 2 * n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            m[i, j] = a[i, j] % q
        m[i, n + i] = 1
    for c in range(n):
        p = -1
        for r in range(c, n):
            if m[r, c] % q != 0:
                p = r
                break
        if p < 0:
            return False
        if p != c:
            for j in range(2 * n):
                t = m[c, j]
                m[c, j] = m[p, j]
                m[p, j] = t
        iv = 1
        piv = m[c, c] % q
        for _ in range(q - 2):
            iv = (iv * piv) % q
        for j in range(2 * n):
            m[c, j] = (m[c, j] * iv) % q
        for r in range(n):
            if r != c:
                f = m[r, c] % q
                if f != 0:
                    for j in range(2 * n):
                        m[r, j] = (m[r, j] - f * m[c, j]) % q
    for i in range(n):
        for j in range(n):
            out[i, j] = m[i, n + j]
    return True


@njit(cache=True)
def _inv_o2(x, q, out):
    """(A + wB)^-1 = A^-1 - w A^-1 B A^-1 (one Newton step from A^-1)."""
    n = x.shape[1]
    ai = np.zeros((n, n), dtype=np.int64)
    if not _inv_res(x[0], q, ai):
        return False
    t = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            s = 0
            for k in range(n):
                s += x[1, i, k] * ai[k, j]
            t[i, j] = s % q
    for i in range(n):
        for j in range(n):
            s = 0
            for k in range(n):
                s += ai[i, k] * t[k, j]
            out[0, i, j] = ai[i, j]
            out[1, i, j] = (-s) % q
    return True


@njit(cache=True)
def _inv_batch(xs, q, out):
    ok = np.ones(xs.shape[0], dtype=np.bool_)
    for k in range(xs.shape[0]):
        ok[k] = _inv_o2(xs[k], q, out[k])
    return ok


def inv(x, q):
    x = np.ascontiguousarray(x, dtype=np.int64)
    flat = x.reshape((-1,) + x.shape[-3:])
    out = np.zeros_like(flat)
    ok = _inv_batch(flat, q, out)
    if not ok.all():
        raise Singular("matrix is not invertible over o2")
    return out.reshape(x.shape)


def is_invertible(x, q):
    x = np.ascontiguousarray(x, dtype=np.int64)
    flat = x.reshape((-1,) + x.shape[-3:])
    out = np.zeros_like(flat)
    return _inv_batch(flat, q, out).reshape(x.shape[:-3])


def conj(g, x, q):
    """g x g^-1."""
    return mul(mul(g, x, q), inv(g, q), q)


# --- packing ---------------------------------------------------------------

def pack(x, q):
    """Integer codes, shape (k, w): w = 1 for n <= 3, w = 2 for n = 4.

    For n = 4 the two words are the residue part and the w-part, so the
    pair is the 128-bit key of the matrix.
    """
    x = np.asarray(x, dtype=np.int64)
    n = x.shape[-1]
    flat = x.reshape(-1, 2 * n * n)
    if n <= 3:
        w = (q ** np.arange(2 * n * n, dtype=np.int64))
        return (flat @ w).reshape(-1, 1)
    w = q ** np.arange(n * n, dtype=np.int64)
    return np.stack([flat[:, : n * n] @ w, flat[:, n * n:] @ w], axis=1)


def unpack(codes, q, n):
    codes = np.asarray(codes, dtype=np.int64).reshape(len(codes), -1)
    out = np.zeros((len(codes), 2 * n * n), dtype=np.int64)
    if n <= 3:
        c = codes[:, 0].copy()
        for i in range(2 * n * n):
            out[:, i] = c % q
            c //= q
    else:
        for half in range(2):
            c = codes[:, half].copy()
            for i in range(n * n):
                out[:, half * n * n + i] = c % q
                c //= q
    return out.reshape(len(codes), 2, n, n)


def code128(x, q) -> int:
    """Single Python integer key for one matrix (any n <= 4)."""
    c = pack(x[None], q)[0]
    if len(c) == 1:
        return int(c[0])
    return int(c[0]) | (int(c[1]) << 64)


def row_keys(arr):
    """Hashable bytes for each row of a 2-d integer array."""
    arr = np.ascontiguousarray(arr, dtype=np.int64)
    return [r.tobytes() for r in arr]
