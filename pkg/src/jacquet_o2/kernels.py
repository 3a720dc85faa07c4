"""Compiled helpers for coset fingerprints.

Every function takes a batch (k, 2, n, n) and returns int64 words, one row
per matrix.  The words are complete invariants of the left coset xH for the
subgroup H the function belongs to.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .matrices import _inv_o2, _inv_res


@njit(cache=True)
def _mul_o2(x, y, q, out):
    n = x.shape[1]
    m = y.shape[2]
    kk = x.shape[2]
    for i in range(n):
        for j in range(m):
            s0 = 0
            s1 = 0
            for k in range(kk):
                s0 += x[0, i, k] * y[0, k, j]
                s1 += x[0, i, k] * y[1, k, j] + x[1, i, k] * y[0, k, j]
            out[0, i, j] = s0 % q
            out[1, i, j] = s1 % q


@njit(cache=True)
def _pow_mod(a, e, q):
    r = 1
    a = a % q
    while e > 0:
        if e & 1:
            r = (r * a) % q
        a = (a * a) % q
        e >>= 1
    return r


@njit(cache=True)
def _pivot_rows(v, q, k, piv):
    """Greedy first-independent rows of the residue of v (n x k)."""
    n = v.shape[1]
    basis = np.zeros((k, k), dtype=np.int64)
    lead = np.full(k, -1, dtype=np.int64)
    nb = 0
    row = np.zeros(k, dtype=np.int64)
    for i in range(n):
        if nb == k:
            break
        for j in range(k):
            row[j] = v[0, i, j] % q
        for b in range(nb):
            c = row[lead[b]]
            if c != 0:
                for j in range(k):
                    row[j] = (row[j] - c * basis[b, j]) % q
        lj = -1
        for j in range(k):
            if row[j] != 0:
                lj = j
                break
        if lj >= 0:
            iv = _pow_mod(row[lj], q - 2, q)
            for j in range(k):
                basis[nb, j] = (row[j] * iv) % q
            # keep the basis reduced at its leading column
            for b in range(nb):
                c = basis[b, lj]
                if c != 0:
                    for j in range(k):
                        basis[b, j] = (basis[b, j] - c * basis[nb, j]) % q
            lead[nb] = lj
            piv[nb] = i
            nb += 1
    return nb


@njit(cache=True)
def _canon_span(x, q, k, w, piv):
    """w <- V (V[R])^-1 for V the first k columns of x; piv <- R."""
    n = x.shape[1]
    nb = _pivot_rows(x[:, :, :k], q, k, piv)
    if nb < k:
        return False
    s = np.zeros((2, k, k), dtype=np.int64)
    for a in range(k):
        for j in range(k):
            s[0, a, j] = x[0, piv[a], j]
            s[1, a, j] = x[1, piv[a], j]
    si = np.zeros((2, k, k), dtype=np.int64)
    _inv_o2(s, q, si)
    v = np.ascontiguousarray(x[:, :, :k])
    _mul_o2(v, si, q, w)
    return True


@njit(cache=True)
def _span_code(w, piv, q, k):
    n = w.shape[1]
    mask = 0
    for a in range(k):
        mask |= 1 << piv[a]
    code = 0
    mult = 1
    for i in range(n):
        if (mask >> i) & 1:
            continue
        for j in range(k):
            for p in range(2):
                code += w[p, i, j] * mult
                mult *= q
    return mask + (1 << n) * code


@njit(cache=True)
def _canon_rep(w, piv, k, r):
    """Complete w to an invertible matrix with standard basis columns."""
    n = w.shape[1]
    r[:] = 0
    for i in range(n):
        for j in range(k):
            r[0, i, j] = w[0, i, j]
            r[1, i, j] = w[1, i, j]
    mask = 0
    for a in range(k):
        mask |= 1 << piv[a]
    c = k
    for i in range(n):
        if not (mask >> i) & 1:
            r[0, i, c] = 1
            c += 1


@njit(cache=True)
def flag_codes(xs, q, k):
    """Code of the o2-span of the first k columns (cosets of the (k, n-k) parabolic)."""
    m = xs.shape[0]
    n = xs.shape[2]
    out = np.zeros((m, 1), dtype=np.int64)
    w = np.zeros((2, n, k), dtype=np.int64)
    piv = np.zeros(k, dtype=np.int64)
    for t in range(m):
        if not _canon_span(xs[t], q, k, w, piv):
            out[t, 0] = -1
        else:
            out[t, 0] = _span_code(w, piv, q, k)
    return out


@njit(cache=True)
def flag_reps(xs, q, k):
    """Canonical coset representative r with x in r * P_{k,n-k}."""
    m = xs.shape[0]
    n = xs.shape[2]
    out = np.zeros_like(xs)
    w = np.zeros((2, n, k), dtype=np.int64)
    piv = np.zeros(k, dtype=np.int64)
    for t in range(m):
        _canon_span(xs[t], q, k, w, piv)
        _canon_rep(w, piv, k, out[t])
    return out


@njit(cache=True)
def _res_code(a, q):
    code = 0
    mult = 1
    n = a.shape[0]
    for i in range(n):
        for j in range(a.shape[1]):
            code += (a[i, j] % q) * mult
            mult *= q
    return code


@njit(cache=True)
def _conj_label(g, b, q, tmp_inv):
    """Code of g b g^-1 over F_q (g, b residue matrices)."""
    n = g.shape[0]
    _inv_res(g, q, tmp_inv)
    t = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            s = 0
            for k in range(n):
                s += g[i, k] * b[k, j]
            t[i, j] = s % q
    code = 0
    mult = 1
    for i in range(n):
        for j in range(n):
            s = 0
            for k in range(n):
                s += t[i, k] * tmp_inv[k, j]
            code += (s % q) * mult
            mult *= q
    return code


@njit(cache=True)
def centralizer_labels(xs, bres, q):
    """Cosets of the preimage of the centralizer of bres: label x -> x b x^-1."""
    m = xs.shape[0]
    n = xs.shape[2]
    out = np.zeros((m, 1), dtype=np.int64)
    tmp = np.zeros((n, n), dtype=np.int64)
    for t in range(m):
        out[t, 0] = _conj_label(xs[t, 0], bres, q, tmp)
    return out


@njit(cache=True)
def _inner_from_flag(x, q, k, w, piv, r, ri, p):
    _canon_span(x, q, k, w, piv)
    _canon_rep(w, piv, k, r)
    _inv_o2(r, q, ri)
    _mul_o2(ri, x, q, p)


@njit(cache=True)
def block_pair_codes(xs, q, b1, b2):
    """Cosets of T1 T2 N inside GL4 with T_i the preimage of the centralizer of b_i."""
    m = xs.shape[0]
    out = np.zeros((m, 3), dtype=np.int64)
    w = np.zeros((2, 4, 2), dtype=np.int64)
    piv = np.zeros(2, dtype=np.int64)
    r = np.zeros((2, 4, 4), dtype=np.int64)
    ri = np.zeros((2, 4, 4), dtype=np.int64)
    p = np.zeros((2, 4, 4), dtype=np.int64)
    tmp = np.zeros((2, 2), dtype=np.int64)
    for t in range(m):
        _inner_from_flag(xs[t], q, 2, w, piv, r, ri, p)
        out[t, 0] = _span_code(w, piv, q, 2)
        out[t, 1] = _conj_label(np.ascontiguousarray(p[0, :2, :2]), b1, q, tmp)
        out[t, 2] = _conj_label(np.ascontiguousarray(p[0, 2:, 2:]), b2, q, tmp)
    return out


@njit(cache=True)
def block_31_codes(xs, q, c):
    """Cosets of S U o2^x inside GL4 with S the preimage of the centralizer of c."""
    m = xs.shape[0]
    out = np.zeros((m, 2), dtype=np.int64)
    w = np.zeros((2, 4, 3), dtype=np.int64)
    piv = np.zeros(3, dtype=np.int64)
    r = np.zeros((2, 4, 4), dtype=np.int64)
    ri = np.zeros((2, 4, 4), dtype=np.int64)
    p = np.zeros((2, 4, 4), dtype=np.int64)
    tmp = np.zeros((3, 3), dtype=np.int64)
    for t in range(m):
        _inner_from_flag(xs[t], q, 3, w, piv, r, ri, p)
        out[t, 0] = _span_code(w, piv, q, 3)
        out[t, 1] = _conj_label(np.ascontiguousarray(p[0, :3, :3]), c, q, tmp)
    return out


@njit(cache=True)
def diagonal_quotient_codes(xs, q):
    """Cosets of {(g X; 0 g)} in GL4: flag plus p11 p22^-1."""
    m = xs.shape[0]
    out = np.zeros((m, 2), dtype=np.int64)
    w = np.zeros((2, 4, 2), dtype=np.int64)
    piv = np.zeros(2, dtype=np.int64)
    r = np.zeros((2, 4, 4), dtype=np.int64)
    ri = np.zeros((2, 4, 4), dtype=np.int64)
    p = np.zeros((2, 4, 4), dtype=np.int64)
    d = np.zeros((2, 2, 2), dtype=np.int64)
    e = np.zeros((2, 2, 2), dtype=np.int64)
    for t in range(m):
        _inner_from_flag(xs[t], q, 2, w, piv, r, ri, p)
        out[t, 0] = _span_code(w, piv, q, 2)
        _inv_o2(np.ascontiguousarray(p[:, 2:, 2:]), q, d)
        _mul_o2(np.ascontiguousarray(p[:, :2, :2]), d, q, e)
        out[t, 1] = _res_code(e[0], q) + _res_code(e[1], q) * q ** 4
    return out


@njit(cache=True)
def unipotent_radical_codes(xs, q, k):
    """Cosets of the unipotent radical of the (k, n-k) parabolic."""
    m = xs.shape[0]
    n = xs.shape[2]
    out = np.zeros((m, 2), dtype=np.int64)
    w = np.zeros((2, n, k), dtype=np.int64)
    piv = np.zeros(k, dtype=np.int64)
    y = np.zeros((2, n, n - k), dtype=np.int64)
    yr = np.zeros((2, k, n - k), dtype=np.int64)
    wy = np.zeros((2, n, n - k), dtype=np.int64)
    for t in range(m):
        x = xs[t]
        _canon_span(x, q, k, w, piv)
        for a in range(k):
            for j in range(n - k):
                yr[0, a, j] = x[0, piv[a], k + j]
                yr[1, a, j] = x[1, piv[a], k + j]
        _mul_o2(w, yr, q, wy)
        c0 = 0
        c1 = 0
        mult = 1
        for i in range(n):
            for j in range(n):
                if j < k:
                    v0 = x[0, i, j]
                    v1 = x[1, i, j]
                else:
                    v0 = (x[0, i, j] - wy[0, i, j - k]) % q
                    v1 = (x[1, i, j] - wy[1, i, j - k]) % q
                c0 += v0 * mult
                c1 += v1 * mult
                mult *= q
        out[t, 0] = c0
        out[t, 1] = c1
    return out


@njit(cache=True)
def scalar_normal_codes(xs, q, reduce_first):
    """Cosets of the scalars (reduce_first=False) or of Z*K^1 (True)."""
    m = xs.shape[0]
    n = xs.shape[2]
    out = np.zeros((m, 2), dtype=np.int64)
    for t in range(m):
        x = xs[t]
        a = 0
        b = 0
        found = False
        for i in range(n):
            for j in range(n):
                if x[0, i, j] % q != 0:
                    a = x[0, i, j]
                    b = x[1, i, j]
                    found = True
                    break
            if found:
                break
        ai = _pow_mod(a, q - 2, q)
        bi = (-ai * ai * b) % q
        c0 = 0
        c1 = 0
        mult = 1
        for i in range(n):
            for j in range(n):
                v0 = (x[0, i, j] * ai) % q
                v1 = (x[0, i, j] * bi + x[1, i, j] * ai) % q
                c0 += v0 * mult
                if not reduce_first:
                    c1 += v1 * mult
                mult *= q
        out[t, 0] = c0
        out[t, 1] = c1
    return out


@njit(cache=True)
def constant_quotient_codes(xs, q):
    """Cosets of GL_n(F_q) (matrices with zero w-part): label B A^-1."""
    m = xs.shape[0]
    n = xs.shape[2]
    out = np.zeros((m, 1), dtype=np.int64)
    ai = np.zeros((n, n), dtype=np.int64)
    for t in range(m):
        _inv_res(xs[t, 0], q, ai)
        code = 0
        mult = 1
        for i in range(n):
            for j in range(n):
                s = 0
                for k in range(n):
                    s += xs[t, 1, i, k] * ai[k, j]
                code += (s % q) * mult
                mult *= q
        out[t, 0] = code
    return out


@njit(cache=True)
def residue_codes(xs, q):
    m = xs.shape[0]
    out = np.zeros((m, 1), dtype=np.int64)
    for t in range(m):
        out[t, 0] = _res_code(xs[t, 0], q)
    return out


@njit(cache=True)
def residue_line_codes(xs, q):
    """Cosets of the preimage of the upper Borel: line of the reduced first column."""
    m = xs.shape[0]
    n = xs.shape[2]
    out = np.zeros((m, 1), dtype=np.int64)
    for t in range(m):
        a = 0
        for i in range(n):
            if xs[t, 0, i, 0] % q != 0:
                a = xs[t, 0, i, 0]
                break
        ai = _pow_mod(a, q - 2, q)
        code = 0
        mult = 1
        for i in range(n):
            code += ((xs[t, 0, i, 0] * ai) % q) * mult
            mult *= q
        out[t, 0] = code
    return out
