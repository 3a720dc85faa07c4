"""The twisted Jacquet module pi_{N,psi} of a GL_4(o2) representation.

pi is induced from a parabolic (P of type (2,2) or Q of type (3,1)); the
result is a class function on GL_2(o2), embedded diagonally as Delta(m).
Three evaluation paths exist:

brute      (1/|N|) sum over all n in N of chi_pi(Delta(m) n) conj(psi(n)),
           with chi_pi computed in stages over G/P (or G/Q) and the Levi
           character read from class tables.
fast       sum over the transversal of G/H; the N-sum over each x collapses
           to an affine fiber computed by linear algebra over F_q.
pieces     the fast kernel applied orbit by orbit over P\\G/P (or P\\G/Q),
           with coset representatives found by a separate search.
"""
from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit

from . import cache as _cache
from . import characters as ch
from . import groups as grp
from . import matrices as mx
from . import representations as rp
from .cyclotomic import CycValue
from .kernels import _mul_o2, flag_reps
from .local_ring import O2Elem

BRUTE_CEILING = 10**11


class FiberStructureViolation(RuntimeError):
    pass


class UnstableCharacter(ValueError):
    pass


@dataclass(eq=False)
class JacquetResult:
    source: rp.MonomialRep
    values: rp.ClassFunction
    path: str
    pieces: dict | None = None
    seconds: float = 0.0
    stats: dict = field(default_factory=dict)

    def dim(self):
        return self.values.dim()


# --- the unipotent radical N ---------------------------------------------------

def n_basis(q):
    """F_q-basis e_i of Lie(N): i = p*4 + a*2 + (b-2) is w^p E_{a,b}."""
    out = np.zeros((8, 2, 4, 4), dtype=np.int64)
    for p in range(2):
        for a in range(2):
            for b in (2, 3):
                out[p * 4 + a * 2 + (b - 2), p, a, b] = 1
    return out


TRACE_DIRECTIONS = (0, 3, 4, 7)


def psi_bar_exponents(psi0: ch.AdditiveChar):
    """Exponent of conj(psi(e_i)) for each basis direction."""
    step = psi0.m // psi0.q
    out = np.zeros(8, dtype=np.int64)
    for i in TRACE_DIRECTIONS:
        out[i] = (-psi0.scale * step) % psi0.m
    return out


def n_elements(q):
    """All of N, in odometer order over the coordinates c_0..c_7."""
    coords = np.array(np.meshgrid(*[np.arange(q)] * 8, indexing="ij")).reshape(8, -1).T[:, ::-1]
    e = n_basis(q)
    return (mx.identity(4)[None] + np.tensordot(coords, e, axes=(1, 0))) % q, coords


def diagonal(ms):
    return mx.block_diag(ms, ms)


def check_psi_stable(psi0: ch.AdditiveChar, samples=200, seed=0):
    """psi(Delta(m) n Delta(m)^-1) = psi(n) on random pairs."""
    q = psi0.q
    rng = np.random.default_rng(seed)
    classes = rp.gl2_classes(q)
    elems = classes.elements[rng.integers(len(classes.elements), size=samples)]
    ns, _ = n_elements(q)
    ns = ns[rng.integers(len(ns), size=samples)]
    psi = ch.psi_N(psi0)
    d = diagonal(elems)
    conj = mx.mul(mx.mul(d, ns, q), mx.inv(d, q), q)
    if not np.array_equal(psi.exponents(conj), psi.exponents(ns)):
        raise UnstableCharacter("psi is not fixed by the diagonal GL_2")
    return True


# --- compiled helpers ----------------------------------------------------------

@njit(cache=True)
def _block_code(h, off, size, q):
    c = 0
    w = 1
    for p in range(2):
        for i in range(size):
            for j in range(size):
                c += h[p, off + i, off + j] * w
                w *= q
    return c


@njit(cache=True)
def _search(codes, c):
    lo = 0
    hi = len(codes)
    while lo < hi:
        mid = (lo + hi) // 2
        if codes[mid] < c:
            lo = mid + 1
        else:
            hi = mid
    if lo < len(codes) and codes[lo] == c:
        return lo
    return -1


@njit(cache=True)
def _lam_exp(h, kind, q, tab1, tab2, scodes, sexps, chitab):
    """lam(h) for h in H, or -1 when h is outside H."""
    if kind == 0:
        e1 = tab1[_block_code(h, 0, 2, q)]
        e2 = tab2[_block_code(h, 2, 2, q)]
        if e1 < 0 or e2 < 0:
            return -1
        return e1 + e2
    pos = _search(scodes, _block_code(h, 0, 3, q))
    if pos < 0:
        return -1
    e = chitab[h[0, 3, 3] + q * h[1, 3, 3]]
    if e < 0:
        return -1
    return sexps[pos] + e


@njit(cache=True)
def _conj_by(yinv, a, y, q, tmp, out):
    _mul_o2(yinv, a, q, tmp)
    _mul_o2(tmp, y, q, out)


@njit(cache=True)
def _solve(mat, ncols, q, sol):
    """Row-reduce an augmented system mat (rows x ncols+1) over F_q in place.

    Returns (rank, consistent); sol receives a particular solution with
    free variables set to zero.
    """
    rows = mat.shape[0]
    r = 0
    piv = np.full(ncols, -1, dtype=np.int64)
    for c in range(ncols):
        sel = -1
        for i in range(r, rows):
            if mat[i, c] % q != 0:
                sel = i
                break
        if sel < 0:
            continue
        for j in range(ncols + 1):
            t = mat[r, j]
            mat[r, j] = mat[sel, j]
            mat[sel, j] = t
        inv = 1
        a = mat[r, c] % q
        e = q - 2
        b = a
        while e > 0:
            if e & 1:
                inv = (inv * b) % q
            b = (b * b) % q
            e >>= 1
        for j in range(ncols + 1):
            mat[r, j] = (mat[r, j] * inv) % q
        for i in range(rows):
            if i != r:
                f = mat[i, c] % q
                if f != 0:
                    for j in range(ncols + 1):
                        mat[i, j] = (mat[i, j] - f * mat[r, j]) % q
        piv[r] = c
        r += 1
        if r == rows:
            break
    consistent = True
    for i in range(r, rows):
        if mat[i, ncols] % q != 0:
            consistent = False
    for c in range(ncols):
        sol[c] = 0
    for i in range(r):
        sol[piv[i]] = mat[i, ncols] % q
    return r, consistent


@njit(cache=True)
def _apply_forms(forms, h, q, col, mat):
    nf = forms.shape[0]
    for f in range(nf):
        s = 0
        for p in range(2):
            for i in range(4):
                for j in range(4):
                    s += forms[f, p * 16 + i * 4 + j] * h[p, i, j]
        mat[f, col] = s % q


# --- brute path ----------------------------------------------------------------

@njit(cache=True)
def _brute_p(dm, R, Rinv, E, q, cls_tab, counts):
    """Counts (class of block 1, class of block 2, trace digit) over passes."""
    t1 = np.zeros((2, 4, 4), dtype=np.int64)
    A = np.zeros((2, 4, 4), dtype=np.int64)
    D = np.zeros((8, 2, 4, 4), dtype=np.int64)
    cur = np.zeros((2, 4, 4), dtype=np.int64)
    tmp = np.zeros((2, 4, 4), dtype=np.int64)
    c = np.zeros(8, dtype=np.int64)
    for r in range(R.shape[0]):
        _mul_o2(Rinv[r], dm, q, t1)
        _mul_o2(t1, R[r], q, A)
        for i in range(8):
            _mul_o2(t1, E[i], q, tmp)
            _mul_o2(tmp, R[r], q, D[i])
        for lo in range(q ** 4):
            x = lo
            for i in range(4):
                c[i] = x % q
                x //= q
            ok = True
            for a in range(2, 4):
                for b in range(2):
                    s = A[0, a, b]
                    for i in range(4):
                        s += c[i] * D[i, 0, a, b]
                    if s % q != 0:
                        ok = False
            if not ok:
                continue
            for p in range(2):
                for a in range(4):
                    for b in range(4):
                        s = A[p, a, b]
                        for i in range(4):
                            s += c[i] * D[i, p, a, b]
                        cur[p, a, b] = s % q
            for hi in range(q ** 4):
                x = hi
                for i in range(4, 8):
                    c[i] = x % q
                    x //= q
                ok = True
                for a in range(2, 4):
                    for b in range(2):
                        s = cur[1, a, b]
                        for i in range(4, 8):
                            s += c[i] * D[i, 1, a, b]
                        if s % q != 0:
                            ok = False
                if not ok:
                    continue
                for a in range(4):
                    for b in range(4):
                        s = cur[1, a, b]
                        for i in range(4, 8):
                            s += c[i] * D[i, 1, a, b]
                        tmp[1, a, b] = s % q
                        tmp[0, a, b] = cur[0, a, b]
                k1 = cls_tab[_block_code(tmp, 0, 2, q)]
                k2 = cls_tab[_block_code(tmp, 2, 2, q)]
                t = (c[0] + c[3] + c[4] + c[7]) % q
                counts[k1, k2, t] += 1


@njit(cache=True)
def _charpoly_irreducible3(g, q):
    # x^3 - t x^2 + s x - d, irreducible iff no root in F_q
    t = (g[0, 0] + g[1, 1] + g[2, 2]) % q
    s = (g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0] + g[0, 0] * g[2, 2] - g[0, 2] * g[2, 0]
         + g[1, 1] * g[2, 2] - g[1, 2] * g[2, 1]) % q
    d = (g[0, 0] * (g[1, 1] * g[2, 2] - g[1, 2] * g[2, 1])
         - g[0, 1] * (g[1, 0] * g[2, 2] - g[1, 2] * g[2, 0])
         + g[0, 2] * (g[1, 0] * g[2, 1] - g[1, 1] * g[2, 0])) % q
    for x in range(q):
        if (x * x * x - t * x * x + s * x - d) % q == 0:
            return False
    return True


@njit(cache=True)
def _brute_q(dm, R, Rinv, E, q, M, psi_step, scale, Y3, Y3inv, CY, scodes, sexps, chitab,
             zexp, inv_tab, phi_cnt, phi_exps, acc):
    """Accumulate exponent counts of chi_pi(Delta(m) n) conj(psi(n)) over G/Q x N."""
    t1 = np.zeros((2, 4, 4), dtype=np.int64)
    A = np.zeros((2, 4, 4), dtype=np.int64)
    D = np.zeros((8, 2, 4, 4), dtype=np.int64)
    cur = np.zeros((2, 4, 4), dtype=np.int64)
    tmp = np.zeros((2, 4, 4), dtype=np.int64)
    g1 = np.zeros((2, 3, 3), dtype=np.int64)
    h3 = np.zeros((2, 3, 3), dtype=np.int64)
    t3 = np.zeros((2, 3, 3), dtype=np.int64)
    c = np.zeros(8, dtype=np.int64)
    ny = Y3.shape[0]
    for r in range(R.shape[0]):
        _mul_o2(Rinv[r], dm, q, t1)
        _mul_o2(t1, R[r], q, A)
        for i in range(8):
            _mul_o2(t1, E[i], q, tmp)
            _mul_o2(tmp, R[r], q, D[i])
        for lo in range(q ** 4):
            x = lo
            for i in range(4):
                c[i] = x % q
                x //= q
            ok = True
            for b in range(3):
                s = A[0, 3, b]
                for i in range(4):
                    s += c[i] * D[i, 0, 3, b]
                if s % q != 0:
                    ok = False
            if not ok:
                continue
            for p in range(2):
                for a in range(4):
                    for b in range(4):
                        s = A[p, a, b]
                        for i in range(4):
                            s += c[i] * D[i, p, a, b]
                        cur[p, a, b] = s % q
            # the residue of the 3x3 block does not move with c_4..c_7
            for a in range(3):
                for b in range(3):
                    g1[0, a, b] = cur[0, a, b]
            scalar = True
            for a in range(3):
                for b in range(3):
                    if a != b and g1[0, a, b] != 0:
                        scalar = False
            if g1[0, 1, 1] != g1[0, 0, 0] or g1[0, 2, 2] != g1[0, 0, 0]:
                scalar = False
            elliptic = False
            if not scalar:
                elliptic = _charpoly_irreducible3(g1[0], q)
                if not elliptic:
                    continue
            for hi in range(q ** 4):
                x = hi
                for i in range(4, 8):
                    c[i] = x % q
                    x //= q
                ok = True
                for b in range(3):
                    s = cur[1, 3, b]
                    for i in range(4, 8):
                        s += c[i] * D[i, 1, 3, b]
                    if s % q != 0:
                        ok = False
                if not ok:
                    continue
                for a in range(4):
                    for b in range(4):
                        s = cur[1, a, b]
                        for i in range(4, 8):
                            s += c[i] * D[i, 1, a, b]
                        tmp[1, a, b] = s % q
                        tmp[0, a, b] = cur[0, a, b]
                ce = chitab[tmp[0, 3, 3] + q * tmp[1, 3, 3]]
                pe = (M - scale * psi_step * ((c[0] + c[3] + c[4] + c[7]) % q) % M) % M
                base = ce + pe
                if scalar:
                    z = tmp[0, 0, 0]
                    zi = inv_tab[z]
                    code = 0
                    w = 1
                    for a in range(3):
                        for b in range(3):
                            code += ((tmp[1, a, b] * zi) % q) * w
                            w *= q
                    for u in range(phi_exps.shape[0]):
                        n = phi_cnt[code, u]
                        if n:
                            acc[(base + zexp[z] + phi_exps[u]) % M] += n
                else:
                    for a in range(3):
                        for b in range(3):
                            g1[1, a, b] = tmp[1, a, b]
                    for y in range(ny):
                        comm = True
                        for a in range(3):
                            for b in range(3):
                                s = 0
                                for k in range(3):
                                    s += g1[0, a, k] * CY[y, k, b] - CY[y, a, k] * g1[0, k, b]
                                if s % q != 0:
                                    comm = False
                        if not comm:
                            continue
                        _mul_o2(Y3inv[y], g1, q, t3)
                        _mul_o2(t3, Y3[y], q, h3)
                        pos = _search(scodes, _block_code(h3, 0, 3, q))
                        if pos < 0:
                            acc[0] -= 1 << 40  # poison: commuting conjugate outside S
                        else:
                            acc[(base + sexps[pos]) % M] += 1


@njit(cache=True)
def _phi_table(q, Y3, Y3inv, scodes, sexps, exps_index, cnt):
    """cnt[code(X), u]: number of y with lam(I + w y^-1 X y) = exps[u]."""
    nx = q ** 9
    x = np.zeros((2, 3, 3), dtype=np.int64)
    h = np.zeros((2, 3, 3), dtype=np.int64)
    t = np.zeros((2, 3, 3), dtype=np.int64)
    for code in range(nx):
        v = code
        for a in range(3):
            for b in range(3):
                x[0, a, b] = 1 if a == b else 0
                x[1, a, b] = v % q
                v //= q
        for y in range(Y3.shape[0]):
            _mul_o2(Y3inv[y], x, q, t)
            _mul_o2(t, Y3[y], q, h)
            pos = _search(scodes, _block_code(h, 0, 3, q))
            if pos < 0:
                return False
            cnt[code, exps_index[pos]] += 1
    return True


# --- fast path -----------------------------------------------------------------

@njit(cache=True)
def _fiber_data(R, Rinv, Ys, Yinvs, x_r, x_y, E, forms, q, M, kind, psi_e,
                tab1, tab2, scodes, sexps, chitab, dims, trivial):
    """Per x = R[x_r] Ys[x_y]: dim of N_x and whether lam.psibar is trivial on it."""
    nf = forms.shape[0]
    L = np.zeros((8, 2, 4, 4), dtype=np.int64)
    tmp = np.zeros((2, 4, 4), dtype=np.int64)
    t2 = np.zeros((2, 4, 4), dtype=np.int64)
    xr = np.zeros((2, 4, 4), dtype=np.int64)
    xinv = np.zeros((2, 4, 4), dtype=np.int64)
    nb = np.zeros((2, 4, 4), dtype=np.int64)
    mat = np.zeros((nf, 9), dtype=np.int64)
    sol = np.zeros(8, dtype=np.int64)
    basis = np.zeros(8, dtype=np.int64)
    piv = np.zeros(8, dtype=np.int64)
    for k in range(len(x_r)):
        _mul_o2(R[x_r[k]], Ys[x_y[k]], q, xr)
        _mul_o2(Yinvs[x_y[k]], Rinv[x_r[k]], q, xinv)
        for i in range(8):
            _mul_o2(xinv, E[i], q, tmp)
            _mul_o2(tmp, xr, q, L[i])
            _apply_forms(forms, L[i], q, i, mat)
        for f in range(nf):
            mat[f, 8] = 0
        rank, _ = _solve(mat, 8, q, sol)
        dims[k] = 8 - rank
        # pivot columns of the reduced matrix
        isp = np.zeros(8, dtype=np.bool_)
        for i in range(rank):
            for c in range(8):
                if mat[i, c] % q != 0:
                    isp[c] = True
                    piv[i] = c
                    break
        triv = True
        for fc in range(8):
            if isp[fc]:
                continue
            for c in range(8):
                basis[c] = 0
            basis[fc] = 1
            for i in range(rank):
                basis[piv[i]] = (-mat[i, fc]) % q
            for p in range(2):
                for a in range(4):
                    for b in range(4):
                        s = 1 if (p == 0 and a == b) else 0
                        for c in range(8):
                            s += basis[c] * L[c, p, a, b]
                        nb[p, a, b] = s % q
            e = _lam_exp(nb, kind, q, tab1, tab2, scodes, sexps, chitab)
            if e < 0:
                dims[k] = -1  # N_x element outside H: broken forms
                triv = False
                break
            for c in range(8):
                e += basis[c] * psi_e[c]
            if e % M != 0:
                triv = False
                break
        trivial[k] = triv


@njit(cache=True)
def _fast_kernel(dm, R, Rinv, Ys, Yinvs, x_r, x_y, E, forms, outer_forms, q, M, kind,
                 psi_e, tab1, tab2, scodes, sexps, chitab, dims, trivial, acc, bad):
    """Accumulate q^dim(N_x) zeta^(lam(A') - psi(c0)) over x with nonempty fibers.

    x_r must be sorted so that all x sharing an outer representative are
    consecutive; the outer test prunes whole groups.
    """
    nf = forms.shape[0]
    nof = outer_forms.shape[0]
    t1 = np.zeros((2, 4, 4), dtype=np.int64)
    tmp = np.zeros((2, 4, 4), dtype=np.int64)
    Ar = np.zeros((2, 4, 4), dtype=np.int64)
    Dr = np.zeros((8, 2, 4, 4), dtype=np.int64)
    Ax = np.zeros((2, 4, 4), dtype=np.int64)
    Dx = np.zeros((8, 2, 4, 4), dtype=np.int64)
    Ap = np.zeros((2, 4, 4), dtype=np.int64)
    omat = np.zeros((nof, 9), dtype=np.int64)
    mat = np.zeros((nf, 9), dtype=np.int64)
    sol = np.zeros(8, dtype=np.int64)
    k = 0
    n = len(x_r)
    while k < n:
        r = x_r[k]
        end = k
        while end < n and x_r[end] == r:
            end += 1
        _mul_o2(Rinv[r], dm, q, t1)
        _mul_o2(t1, R[r], q, Ar)
        for i in range(8):
            _mul_o2(t1, E[i], q, tmp)
            _mul_o2(tmp, R[r], q, Dr[i])
            _apply_forms(outer_forms, Dr[i], q, i, omat)
        _apply_forms(outer_forms, Ar, q, 8, omat)
        for f in range(nof):
            omat[f, 8] = (-omat[f, 8]) % q
        _, ok = _solve(omat, 8, q, sol)
        if ok:
            for kk in range(k, end):
                y = x_y[kk]
                _conj_by(Yinvs[y], Ar, Ys[y], q, tmp, Ax)
                for i in range(8):
                    _conj_by(Yinvs[y], Dr[i], Ys[y], q, tmp, Dx[i])
                    _apply_forms(forms, Dx[i], q, i, mat)
                _apply_forms(forms, Ax, q, 8, mat)
                for f in range(nf):
                    mat[f, 8] = (-mat[f, 8]) % q
                rank, consistent = _solve(mat, 8, q, sol)
                if not consistent:
                    continue
                if 8 - rank != dims[kk]:
                    bad[0] += 1
                    continue
                if not trivial[kk]:
                    continue
                for p in range(2):
                    for a in range(4):
                        for b in range(4):
                            s = Ax[p, a, b]
                            for i in range(8):
                                s += sol[i] * Dx[i, p, a, b]
                            Ap[p, a, b] = s % q
                e = _lam_exp(Ap, kind, q, tab1, tab2, scodes, sexps, chitab)
                if e < 0:
                    bad[1] += 1
                    continue
                for i in range(8):
                    e += sol[i] * psi_e[i]
                acc[e % M] += q ** dims[kk]
        k = end


# --- setup shared by the paths -----------------------------------------------------

def _commutation_forms(b, offset, q):
    """Linear forms on 32 coordinates: residue block at offset commutes with b."""
    b = np.asarray(b, dtype=np.int64) % q
    s = b.shape[0]
    out = []
    for i in range(s):
        for j in range(s):
            f = np.zeros(32, dtype=np.int64)
            for k in range(s):
                f[(offset + i) * 4 + offset + k] += b[k, j]
                f[(offset + k) * 4 + offset + j] -= b[i, k]
            out.append(f % q)
    return out


def _vanishing_forms(rows, cols):
    out = []
    for p in range(2):
        for i in rows:
            for j in cols:
                f = np.zeros(32, dtype=np.int64)
                f[p * 16 + i * 4 + j] = 1
                out.append(f)
    return out


@dataclass(eq=False)
class Setup:
    rep: rp.MonomialRep
    kind: int  # 0 for P, 1 for Q
    psi0: ch.AdditiveChar
    forms: np.ndarray
    outer_forms: np.ndarray
    tab1: np.ndarray
    tab2: np.ndarray
    scodes: np.ndarray
    sexps: np.ndarray
    chitab: np.ndarray


def setup(rep: rp.MonomialRep, psi0: ch.AdditiveChar) -> Setup:
    q = rep.q
    if psi0.q != q:
        raise ValueError("psi0 and representation over different q")
    if psi0.m != rep.m:
        raise ValueError("cyclotomic moduli differ")
    kind = rep.parts.get("kind")
    empty1 = np.full(1, -1, dtype=np.int64)
    if kind == "P":
        pi1, pi2 = rep.parts["pi1"], rep.parts["pi2"]
        tabs = []
        for pi in (pi1, pi2):
            t = np.full(q**8, -1, dtype=np.int64)
            t[pi.lam.codes] = pi.lam.table
            tabs.append(t)
        forms = (_vanishing_forms((2, 3), (0, 1)) + _commutation_forms(pi1.parts["B"], 0, q)
                 + _commutation_forms(pi2.parts["B"], 2, q))
        outer = _vanishing_forms((2, 3), (0, 1))
        return Setup(rep, 0, psi0, np.array(forms), np.array(outer), tabs[0], tabs[1],
                     empty1, empty1, empty1)
    if kind == "Q":
        rho, chi = rep.parts["rho"], rep.parts["chi"]
        chitab = np.full(q * q, -1, dtype=np.int64)
        units = ch.units_of_o2(q)
        chitab[units[:, 0, 0, 0] + q * units[:, 1, 0, 0]] = chi.exponents(units)
        forms = _vanishing_forms((3,), (0, 1, 2)) + _commutation_forms(rho.parts["C"], 0, q)
        outer = _vanishing_forms((3,), (0, 1, 2))
        return Setup(rep, 1, psi0, np.array(forms), np.array(outer), empty1, empty1,
                     rho.lam.codes, rho.lam.table, chitab)
    raise ValueError("the representation must come from rep_from_P or rep_from_Q")


def _finish(rep, classes, accs, path, t0, pieces=None, stats=None):
    q = rep.q
    total = q**8
    coeffs = np.zeros((len(classes), rep.m), dtype=np.int64)
    for i, acc in enumerate(accs):
        coeffs[i] = CycValue(acc, rep.m).exact_div(total).coeffs
    cf = rp.ClassFunction(classes, coeffs, rep.m)
    return JacquetResult(rep, cf, path, pieces, time.perf_counter() - t0, stats or {})


# --- brute ---------------------------------------------------------------------

def brute_cost(rep: rp.MonomialRep):
    q = rep.q
    return len(rp.gl2_classes(q)) * q**8 * rep.outer.index


def jacquet_brute(rep: rp.MonomialRep, psi0=None, ceiling=BRUTE_CEILING,
                  classes=None) -> JacquetResult:
    q = rep.q
    psi0 = psi0 or ch.AdditiveChar(q)
    t0 = time.perf_counter()
    classes = classes or rp.gl2_classes(q)
    if rep.inducing is rep.ambient:
        return _brute_one_dim(rep, psi0, classes, t0)
    cost = len(classes) * q**8 * rep.outer.index
    if cost > ceiling:
        raise grp.BudgetExceeded(f"brute Jacquet needs about {cost:.2e} steps, "
                                 f"ceiling {ceiling:.0e}")
    st = setup(rep, psi0)
    R = rep.outer.reps
    Rinv = mx.inv(R, q)
    E = n_basis(q)
    M = rep.m
    dms = diagonal(classes.reps)
    accs = []
    if st.kind == 0:
        gl2 = rp.gl2_classes(q)
        cls_tab = np.full(q**8, 0, dtype=np.int64)
        cls_tab[mx.pack(gl2.elements, q)[:, 0]] = gl2.element_class
        f1 = rp.class_function_of(rep.parts["pi1"], gl2)
        f2 = rp.class_function_of(rep.parts["pi2"], gl2)
        step = M // q
        for dm in dms:
            counts = np.zeros((len(gl2), len(gl2), q), dtype=np.int64)
            _brute_p(dm, R, Rinv, E, q, cls_tab, counts)
            accs.append(_combine_counts(counts, f1.coeffs, f2.coeffs, psi0.scale, step, M))
    else:
        rho, chi = rep.parts["rho"], rep.parts["chi"]
        Y3 = rho.reps
        Y3inv = mx.inv(Y3, q)
        cres = rho.parts["C"] % q
        CY = np.array([(y @ cres @ yi) % q for y, yi in zip(Y3[:, 0], Y3inv[:, 0])])
        uniq, idx = np.unique(st.sexps, return_inverse=True)
        cnt = np.zeros((q**9, len(uniq)), dtype=np.int64)
        if not _phi_table(q, Y3, Y3inv, st.scodes, st.sexps, idx.astype(np.int64), cnt):
            raise FiberStructureViolation("kernel element conjugate outside S")
        zexp = np.zeros(q, dtype=np.int64)
        for z in range(1, q):
            zexp[z] = rho.lam.exponent(mx.scalar(3, O2Elem(z, 0, q)))
        inv_tab = np.array([pow(z, -1, q) if z else 0 for z in range(q)], dtype=np.int64)
        for dm in dms:
            acc = np.zeros(M, dtype=np.int64)
            _brute_q(dm, R, Rinv, E, q, M, M // q, psi0.scale, Y3, Y3inv, CY, st.scodes,
                     st.sexps, st.chitab, zexp, inv_tab, cnt, uniq.astype(np.int64), acc)
            if acc.min() < -(1 << 39):
                raise FiberStructureViolation("commuting conjugate outside S")
            accs.append(acc)
    return _finish(rep, classes, accs, "brute", t0, stats={"steps": cost})


def _combine_counts(counts, c1, c2, scale, step, M):
    acc = np.zeros(M, dtype=np.int64)
    for k1, k2, t in zip(*np.nonzero(counts)):
        n = counts[k1, k2, t]
        a, b = c1[k1], c2[k2]
        ia, ib = np.nonzero(a)[0], np.nonzero(b)[0]
        shift = (-scale * step * t) % M
        idx = (ia[:, None] + ib[None, :] + shift) % M
        np.add.at(acc, idx.ravel(), (n * a[ia][:, None] * b[ib][None, :]).ravel())
    return acc


def _brute_one_dim(rep, psi0, classes, t0):
    """pi a character of GL_4(o2) itself."""
    q, M = rep.q, rep.m
    ns, coords = n_elements(q)
    psi_e = psi_bar_exponents(psi0)
    pe = coords @ psi_e
    accs = []
    for dm in diagonal(classes.reps):
        e = rep.lam.exponents(mx.mul(dm[None], ns, q)) + pe
        accs.append(np.bincount(e % M, minlength=M))
    return _finish(rep, classes, accs, "brute", t0)


# --- fast ------------------------------------------------------------------------

def _fiber_cache_path(cache_dir, rep, psi0, words_hash):
    return Path(cache_dir) / f"fiber_q{rep.q}_{words_hash}.bin"


def _fiber_key(st: Setup, R, Ys, x_r, x_y):
    """Digest of every input the fiber data depends on, the character tables included."""
    h = hashlib.sha256()
    parts = [np.array([st.rep.q, st.rep.m, st.kind, st.psi0.scale]), R, Ys, x_r, x_y,
             st.forms, st.outer_forms, st.tab1, st.tab2, st.scodes, st.sexps, st.chitab]
    for a in parts:
        a = np.ascontiguousarray(np.asarray(a, dtype=np.int64))
        h.update(np.array(a.shape, dtype=np.int64).tobytes())
        h.update(a.tobytes())
    return h.hexdigest()[:16]


def affine_fiber_data(st: Setup, R, Rinv, Ys, Yinvs, x_r, x_y, cache_dir=None):
    """(dims, trivial) per x, memoised on disk when a cache dir is set."""
    rep, q = st.rep, st.rep.q
    cache_dir = _cache.resolve(cache_dir)
    key = None
    if cache_dir is not None:
        h = _fiber_key(st, R, Ys, x_r, x_y)
        key = (_fiber_cache_path(cache_dir, rep, st.psi0, h), h)
        words = _cache.read(key[0], q, 4, "fiber", h)
        if words is not None and len(words) == len(x_r):
            return words[:, 0].copy(), words[:, 1].astype(bool)
    dims = np.zeros(len(x_r), dtype=np.int64)
    trivial = np.zeros(len(x_r), dtype=np.bool_)
    _fiber_data(R, Rinv, Ys, Yinvs, x_r, x_y, n_basis(q), st.forms, q, rep.m, st.kind,
                psi_bar_exponents(st.psi0), st.tab1, st.tab2, st.scodes, st.sexps,
                st.chitab, dims, trivial)
    if np.any(dims < 0):
        raise FiberStructureViolation("an element of N_x fails the membership table")
    if key is not None:
        _cache.write(key[0], q, 4, "fiber", key[1],
                     np.stack([dims, trivial.astype(np.int64)], axis=1))
    return dims, trivial


def _run_fast(st, classes, R, Rinv, Ys, Yinvs, x_r, x_y, cache_dir=None):
    q, M = st.rep.q, st.rep.m
    dims, trivial = affine_fiber_data(st, R, Rinv, Ys, Yinvs, x_r, x_y, cache_dir)
    E = n_basis(q)
    psi_e = psi_bar_exponents(st.psi0)
    accs = []
    bad = np.zeros(2, dtype=np.int64)
    for dm in diagonal(classes.reps):
        acc = np.zeros(M, dtype=np.int64)
        _fast_kernel(dm, R, Rinv, Ys, Yinvs, x_r, x_y, E, st.forms, st.outer_forms, q, M,
                     st.kind, psi_e, st.tab1, st.tab2, st.scodes, st.sexps, st.chitab,
                     dims, trivial, acc, bad)
        accs.append(acc)
    if bad[0]:
        raise FiberStructureViolation(f"{bad[0]} fibers are not cosets of N_x")
    if bad[1]:
        raise FiberStructureViolation(f"{bad[1]} fiber base points fall outside H")
    return accs, dims, trivial


def jacquet_fast(rep: rp.MonomialRep, psi0=None, classes=None, cache_dir=None) -> JacquetResult:
    q = rep.q
    psi0 = psi0 or ch.AdditiveChar(q)
    t0 = time.perf_counter()
    classes = classes or rp.gl2_classes(q)
    st = setup(rep, psi0)
    R = rep.outer.reps
    Ys = rep.inner
    x_r = np.repeat(np.arange(len(R)), len(Ys))
    x_y = np.tile(np.arange(len(Ys)), len(R))
    accs, dims, trivial = _run_fast(st, classes, R, mx.inv(R, q), Ys, mx.inv(Ys, q), x_r, x_y,
                                    cache_dir)
    stats = {"contributing_x": int(trivial.sum()),
             "dim_histogram": np.bincount(dims, minlength=9).tolist()}
    return _finish(rep, classes, accs, "fast", t0, stats=stats)


# --- Mackey pieces -------------------------------------------------------------------

def p_deltas(q):
    """The six representatives of P\\GL_4(o2)/P, in the order delta_1..delta_6."""
    eye = np.eye(4, dtype=np.int64)
    d2 = mx.from_parts(eye)
    d2[1, 2, 0] = 1
    d3 = mx.from_parts(eye)
    d3[1, 2, 0] = d3[1, 3, 1] = 1
    d4 = mx.permutation([2, 3, 0, 1])
    d5 = mx.permutation([0, 2, 1, 3])
    d6 = d5.copy()
    d6[1, 3, 0] = 1
    return {"delta1": mx.identity(4), "delta2": d2, "delta3": d3, "delta4": d4,
            "delta5": d5, "delta6": d6}


def q_deltas(q):
    """The three representatives of P\\GL_4(o2)/Q."""
    iw = mx.identity(4)
    iw[1, 3, 0] = 1
    return {"I4": mx.identity(4), "Iw": iw, "(24)": mx.permutation([0, 3, 2, 1])}


def smith_type(x, q):
    """Smith type of the lower-left 2x2 block: (residue rank, o2-length of the
    elementary divisors).  Six values occur, one per P-double coset."""
    blk = np.asarray(x)[:, 2:, :2] % q
    r0 = grp.rank_mod(blk[0], q)
    if r0 == 2:
        return (2, 2)
    if r0 == 1:
        # det = w * det1 when the residue is singular
        det1 = (blk[0, 0, 0] * blk[1, 1, 1] + blk[1, 0, 0] * blk[0, 1, 1]
                - blk[0, 0, 1] * blk[1, 1, 0] - blk[1, 0, 1] * blk[0, 1, 0]) % q
        return (1, 2) if det1 else (1, 1)
    return (0, grp.rank_mod(blk[1], q))


def mackey_orbits(rep: rp.MonomialRep, deltas: dict, limit=grp.DEFAULT_BUDGET):
    """Coset reps of G/H grouped by the P-orbit of delta H, found by search."""
    q = rep.q
    h = rep.inducing
    p = grp.catalog("P", q)
    out = {}
    seen = {}
    total = 0
    for name, d in deltas.items():
        seeds = mx.mul(d[None], rep.inner, q)
        reps, lookup = grp.coset_bfs(p.generators, seeds, h, limit=limit)
        for key in lookup:
            if key in seen:
                raise grp.FingerprintUnsound(f"orbits of {seen[key]} and {name} overlap")
            seen[key] = name
        out[name] = reps
        total += len(reps)
    if total != rep.dim:
        raise grp.OrderMismatch(f"orbits cover {total} cosets, expected {rep.dim}")
    return out


def _group_by_flag(xs, q, k):
    """Split x = r y with r the canonical flag representative of xP (or xQ)."""
    r = flag_reps(np.ascontiguousarray(xs), q, k)
    codes = [tuple(row) for row in mx.pack(r, q).tolist()]
    uniq = {}
    x_r = np.array([uniq.setdefault(c, len(uniq)) for c in codes], dtype=np.int64)
    rs = np.zeros((len(uniq), 2, 4, 4), dtype=np.int64)
    rs[x_r] = r
    order = np.argsort(x_r, kind="stable")
    ys = mx.mul(mx.inv(r, q), xs, q)
    return rs, x_r[order], ys[order]


def jacquet_pieces(rep: rp.MonomialRep, psi0=None, classes=None) -> JacquetResult:
    q = rep.q
    psi0 = psi0 or ch.AdditiveChar(q)
    t0 = time.perf_counter()
    classes = classes or rp.gl2_classes(q)
    st = setup(rep, psi0)
    deltas = p_deltas(q) if st.kind == 0 else q_deltas(q)
    orbits = mackey_orbits(rep, deltas)
    k = 2 if st.kind == 0 else 3
    pieces = {}
    total = None
    sizes = {}
    for name, xs in orbits.items():
        rs, x_r, ys = _group_by_flag(xs, q, k)
        x_y = np.arange(len(ys))
        accs, _, _ = _run_fast(st, classes, rs, mx.inv(rs, q), ys, mx.inv(ys, q), x_r, x_y,
                               cache_dir=False)
        res = _finish(rep, classes, accs, "pieces", t0)
        pieces[name] = res.values
        sizes[name] = len(xs)
        total = res.values if total is None else total + res.values
    return JacquetResult(rep, total, "pieces", pieces, time.perf_counter() - t0,
                         {"orbit_sizes": sizes})


def multiplicity(result: JacquetResult | rp.ClassFunction, sigma) -> int:
    values = result.values if isinstance(result, JacquetResult) else result
    if isinstance(sigma, rp.MonomialRep):
        sigma = rp.class_function_of(sigma, values.classes)
    return rp.inner_product(values, sigma)


def gamma_count_delta6(q):
    """|N \\ P / P_{delta6}| with P_{delta6} = delta6 P delta6^-1 cap P."""
    p = grp.catalog("P", q)
    d6 = p_deltas(q)["delta6"]
    # P-orbit of delta6 P in G/P
    reps, _ = grp.coset_bfs(p.generators, d6[None], p)
    orbit = len(reps)
    ns, _ = n_elements(q)
    d6inv = mx.inv(d6, q)
    stab = int(p.member(mx.mul(mx.mul(d6inv[None], ns, q), d6[None], q)).sum())
    # |N\P/P_d| = |P| / (|N| |P_d| / |N cap P_d|) = orbit * |N cap P_d| / |N|
    num = orbit * stab
    if num % q**8:
        raise grp.OrderMismatch("double coset count is not integral")
    return num // q**8
