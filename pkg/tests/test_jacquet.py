import numpy as np
import pytest

from jacquet_o2 import characters as ch, groups as grp, jacquet as jq, matrices as mx


def test_n_elements_and_psi():
    q = 3
    ns, coords = jq.n_elements(q)
    assert len(ns) == q**8
    assert grp.catalog("N", q).member(ns).all()
    psi = ch.psi_N(ch.AdditiveChar(q))
    # psi is a character of the abelian group N
    rng = np.random.default_rng(0)
    i, j = rng.integers(len(ns), size=(2, 50))
    prod = mx.mul(ns[i], ns[j], q)
    assert ((psi.exponents(ns[i]) + psi.exponents(ns[j])) % psi.m
            == psi.exponents(prod)).all()


def test_psi_stable_under_delta_gl2():
    jq.check_psi_stable(ch.AdditiveChar(3))


def test_p_deltas_distinct_smith_types():
    q = 3
    types = {name: jq.smith_type(d, q) for name, d in jq.p_deltas(q).items()}
    assert types == {"delta1": (0, 0), "delta2": (0, 1), "delta3": (0, 2),
                     "delta4": (2, 2), "delta5": (1, 1), "delta6": (1, 2)}


def test_smith_type_is_double_coset_invariant():
    q = 3
    p = grp.catalog("P", q)
    rng = np.random.default_rng(1)
    for name, d in jq.p_deltas(q).items():
        for _ in range(20):
            a = mx.identity(4)
            b = mx.identity(4)
            for _ in range(8):
                a = mx.mul(a, p.generators[rng.integers(len(p.generators))], q)
                b = mx.mul(b, p.generators[rng.integers(len(p.generators))], q)
            assert jq.smith_type(mx.mul(mx.mul(a, d, q), b, q), q) == jq.smith_type(d, q)


def test_gamma_count_q3():
    assert jq.gamma_count_delta6(3) == 32


def test_q_deltas_in_q_double_cosets():
    q = 3
    g, p, qq = grp.catalog("GL4", q), grp.catalog("P", q), grp.catalog("Q", q)
    orbits, labels, t = grp.double_cosets(p, g, qq, cache_dir=False)
    assert len(orbits) == 3
    hit = {int(labels[t.locate(d[None])[0]]) for d in jq.q_deltas(q).values()}
    assert len(hit) == 3


def test_brute_cost_ceiling(session3):
    rep = session3.q_rep("base")
    assert jq.brute_cost(rep) < jq.BRUTE_CEILING
    with pytest.raises(grp.BudgetExceeded):
        jq.jacquet_brute(rep, session3.psi0, ceiling=10)


def test_fiber_cache_key_separates_character_tables(session3):
    # "distinct" and "equal" share H and B_1 and differ only in the character on block 2
    keys = {}
    for name in ("distinct", "equal", "distinct"):
        rep = session3.p_rep(name)
        st = jq.setup(rep, session3.psi0)
        x_r = np.repeat(np.arange(rep.outer.index), len(rep.inner))
        x_y = np.tile(np.arange(len(rep.inner)), rep.outer.index)
        keys.setdefault(name, set()).add(jq._fiber_key(st, rep.outer.reps, rep.inner, x_r, x_y))
    assert len(keys["distinct"]) == 1
    assert keys["distinct"] != keys["equal"]
