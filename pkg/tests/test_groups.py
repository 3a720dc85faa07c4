import numpy as np
import pytest

from jacquet_o2 import cache, groups as grp, matrices as mx
from jacquet_o2.local_ring import O2Elem


def _random_elements(spec, k, seed):
    """Random words in the generators (products of 12 generators each)."""
    rng = np.random.default_rng(seed)
    out = mx.identity(spec.n, (k,))
    for _ in range(12):
        pick = spec.generators[rng.integers(len(spec.generators), size=k)]
        out = mx.mul(out, pick, spec.q)
    return out


@pytest.mark.parametrize("name,q,order", [
    ("GL1", 3, 6), ("GL2", 3, 3888), ("Borel2", 3, 324), ("BorelTilde2", 3, 972),
    ("Z", 3, 6), ("J1_2", 3, 81), ("ZJ1_2", 3, 162), ("N", 3, 6561),
    ("GL2", 5, 300000), ("Borel2", 5, 10000),
])
def test_enumerated_orders(name, q, order):
    spec = grp.catalog(name, q)
    assert spec.order == order
    assert len(grp.enumerate_group(spec)) == order


def test_closed_form_orders():
    assert grp.gl_order(4, 3) == 3**16 * 24261120
    assert grp.gaussian_binomial(4, 2, 3) == 130
    assert grp.catalog("P", 3).order == 3888**2 * 3**8
    assert grp.catalog("Q", 3).order == grp.gl_order(3, 3) * 6 * 3**6


def test_conjugacy_class_counts_q3():
    cl = grp.conjugacy_classes(grp.catalog("GL2", 3))
    assert len(cl) == 78
    assert cl.sizes.sum() == 3888


@pytest.mark.slow
def test_conjugacy_class_counts_q5():
    cl = grp.conjugacy_classes(grp.catalog("GL2", 5))
    assert len(cl) == 620


def test_members_of_generated_subgroups():
    q = 3
    for name in ("P", "Q", "N", "U", "Borel2", "BorelTilde2", "ZJ1_2", "DeltaGL2_N"):
        spec = grp.catalog(name, q)
        assert spec.member(spec.generators).all(), name
        assert spec.member(_random_elements(spec, 50, 1)).all(), name


@pytest.mark.property
def test_fingerprint_soundness():
    """Right multiplication by H preserves the key; equal keys mean one coset."""
    q = 3
    g = grp.catalog("GL4", q)
    for name in ("P", "Q"):
        h = grp.catalog(name, q)
        xs = _random_elements(g, 300, 2)
        hs = _random_elements(h, 300, 3)
        assert h.keys(xs) == h.keys(mx.mul(xs, hs, q))
        keys = h.keys(xs)
        xi = mx.inv(xs, q)
        for i in range(0, 300, 7):
            for j in range(i + 1, 300, 11):
                same = h.member(mx.mul(xi[i], xs[j], q)[None])[0]
                assert same == (keys[i] == keys[j])


def test_borel_double_cosets():
    q = 3
    g, b = grp.catalog("GL2", q), grp.catalog("Borel2", q)
    orbits, labels, t = grp.double_cosets(b, g, b, cache_dir=False)
    assert len(orbits) == 3 and t.index == q * q + q
    reps = [mx.identity(2), mx.permutation([1, 0]),
            mx.from_o2([[1, 0], [O2Elem(0, 1, q), 1]], q)]
    assert len({int(labels[t.locate(r[None])[0]]) for r in reps}) == 3


def test_transversal_cache_roundtrip(tmp_path):
    q = 3
    g, h = grp.catalog("GL4", q), grp.catalog("Q", q)
    t1 = grp.transversal(g, h, cache_dir=tmp_path)
    files = list(tmp_path.iterdir())
    assert len(files) == 1
    t2 = grp.transversal(g, h, cache_dir=tmp_path)
    assert (t1.reps == t2.reps).all()
    # corruption is a miss, not an error
    raw = bytearray(files[0].read_bytes())
    raw[40] ^= 0xFF
    files[0].write_bytes(bytes(raw))
    t3 = grp.transversal(g, h, cache_dir=tmp_path)
    assert (t1.reps == t3.reps).all()


def test_cache_header_mismatch(tmp_path):
    words = np.arange(10, dtype=np.int64).reshape(5, 2)
    p = tmp_path / "x.bin"
    cache.write(p, 3, 4, "G/H", "abc", words)
    assert (cache.read(p, 3, 4, "G/H", "abc") == words).all()
    assert cache.read(p, 5, 4, "G/H", "abc") is None
    assert cache.read(p, 3, 4, "G/H", "abd") is None
    assert cache.read(tmp_path / "missing.bin", 3, 4, "G/H", "abc") is None


def test_budget_refusal():
    with pytest.raises(grp.BudgetExceeded):
        grp.transversal(grp.catalog("GL4", 3), grp.catalog("P", 3), budget=100,
                        cache_dir=False)


def test_inertia_orders():
    q = 3
    from jacquet_o2 import characters as ch
    for b in ch.regular_classes(q):
        spec = grp.inertia(b.matrix, q)
        expected = {"X1": q * q - 1, "X2": q * (q - 1), "X3": (q - 1) ** 2}[b.family] * q**4
        assert spec.order == expected
        assert len(grp.enumerate_group(spec)) == expected


def test_inertia_rejects_scalars():
    with pytest.raises(ValueError):
        grp.inertia(np.eye(2, dtype=np.int64), 3)


@pytest.mark.property
@pytest.mark.parametrize("kind", ["Q", "P"])
def test_transversal_order_independence(kind):
    """Shuffled generators give the same partition of GL_4(o2) into cosets."""
    q = 3
    g, h = grp.catalog("GL4", q), grp.catalog(kind, q)
    t1 = grp.transversal(g, h, cache_dir=False)
    rng = np.random.default_rng(11)
    gens = g.generators[rng.permutation(len(g.generators))]
    reps2, _ = grp.coset_bfs(gens, mx.identity(4)[None], h, limit=t1.index)
    assert len(reps2) == t1.index
    pos = t1.locate(reps2)
    assert sorted(pos.tolist()) == list(range(t1.index))
    # exact membership confirms each match, on a sample of 10^3 pairs
    pick = rng.choice(t1.index, size=min(1000, t1.index), replace=False)
    a = mx.inv(t1.reps[pos[pick]], q)
    assert h.member(mx.mul(a, reps2[pick], q)).all()
    other = (pos[pick] + 1) % t1.index
    assert not h.member(mx.mul(mx.inv(t1.reps[other], q), reps2[pick], q)).any()


@pytest.mark.property
def test_orbit_sizes_divide_and_agree():
    """P-orbits on G/P: sizes divide |P|, sum to the index and match a BFS from delta."""
    from jacquet_o2 import jacquet as jq

    q = 3
    g, p = grp.catalog("GL4", q), grp.catalog("P", q)
    orbits, labels, t = grp.double_cosets(p, g, p)
    sizes = np.bincount(labels)
    assert sizes.sum() == t.index
    assert all(p.order % int(sz) == 0 for sz in sizes)
    for d in jq.p_deltas(q).values():
        reps, _ = grp.orbit_of(p.generators, d, p)
        assert len(reps) == sizes[labels[t.locate(d[None])[0]]]
