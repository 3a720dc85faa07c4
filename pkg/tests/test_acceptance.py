"""Acceptance criteria 1-6, one printed PASS/FAIL line each (run with -s to see them).

Every comparison is exact equality of integers or cyclotomic values.
"""
import subprocess
import sys
import time
from pathlib import Path

import pytest

from jacquet_o2 import harness as hs
from jacquet_o2 import representations as rp

ROOT = Path(__file__).resolve().parents[1]


def _report(n, title, ok, detail=""):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {title}" + (f" ({detail})" if detail
                                                                      else ""))


def _run(ids, q, session):
    reports = {i: hs.run_check(i, q, session=session) for i in ids}
    bad = {i: (r.computed, r.expected) for i, r in reports.items() if r.status != "pass"}
    return reports, bad


def test_criterion_1_double_cosets(session3):
    reports, bad = _run(["double_cosets_PGP", "double_cosets_PGQ"], 3, session3)
    pgp = reports["double_cosets_PGP"].computed
    pgq = reports["double_cosets_PGQ"].computed
    _report(1, "|P\\G/P| = 6 with delta_1..6 distinct; |P\\G/Q| = 3 with I4, Iw, (24)",
            not bad, f"{pgp['orbits']} and {pgq['orbits']} double cosets")
    assert not bad, bad


@pytest.mark.slow
def test_criterion_2_preliminaries(session3):
    ids = ["prelim_ps_components", "prelim_btilde_split", "prelim_thm22_irred",
           "prelim_whittaker_unique"]
    _, bad3 = _run(ids, 3, session3)
    _, bad5 = _run(ids, 5, hs.Session(5, 1, session3.cache_dir))
    ok = not bad3 and not bad5
    _report(2, "principal series 1/2/3 split and component dims, preimage-Borel split, "
               "regular irreducibility, Whittaker dimension 1 at q = 3 and 5", ok)
    assert ok, (bad3, bad5)


@pytest.mark.slow
def test_criterion_3_induction_from_P(session3):
    ids = ["deltas_vanish_P", "delta4_iso", "delta5_dim", "delta5_iso", "delta6_dim",
           "delta6_mult", "delta6_iso", "thm_indP_full"]
    reports, bad = _run(ids, 3, session3)
    dim = reports["thm_indP_full"].computed["dim"]
    _report(3, "delta_1..3 vanish, delta_4 = pi1 x pi2, delta_5 = I(omega1, omega2) of dim 12, "
               "delta_6 = Ind_ZJ1(omega phi_B) of dim 24, total of dim 72", not bad,
            f"total dim {dim}")
    assert not bad, bad


@pytest.mark.slow
def test_criterion_4_induction_from_Q(session3):
    ids = ["deltas_vanish_Q", "dim_24coset", "thm_indQ_full", "cor_central_indep"]
    reports, bad = _run(ids, 3, session3)
    # the full decomposition for the second input with the same central character
    total = session3.jacquet("Q", "same_central", "fast").values
    _, fs = hs._indQ_rhs(session3, "same_central")
    rhs = fs[0]
    for f in fs[1:]:
        rhs = rhs + f
    if total != rhs or len(fs) != 3:
        bad["second_input_decomposition"] = (len(fs), 3)
    _report(4, "I4 and Iw pieces vanish, (24) piece of dim 72, sum over the 3 trace-2m0 "
               "classes for two inputs, equal central characters give equal modules", not bad)
    assert not bad, bad


@pytest.mark.slow
@pytest.mark.xfail(strict=True, reason="<chi, chi> is q^2 = 9: the q trace-2m0 summands "
                   "have q+1, q and q-1 constituents; q(q-1) = 6 is not attained")
def test_criterion_4_self_inner_product(session3):
    q = 3
    total = session3.jacquet("Q", "base", "fast").values
    norm = rp.inner_product(total, total)
    ok = norm == q * (q - 1)
    _report(4, "<chi, chi> = q(q-1) = 6", ok, f"computed {norm}")
    assert ok


@pytest.mark.slow
def test_criterion_5_path_agreement(session3):
    report = hs.run_check("path_agreement", 3, session=session3)
    ok = report.status == "pass"
    _report(5, "brute, affine-fiber and Mackey-piece class functions agree exactly", ok,
            str(report.path_agreement))
    assert ok, report.computed


@pytest.mark.slow
def test_criterion_6_property_suites():
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-m", "property",
                           "-p", "no:cacheprovider", str(ROOT / "tests")],
                          capture_output=True, text=True, cwd=ROOT)
    seconds = time.perf_counter() - t0
    ok = proc.returncode == 0 and seconds < 300
    _report(6, "property suites run standalone in under 5 minutes", ok,
            f"{seconds:.0f} s, exit {proc.returncode}")
    assert ok, proc.stdout[-2000:]
