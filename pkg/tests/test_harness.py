import json

import pytest
from click.testing import CliRunner

from jacquet_o2 import harness as hs
from jacquet_o2.cli import main


def test_registry_ids_and_dependencies():
    ids = list(hs.REGISTRY)
    assert len(ids) == len(set(ids))
    order = hs._topological(set(ids))
    pos = {i: k for k, i in enumerate(order)}
    for spec in hs.REGISTRY.values():
        for d in spec.depends_on:
            assert pos[d] < pos[spec.id]
    required = {"prelim_gl_orders", "prelim_pn1_factorization", "prelim_borel_cosets",
                "prelim_ps_components", "prelim_btilde_split", "prelim_thm22_irred",
                "prelim_whittaker_unique", "double_cosets_PGP", "double_cosets_PGQ",
                "gamma_count_delta6", "deltas_vanish_P", "delta4_iso", "delta5_dim",
                "delta5_iso", "delta6_dim", "delta6_mult", "delta6_iso", "thm_indP_full",
                "deltas_vanish_Q", "dim_24coset", "mult_X1", "mult_X2", "mult_X3",
                "thm_indQ_full", "cor_multfree", "cor_central_indep", "path_agreement",
                "exploratory_equal_trace"}
    assert required <= set(ids)


def test_run_check_errors():
    with pytest.raises(hs.UnknownCheck):
        hs.run_check("no_such_check", 3)
    with pytest.raises(hs.UnsupportedQ):
        hs.run_check("thm_indQ_full", 5)


def test_empty_report_is_valid():
    doc = json.loads(hs.emit_report([], "json", q=3))
    assert doc == {"schema_version": hs.SCHEMA_VERSION, "q": 3, "checks": []}
    assert hs.emit_report([], "markdown", q=3).startswith(b"# Verification report")


def test_single_pass_report(session3):
    r = hs.run_check("double_cosets_PGQ", 3, session=session3)
    assert r.status == "pass"
    doc = json.loads(hs.emit_report([r], "json", q=3))
    entry = doc["checks"][0]
    assert entry["status"] == "pass" and entry["id"] == "double_cosets_PGQ"
    assert entry["computed"]["orbits"] == 3 and isinstance(entry["computed"]["orbits"], int)
    assert set(entry) >= {"id", "claim_quote", "status", "computed", "expected",
                          "wall_time_ms"}


def test_rerun_is_byte_identical(session3):
    a = hs.run_check("gamma_count_delta6", 3, session=session3)
    b = hs.run_check("gamma_count_delta6", 3, session=session3)
    a.wall_time = b.wall_time = 0.0
    assert hs.emit_report([a], "json", q=3) == hs.emit_report([b], "json", q=3)


def test_mixed_exit_status_independent_of_format():
    ok = hs.CheckReport("a", 3, "pass", 1, 1)
    bad = hs.CheckReport("b", 3, "fail", 1, 2)
    suite = hs.Suite(3, [ok, bad], 0.0)
    assert suite.failed
    for fmt in ("json", "markdown"):
        assert hs.emit_report(suite, fmt)


def test_extended_profile_skips_jacquet_checks():
    q, run, skipped = hs.select("extended-q5")
    assert q == 5
    assert "double_cosets_PGP" in run and "prelim_ps_components" in run
    assert "thm_indQ_full" in skipped and "path_agreement" in skipped


def test_smoke_profile(cache_dir):
    suite = hs.run_suite("smoke", cache_dir=cache_dir)
    assert suite.reports and all(r.status == "pass" for r in suite.reports)
    assert all(hs.REGISTRY[r.id].cost_class == hs.Cost.INSTANT for r in suite.reports)


def test_cli_usage_errors():
    runner = CliRunner()
    assert runner.invoke(main, ["verify", "--check", "bogus"]).exit_code == 2
    assert runner.invoke(main, ["verify", "--profile", "nope"]).exit_code == 2
    assert runner.invoke(main, ["cosets", "--pair", "QGQ"]).exit_code == 2


def test_cli_verify_single_check(cache_dir):
    runner = CliRunner()
    res = runner.invoke(main, ["verify", "--check", "prelim_borel_cosets", "--cache-dir",
                               cache_dir, "--quiet"])
    assert res.exit_code == 0, res.output
    doc = json.loads(res.stdout)
    assert [c["status"] for c in doc["checks"]] == ["pass"]


def test_cli_cosets_and_inspect(cache_dir):
    runner = CliRunner()
    res = runner.invoke(main, ["cosets", "--pair", "PGQ", "--q", "3", "--cache-dir", cache_dir])
    assert res.exit_code == 0
    doc = json.loads(res.stdout)
    assert doc["double_cosets"] == 3 and doc["cosets"] == 1080
    res = runner.invoke(main, ["inspect", "--rep", "regular-X1", "--q", "3"])
    assert res.exit_code == 0
    doc = json.loads(res.stdout)
    assert doc["dim"] == 6 and doc["transversal_size"] == 6
