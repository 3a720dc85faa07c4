"""Command line entry point: verify, cosets, inspect."""
from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import cache as _cache
from . import characters as ch
from . import groups as grp
from . import harness as hs
from . import jacquet as jq
from . import representations as rp
from .local_ring import SUPPORTED_Q, EmbeddingParams


def _cache_dir(value):
    return value if value else _cache.default_cache_dir()


@click.group()
def main():
    """Exact verification of twisted Jacquet modules over o2 = F_q[w]/(w^2)."""


@main.command()
@click.option("--profile", type=click.Choice(list(hs.PROFILES)), default="paper-q3",
              show_default=True)
@click.option("--q", "q", type=click.Choice([str(x) for x in SUPPORTED_Q]), default=None,
              help="Override the profile's q.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None,
              help=f"Transversal and fiber cache (default: ${_cache.ENV_VAR}).")
@click.option("--format", "fmt", type=click.Choice(["json", "markdown"]), default="json",
              show_default=True)
@click.option("--check", "checks", default=None, help="Comma-separated check ids.")
@click.option("--output", type=click.Path(dir_okay=False), default=None,
              help="Write the report here instead of stdout.")
@click.option("--quiet", is_flag=True, help="No per-check progress on stderr.")
def verify(profile, q, jobs, cache_dir, fmt, checks, output, quiet):
    """Run registered checks and emit a report; exit 1 if any check fails."""
    ids = [c.strip() for c in checks.split(",") if c.strip()] if checks else None
    try:
        hs.select(profile, ids, int(q) if q else None)
    except hs.UnknownCheck as e:
        raise click.UsageError(f"unknown check {e.args[0]!r}")

    def progress(r):
        if not quiet:
            click.echo(f"{r.status.upper():7s} {r.id} ({r.wall_time:.1f} s)", err=True)

    suite = hs.run_suite(profile, jobs, _cache_dir(cache_dir), ids, int(q) if q else None,
                         progress)
    data = hs.emit_report(suite, fmt)
    if output:
        with open(output, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
    summary = suite.summary()
    click.echo(f"pass {summary['pass']}, fail {summary['fail']}, "
               f"skipped {summary['skipped']} in {summary['total_seconds']:.1f} s", err=True)
    sys.exit(1 if suite.failed else 0)


@main.command()
@click.option("--pair", type=click.Choice(["PGP", "PGQ"]), required=True)
@click.option("--q", "q", type=click.Choice([str(x) for x in SUPPORTED_Q]), default="3",
              show_default=True)
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None)
def cosets(pair, q, cache_dir):
    """Double cosets P\\GL_4(o2)/P or P\\GL_4(o2)/Q with orbit sizes."""
    q = int(q)
    kind = "P" if pair == "PGP" else "Q"
    g, p = grp.catalog("GL4", q), grp.catalog("P", q)
    t = rp.parabolic_transversal(kind, q, _cache_dir(cache_dir))
    orbits, labels, _ = grp.double_cosets(p, g, grp.catalog(kind, q), trans=t)
    deltas = jq.p_deltas(q) if kind == "P" else jq.q_deltas(q)
    where = {name: int(labels[t.locate(d[None])[0]]) for name, d in deltas.items()}
    sizes = {}
    for i, lab in enumerate(labels.tolist()):
        sizes.setdefault(lab, 0)
        sizes[lab] += 1
    doc = {"pair": pair, "q": q, "cosets": t.index, "double_cosets": len(orbits),
           "representatives": {name: {"orbit": lab, "orbit_size": sizes[lab]}
                               for name, lab in where.items()}}
    click.echo(json.dumps(doc, indent=2))


REP_NAMES = ("regular-X1", "regular-X2", "regular-X3", "cuspidal-gl3", "principal-series",
             "ind-P", "ind-Q")


def _build(name, q, cache_dir):
    psi0 = ch.AdditiveChar(q)
    if name.startswith("regular-"):
        fam = name.split("-")[1]
        b = next(c for c in ch.regular_classes(q) if c.family == fam)
        return rp.regular_gl2(b, 0, psi0)
    if name == "principal-series":
        return rp.principal_series(ch.unit_char(q, 0, 0), ch.unit_char(q, 0, 1))
    s = hs.Session(q, 1, cache_dir)
    if name == "cuspidal-gl3":
        return s.q_input("base")[0]
    if name == "ind-P":
        return s.p_rep("distinct")
    return s.q_rep("base")


@main.command()
@click.option("--rep", "name", type=click.Choice(REP_NAMES), required=True)
@click.option("--q", "q", type=click.Choice([str(x) for x in SUPPORTED_Q]), default="3",
              show_default=True)
@click.option("--cache-dir", type=click.Path(file_okay=False), default=None)
def inspect(name, q, cache_dir):
    """Dimension, central character and transversal size of a named representation."""
    q = int(q)
    rep = _build(name, q, _cache_dir(cache_dir))
    units = ch.units_of_o2(q)
    try:
        w = rp.central_character(rep).exponents(units)
        central = {f"{int(u[0, 0, 0])}+w{int(u[1, 0, 0])}": f"zeta_{rep.m}^{int(e)}"
                   for u, e in zip(units, w)}
    except rp.CentralNotInside:
        central = None
    doc = {"rep": name, "label": rep.label, "q": q, "dim": rep.dim,
           "ambient": rep.ambient.name, "inducing": rep.inducing.name,
           "inducing_order": rep.inducing.order,
           "transversal_size": rep.outer.index if rep.inner is None
           else [rep.outer.index, len(rep.inner)],
           "central_character": central}
    if "B" in rep.parts:
        doc["B"] = np.asarray(rep.parts["B"]).tolist()
    click.echo(json.dumps(doc, indent=2))


if __name__ == "__main__":
    main()
