"""Double cosets of GL_4(o2) at q = 3.

Builds the transversals of G/P and G/Q, splits them into P-orbits, and shows
which named representative lands in which orbit.
"""
import numpy as np

from jacquet_o2 import groups as grp
from jacquet_o2 import jacquet as jq
from jacquet_o2 import representations as rp

q = 3
G, P, Q = (grp.catalog(name, q) for name in ("GL4", "P", "Q"))
print(f"|GL_4(o2)| = {G.order}, |P| = {P.order}, |Q| = {Q.order}")

# %% P \ G / P: six orbits, told apart by the Smith type of the lower-left block
tP = rp.parabolic_transversal("P", q)
orbits, labels, _ = grp.double_cosets(P, G, P, trans=tP)
print(f"\n[G:P] = {tP.index}, {len(orbits)} double cosets, sizes {[s for _, s in orbits]}")
for name, d in jq.p_deltas(q).items():
    print(f"  {name}: orbit {labels[tP.locate(d[None])[0]]}, smith type {jq.smith_type(d, q)}")

# %% P \ G / Q: three orbits
tQ = rp.parabolic_transversal("Q", q)
orbits, labels, _ = grp.double_cosets(P, G, Q, trans=tQ)
print(f"\n[G:Q] = {tQ.index}, {len(orbits)} double cosets, sizes {[s for _, s in orbits]}")
for name, d in jq.q_deltas(q).items():
    print(f"  {name}: orbit {labels[tQ.locate(d[None])[0]]}")
