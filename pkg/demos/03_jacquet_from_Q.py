"""The twisted Jacquet module of Ind_Q(rho x chi) at q = 3.

rho is a strongly cuspidal representation of GL_3(o2) built from a regular
elliptic cubic C.  The module is computed by the brute projector and by the
affine-fiber path, then split into regular irreducibles of GL_2(o2).
Takes a few minutes on one core.
"""
from jacquet_o2 import characters as ch
from jacquet_o2 import harness as hs
from jacquet_o2 import jacquet as jq
from jacquet_o2 import representations as rp

q = 3
s = hs.Session(q)
rep = s.q_rep("base")
print(f"Ind_Q(rho x chi): dim {rep.dim}, rho of dim {s.q_input('base')[0].dim}")

# %% Two evaluation paths
brute = jq.jacquet_brute(rep, s.psi0, classes=s.classes)
fast = jq.jacquet_fast(rep, s.psi0, s.classes, s.cache_dir)
print(f"brute: dim {brute.dim()} in {brute.seconds:.0f} s")
print(f"fast:  dim {fast.dim()} in {fast.seconds:.0f} s")
print(f"paths agree exactly: {brute.values == fast.values}")

# %% Decomposition against Ind_{Z J^1}(omega phi_B) over the trace-2m0 classes
omega = s.omega_pi_Q("base")
m0 = ch.solve_m0(omega, s.psi0).value
bs = ch.regular_classes(q, trace=2 * m0)
summands = [rp.class_function_of(rp.ind_ZJ1(omega, b.matrix, s.psi0), s.classes) for b in bs]
total = summands[0]
for f in summands[1:]:
    total = total + f
print(f"\nm0 = {m0}; classes {[b.family for b in bs]}")
print(f"equals the sum of Ind_ZJ1 over them: {fast.values == total}")
norm = rp.inner_product(fast.values, fast.values)
print(f"<chi, chi> = {norm}, the sum of squared multiplicities")
