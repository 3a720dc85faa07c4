"""Regular characters of GL_2(o2) at q = 3.

Each regular residue class B gives extensions of phi_B to its inertia group;
inducing them gives irreducible characters.  This script checks irreducibility,
counts extensions per family, and decomposes Ind_{Z J^1}(omega phi_B).
"""
from jacquet_o2 import characters as ch
from jacquet_o2 import representations as rp

q = 3
psi0 = ch.AdditiveChar(q)
classes = rp.gl2_classes(q)
print(f"GL_2(o2) at q = {q}: order {classes.group.order}, {len(classes)} conjugacy classes")

# %% One irreducible per family
for fam in ("X1", "X2", "X3"):
    b = next(c for c in ch.regular_classes(q) if c.family == fam)
    _, exts = rp.inertia_extensions(b.matrix, q, psi0)
    f = rp.class_function_of(rp.regular_gl2(b, 0, psi0), classes)
    print(f"{fam} B={b.matrix.tolist()}: {len(exts)} extensions, dim {f.dim()}, "
          f"<chi,chi> = {rp.inner_product(f, f)}")

# %% Sum of squared dimensions over all regular irreducibles
regular = [rp.class_function_of(rp.regular_gl2(b, j, psi0), classes)
           for b in ch.regular_classes(q)
           for j in range(len(rp.inertia_extensions(b.matrix, q, psi0)[1]))]
print(f"\n{len(regular)} regular irreducibles, sum of dim^2 = {sum(f.dim()**2 for f in regular)}")

# %% Ind_{Z J^1}(omega phi_B) splits into the regular characters above it
omega = ch.unit_char(q, 0, 0)
for fam in ("X1", "X2", "X3"):
    b = next(c for c in ch.regular_classes(q, trace=0) if c.family == fam)
    ind = rp.class_function_of(rp.ind_ZJ1(omega, b.matrix, psi0), classes)
    mults = [rp.inner_product(ind, f) for f in regular]
    print(f"Ind_ZJ1 over {fam}: dim {ind.dim()}, {sum(1 for m in mults if m)} constituents, "
          f"max multiplicity {max(mults)}")
