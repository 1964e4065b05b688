"""The tree family T[k]: a ReLU network keeps its margin, rational candidates lose it.

The query holds at the root of T[k] exactly when every k_i >= 1.
"""
# %%
from gc2gnn.candidates import BUILDERS, q2
from gc2gnn.harness import box_margin, curve_sweep, degree_bound

relu = BUILDERS["q2_relu"]()
rep = box_margin(relu, q2(), 3, 12)
print("ReLU:", rep.verdict, rep.interior_min, rep.boundary_max)
print("     ", rep.note)

# %% Rational and polynomial candidates, same box.
for name in ("rational_sq", "rational_inv", "poly_q2"):
    r = box_margin(BUILDERS[name](), q2(), 3, 12)
    print(f"{name:13s} {r.verdict}  interior_min={r.interior_min}  first witness={r.witnesses[0]['k']}")

# %% rational_sq is fine at widths 1 and 2 and breaks at width 3.
for m in range(1, 5):
    r = box_margin(BUILDERS["rational_sq"](), q2(), m, 6)
    print(f"m={m}: {r.verdict} interior_min={r.interior_min}")

# %% Along k = (t, t, t) versus (t, t, 0) the ReLU gap never shrinks.
curve = curve_sweep(relu, 3, (1, 1, 1), range(1, 11))
print("ReLU gaps:", [int(d) for d in curve.differences()])
curve = curve_sweep(BUILDERS["rational_sq"](), 3, (1, 1, 1), range(1, 11))
print("rational_sq gaps:", [f"{float(d):.3f}" for d in curve.differences()])

# %% Degree in k_1 of the root output, by iteration.
print([degree_bound(BUILDERS["rational_sq"](), t, width=3).numerator for t in range(4)])
