"""Exact polynomial networks and a sign-pattern check."""
# %%
from gc2gnn.compile import certify, realize_polynomial
from gc2gnn.harness import corrected_polynomial, quartic_polynomial, sign_check
from gc2gnn.numeric import Poly

# X^2 - X from the squaring activation: one hidden layer, two units.
target = Poly([0, -1, 1])
net = realize_polynomial(Poly([0, 0, 1]), target)
print("shifts:", net.shifts, "weights:", [str(w) for w in net.out_weights], "bias:", net.out_bias)
print("certified:", certify(net, target))

# %% Degree 8 needs three squaring layers.
p8 = Poly([1, 0, -3, 0, 0, 0, 0, 2, 5])
net8 = realize_polynomial(Poly([0, 0, 1]), p8)
print("depth", net8.depth, "widths", net8.widths, "certified", certify(net8, p8))

# %% 1 - sum x^2 (x - 1)^2 is 1 on the 0/1 cube and <= -3 elsewhere.
print("corrected:", sign_check(corrected_polynomial(3), 3, 5, 1))
w = sign_check(quartic_polynomial(3), 3, 5, 1)
print("1 - sum x^2 + sum x^4 breaks at", w.point, "with value", w.value)
