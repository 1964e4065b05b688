"""Colour refinement on the tree T[1, 2] and why every GNN is at most this fine."""
# %%
from gc2gnn.candidates import BUILDERS
from gc2gnn.gnn import run
from gc2gnn.graph import gen_random, gen_tree
from gc2gnn.refine import color_refine, refinement_violation

tree = gen_tree([1, 2])
trace = color_refine(tree)
for t in range(len(trace.rounds)):
    print(f"round {t}: {trace.partition(t)}")
print("stable from round", trace.stable_round)

# %% The two leaves under x_2 are never told apart, and neither is any GNN.
model = BUILDERS["rational_inv"]()
X = run(model, tree)[-1]
print("leaf states equal:", list(X[4]) == list(X[5]))

# %% Spot check on random pairs: equal colours imply equal embeddings.
found = 0
for seed in range(30):
    pair = [gen_random(8, 1, 0.35, seed=2 * seed), gen_random(8, 1, 0.35, seed=2 * seed + 1)]
    for t in range(model.iterations + 1):
        found += refinement_violation(pair, lambda g, t=t: run(model, g, iterations=t)[t], t) is not None
print("violations:", found)
