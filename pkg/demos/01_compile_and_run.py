"""Compile a counting query into a ReLU network and watch it run."""
# %%
from gc2gnn import graph
from gc2gnn.candidates import red_blue_query
from gc2gnn.compile import compile_gc2_relu
from gc2gnn.formula import desugar, subformulas
from gc2gnn.gnn import run
from gc2gnn.parser import render
from gc2gnn.semantics import eval_all

query = red_blue_query()
print("query:", render(query))
for i, q in enumerate(subformulas(desugar(query)), start=1):
    print(f"  Q{i} = {render(q)}")

# %% One recurrent layer; each row updates one subformula coordinate.
model = compile_gc2_relu(desugar(query), num_colors=2)
layer = model.layers[0]
for label, M in (("A", layer.A), ("B", layer.B)):
    print(label)
    for row in M:
        print("  ", [int(x) for x in row])
print("c  ", [int(x) for x in layer.c])

# %% A red vertex (colour 1) joined to a blue one (colour 2).
g = graph.LabeledGraph.from_edges([1, 2], [(0, 1)], 2)
for t, X in enumerate(run(model, g)):
    print(f"t={t}", [[int(x) for x in row] for row in X])
print("oracle:", [int(b) for b in eval_all(query, g)])

# %% On a random graph the last coordinate matches the logic.
h = graph.gen_random(12, 2, 0.3, seed=5)
final = run(model, h)[-1][:, model.output_coord]
print("gnn   :", [int(x) for x in final])
print("oracle:", [int(b) for b in eval_all(query, h)])
