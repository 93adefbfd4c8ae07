# ---
# jupyter:
#   jupytext:
#     formats: ipynb,py:percent
#     text_representation:
#       extension: .py
#       format_name: percent
#       format_version: '1.3'
#   kernelspec:
#     display_name: Python 3
#     language: python
#     name: python3
# ---

# %% [markdown]
# # From sentences to circuits
#
# A sentence over a fixed signature defines a Boolean function of the encoding
# of an n-element structure. `compile_fo` builds that function as an AND/OR
# circuit with negated literals: quantifiers become n-way gates and
# connectives become gates over their operands. Here we check the circuit
# against the model table and look at how depth and fan-in come out.

# %%
import numpy as np

from hompres.circuits import all_assignments, compile_fo, eval_batch, measure, to_netlist
from hompres.folog import connective_block, model_table, parse_sentence, quantifier_rank

# %% [markdown]
# ## A first circuit
#
# "There is an edge" at n = 2 is an OR over the four bits of R.

# %%
edge = parse_sentence("EX x. EX y. R(x,y)")
C = compile_fo(edge, 2)
print(to_netlist(C))
print(measure(C))

# %% [markdown]
# ## Soundness against the model table
#
# Evaluate the circuit on every encoding in one batch and compare.

# %%
corpus = [
    "EX x. EX y. EX z. (R(x,y) & R(y,z) & R(z,x))",
    "ALL x. EX y. R(x,y)",
    "EX x. (R(x,x) | ALL y. ~R(x,y))",
    "ALL x. ALL y. (~R(x,y) | R(y,x))",
]
for text in corpus:
    phi = parse_sentence(text)
    for n in (1, 2, 3):
        C = compile_fo(phi, n)
        X = all_assignments(C.n_inputs)
        same = np.array_equal(eval_batch(C, X), model_table(phi, n))
        m = measure(C)
        print(f"n={n} qr={quantifier_rank(phi)} depth={m.depth} fanin={m.max_fanin} "
              f"(cap {max(n, connective_block(phi))}) size={m.size} sound={same}  {text}")

# %% [markdown]
# ## Fan-in
#
# The cap limits how far nested same-kind gates are merged. By default it is
# max(n, c), where c is the widest block of same-kind connectives in the
# sentence. `max_fanin=None` lets merging run freely, which flattens the
# circuit. A cap below n does not split gates: a quantifier over n elements
# still yields an n-way gate, so the integer 2 at n = 3 matches the default.

# %%
phi = parse_sentence(corpus[0])
for cap in ("auto", None, 2):
    print(cap, measure(compile_fo(phi, 3, max_fanin=cap)))
