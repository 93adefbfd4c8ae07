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
# # Cores, minimal cores and preservation
#
# A core is a structure with no homomorphism onto a proper substructure. Every
# finite structure has one, unique up to isomorphism. Here we compute a few,
# then look at minimal cores of the class generated by a sentence's models, and
# at the brute-force check that a sentence is preserved under homomorphisms.

# %%
from hompres.cores import compute_core, core, is_hom_preserved, min_cores, min_cores_of_sentence
from hompres.folog import parse_sentence
from hompres.graphparams import clique, cycle
from hompres.structures import binary_structure, from_graph, isomorphic

# %% [markdown]
# ## Cores of cycles
#
# Even cycles fold onto an edge. Odd cycles are already cores.

# %%
for k in (4, 5, 6, 7):
    res = compute_core(from_graph(cycle(k)))
    print(f"C{k}: core size {res.core.size}, kept {res.kept}, retraction {res.retraction.image}")

# %% [markdown]
# The directed path on three vertices is a core even though its underlying
# undirected graph is not.

# %%
dp3 = binary_structure(3, [(0, 1), (1, 2)])
print(core(dp3).size)

# %% [markdown]
# ## Minimal cores
#
# For a set of generators, the minimal cores are the cores of the
# homomorphism-minimal members, one per isomorphism class.

# %%
K2, K3 = from_graph(clique(2)), from_graph(clique(3))
DC3 = binary_structure(3, [(0, 1), (1, 2), (2, 0)])
C4 = from_graph(cycle(4))
for m in min_cores([K3, DC3, C4]):
    print(m.size, sorted(m.tuples("R")))

# %% [markdown]
# The triangle sentence has a single minimal core: the directed 3-cycle, not
# the symmetric triangle.

# %%
triangle = parse_sentence("EX x. EX y. EX z. (R(x,y) & R(y,z) & R(z,x))")
(m,) = min_cores_of_sentence(triangle, 3)
print(isomorphic(m, DC3))

# %% [markdown]
# ## Preservation up to a size bound
#
# A sentence fails the check as soon as some model maps into a non-model. The
# result carries that pair and the map.

# %%
for text in ("EX x. EX y. R(x,y)", "ALL x. ALL y. ~R(x,y)", "ALL x. R(x,x)"):
    res = is_hom_preserved(parse_sentence(text), 2)
    if res:
        print(f"{text}: preserved up to size 2")
    else:
        A, B, f = res.counterexample
        print(f"{text}: A={A.size}:{sorted(A.tuples('R'))} -> B={B.size}:{sorted(B.tuples('R'))} via {f.image}")
