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
# # Graph parameters
#
# Tree-width, tree-depth and longest path are all computed exactly here, by
# exhaustive search over small graphs. This notebook walks through the path
# family, where the numbers are known in closed form, and then the chain
# tw <= td - 1 and td <= lp <= 2^td - 1 on a few named families.

# %%
import math

from hompres.graphparams import family, longest_path, minor_contains, path, tree_depth, tree_width
from hompres.graphparams import trichotomy_check, binary_tree

# %% [markdown]
# ## Paths
#
# A path on k vertices has tree-depth ceil(log2(k+1)): put the middle vertex at
# the root and recurse on both halves. Tree-width is 1 once there is an edge.

# %%
for k in range(1, 16):
    td, forest = tree_depth(path(k), max_order=15)
    tw = tree_width(path(k), max_order=15)[0]
    print(f"P{k:<2} td={td} expected={math.ceil(math.log2(k + 1))} tw={tw}")

# %% [markdown]
# The elimination forest for P7 has the middle vertex as root.

# %%
td, forest = tree_depth(path(7))
print(td, forest)

# %% [markdown]
# ## The inequality chain on named families
#
# Anything above 16 vertices would be skipped; the exact solvers are exponential.

# %%
for kind in ("path", "clique", "binary_tree", "grid"):
    for k in (2, 3, 4):
        G = family(kind, k)
        if G.order > 16:
            print(f"{kind:>11} {k}: n={G.order}, too large for the exact solvers")
            continue
        tw = tree_width(G, max_order=16)[0]
        td = tree_depth(G, max_order=16)[0]
        lp = longest_path(G, max_order=16)
        ok = tw <= td - 1 and td <= lp <= 2 ** td - 1
        print(f"{kind:>11} {k}: n={G.order:<2} tw={tw} td={td} lp={lp} {'ok' if ok else 'VIOLATED'}")

# %% [markdown]
# ## Minors and the trichotomy
#
# Branch sets are returned as a witness, one connected set per pattern vertex.
# The trichotomy check reports which of "large tree-width", "long path" and
# "binary tree minor" hold for a given ell.

# %%
print(minor_contains(binary_tree(2), path(7)))
print(minor_contains(binary_tree(1), path(7)))
print(sorted(trichotomy_check(path(7), 2)))
print(sorted(trichotomy_check(path(4), 2)))

# %% [markdown]
# P4 already has a long path (4 >= 2^2) and a B_2 minor (B_2 is itself a path on
# three vertices), so for ell = 2 it lands in two of the three cases, same as P7.
