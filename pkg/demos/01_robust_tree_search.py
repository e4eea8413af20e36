# coding: utf-8

# # Robust tree search on a two-model toy problem
#
# Two deterministic models share the first reward and then disagree. The
# robust planner maximises, over action sequences, the return of the worst
# model. Taking the minimum over models at the root instead of at the leaves
# picks a different, worse action.

# In[1]:

import numpy as np

from robustplan import drop
from robustplan.core import DiscreteAmbiguitySet, robust_value_bruteforce

FIRST = {(0,): 0.9, (1,): 0.7}
TABLES = [
    {(0, 0): 0.5, (0, 1): 0.2, (1, 0): 0.3, (1, 1): 0.0},
    {(0, 0): 0.0, (0, 1): 0.0, (1, 0): 0.1, (1, 1): 0.8},
]


def model(m):
    return lambda s, a: (m, s[1] + (a,))


def reward(s, a):
    m, prefix = s
    return FIRST[(a,)] if m is None else TABLES[m].get(prefix + (a,), 0.0)


amb = DiscreteAmbiguitySet((model(0), model(1)))
s0 = (None, ())


# Brute force over every length-2 sequence gives the reference value.

# In[2]:

value, best = robust_value_bruteforce(amb, s0, reward, 0.8, 2, 2)
print("robust value", round(value, 3), "best sequence", best)


# DROP expands a single tree whose nodes hold one state per model.

# In[3]:

cfg = drop.DropConfig(gamma=0.8, budget=50)
action, diag = drop.plan(s0, amb, reward, cfg, 2)
naive = drop.plan_naive_minmax(s0, amb, reward, cfg, 2)
print("DROP action", action, "naive min-max action", naive)
print("root u", round(diag.root_u, 3), "root b", round(diag.root_b, 3), "depth", diag.depth)


# The u-values only increase and the b-values only decrease as the tree grows.

# In[4]:

_, diag = drop.plan(s0, amb, reward, cfg, 2, record=True)
roots = np.array([(u[0], b[0]) for u, b in diag.snapshots])
print(roots[[0, 4, 9, 24, 49]].round(3))
