# coding: utf-8

# # A short highway benchmark
#
# Oracle, nominal and robust agents play the same seeded episodes. The full
# run uses 100 episodes per agent (`robustplan bench`); ten are enough to see
# the pattern.

# In[1]:

from robustplan.bench import benchmark, summarize
from robustplan.config import load_config

cfg = load_config()
agents = ["oracle:discrete", "nominal:discrete", "drop", "oracle:continuous", "nominal:continuous", "irc"]
results = benchmark(cfg, agents, episodes=10)


# Worst case, mean and population standard deviation of the undiscounted return.

# In[2]:

print(f"{'agent':<20}{'worst':>8}{'mean':>8}{'std':>7}{'coll':>6}")
for s in summarize(results):
    print(f"{s.agent:<20}{s.worst:8.2f}{s.mean:8.2f}{s.std:7.2f}{s.collisions:6d}")


# Episodes where the nominal agent crashed:

# In[3]:

print([r.seed for r in results if r.agent.startswith("nominal") and r.collision])
