# coding: utf-8

# # Interval hulls of uncertain traffic
#
# Other drivers follow a linear longitudinal law and a cascaded lane keeping
# controller whose gains are only known to lie in a box. The interval
# predictor encloses every trajectory compatible with the box; sampled
# trajectories must stay inside.

# In[1]:

import numpy as np

from robustplan.config import load_config
from robustplan.highway import build_scenario, make_ambiguity
from robustplan.predictor import predict_hulls, rollout_states, sample_parameters
from robustplan.render import render_trace

cfg = load_config()
scenario = build_scenario(cfg, seed=3, mode="continuous")
amb = make_ambiguity(scenario, "continuous")
print("uncertain parameters:", amb.dim)


# Predict five epochs while the ego keeps its lane and speeds up once.

# In[2]:

plan = [3, 0, 0, 0, 0]
trace = predict_hulls(amb, plan, record_inner=True)
width = trace.hi - trace.lo
print("x width per epoch (m):")
print(width[:, 1:, 0].round(2))


# Sample 200 parameter vectors, corners of the box first, and check inclusion.

# In[3]:

inside = [trace.contains_states(np.array([w.state for w in rollout_states(amb, th, plan)])).all()
          for th in sample_parameters(amb, 200, seed=0)]
print("all sampled trajectories inside:", all(inside))


# The pessimistic reward is 0 once a collision cannot be ruled out.

# In[4]:

print("possible collision per epoch:", trace.crash_possible)
print("reward lower bound per epoch:", trace.rewards.round(3))

with open("interval_hulls.svg", "w") as fh:
    fh.write(render_trace(amb.context.world.road, [amb.context.world], trace))
print("wrote interval_hulls.svg")
