"""One ANTS-S episode on the chain, printing the adapted temperature per step.

The planner starts hot (tau0 = 10) and cools towards the temperature at which
the tree's mean policy entropy matches the target.
"""

from antsearch.envs import ChainEnv
from antsearch.estimators import RewardEstimator
from antsearch.harness import build_planner

env = ChainEnv(step_penalty=0.001, distractor_reward=0.001)
planner = build_planner("ants_s", env, RewardEstimator(env), seed=0)
state, total = env.initial_state, 0.0
for step in range(30):
    root = planner.search(state)
    action = planner.select_action(root, evaluation=True)
    planner.advance(action)
    print(f"step {step:2d}  state {state}  tau {planner.tau:.4f}  "
          f"Q {root.child_qvalues().round(3)}  -> action {action}")
    state, reward, done = env.step(state, action)
    total += reward
    if done:
        break
print(f"return {total:.3f}")
