"""Planning-learning loop: ANTS-S trains a linear Q-estimator on the chain.

The evaluation return climbs to the optimal 0.993 once the estimator has
seen the goal.
"""

from antsearch.envs import ChainEnv, optimal_return
from antsearch.harness import ExperimentConfig, run_learning

params = dict(step_penalty=0.001, distractor_reward=0.001)
cfg = ExperimentConfig(algorithm="ants_s", env_params=params, max_steps=20,
                       loop={"epochs": 6})
print(f"optimal return {optimal_return(ChainEnv(**params), 0.9, 20):.3f}")
for row in run_learning(cfg, seed=0):
    print(f"epoch {row['epoch']}  episodes {row['episodes_collected']:3d}  "
          f"return {row['mean_return']:.3f}  loss {row['mean_loss']:.2e}  "
          f"tau {row['mean_tau']:.4f}")
