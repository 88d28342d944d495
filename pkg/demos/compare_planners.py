"""All five presets on the chain at two reward scales, planning only.

The leaf estimator is the immediate reward, so without learning most
planners never see the goal within 30 passes; compare the learning demo.
"""

from antsearch.harness import ExperimentConfig, run_episodes
from antsearch.envs import make_env

for scale in (1.0, 100.0):
    params = dict(step_penalty=0.001, distractor_reward=0.001, reward_scale=scale)
    env = make_env("chain", **params)
    print(f"reward scale {scale}")
    for algo in ("ants_s", "ants_t", "ments", "tents", "puct"):
        cfg = ExperimentConfig(algorithm=algo, env_params=params, episodes=1, max_steps=30)
        rows, _ = run_episodes(cfg, seed=0, env=env)
        _, _, ret, steps, tau = rows[0]
        print(f"  {algo:7s} return {ret:8.3f}  steps {steps:2d}  mean tau {tau:.4g}")
