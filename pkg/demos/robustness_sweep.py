"""Entropy versus temperature parameterization across two reward scales.

A smaller rho means the normalized score varies less across the grid.
"""

from antsearch.harness import (ExperimentConfig, entropy_grid, log_grid,
                               robustness_metric, sweep)

params = dict(step_penalty=0.001, distractor_reward=0.001)
fixtures = [{"name": "x1", "env": "chain", "params": params},
            {"name": "x100", "env": "chain", "params": dict(params, reward_scale=100)}]
cfg = ExperimentConfig(algorithm="ants_s", env_params=params, seeds=[0, 1, 2], episodes=1)
for label, grid in (("entropy", {"parameter": "h_avg", "values": entropy_grid("shannon", 2)}),
                    ("temperature", {"parameter": "tau", "values": log_grid(1e-3, 10, 9)})):
    result = sweep(cfg, dict(grid, fixtures=[dict(f) for f in fixtures]))
    print(f"{label:12s} rho = {robustness_metric(result['scores']):.4f}")
    for name, cells in result["scores"].items():
        print(f"  {name:5s} " + " ".join(f"{s:5.2f}" for s in cells.values()))
