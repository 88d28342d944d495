"""E2W sampling on a five-armed Gaussian bandit.

Prints, per checkpoint, how many of 20 seeds have the greedy arm right and
the mean occupation gap relative to t / ln t.
"""

import numpy as np

from antsearch.bandit import BanditTrial, run_trials

means = np.linspace(0, 1, 5)
for schedule in ("constant", "log_decay"):
    trials = [BanditTrial(means, sigma=0.1, tau=0.1, schedule=schedule, horizon=10_000, seed=s)
              for s in range(20)]
    logs = run_trials(trials, checkpoints=(100, 1_000, 10_000))
    print(schedule)
    for i, t in enumerate((100, 1_000, 10_000)):
        correct = sum(log.rows[i]["greedy_correct"] for log in logs)
        gap = np.mean([log.normalized_gaps()[i] for log in logs])
        print(f"  t={t:>6}  greedy correct {correct}/20  gap/(t/ln t) {gap:.3f}")
