"""Soft values and policies under both regularizers.

Shows how temperature moves the policy from greedy to uniform, and how the
Tsallis policy drops actions entirely while the Shannon policy never does.
"""

import numpy as np

from antsearch.entropy import entropy, max_entropy, soft_policy, soft_value

q = np.array([1.0, 0.8, 0.2, -0.5])
print(f"Q = {q}")
for kind in ("shannon", "tsallis2"):
    print(f"\n{kind}: H_max = {max_entropy(kind, q.size):.4f}")
    for tau in (0.01, 0.1, 0.5, 2.0, 20.0):
        pi = soft_policy(q, kind, tau)
        print(f"  tau={tau:<5}  V={soft_value(q, kind, tau):8.4f}  H={entropy(pi, kind):.4f}"
              f"  pi={np.round(pi, 3)}")
