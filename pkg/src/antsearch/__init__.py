"""Adaptive entropy tree search and maximum-entropy planning baselines."""
