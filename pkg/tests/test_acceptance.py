"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` (lines appear in the terminal
output) or directly with ``python tests/test_acceptance.py``.  Expected values
come from the brute-force references in ``oracles.py`` or from reference runs
whose outcomes are frozen below; none of them are tuned to make a check pass.
"""

import itertools
import os
import sys
import time

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

import oracles  # noqa: E402
from antsearch.bandit import BanditTrial, run_trials  # noqa: E402
from antsearch.entropy import EntropyKind, max_entropy, soft_policy  # noqa: E402
from antsearch.envs import ChainEnv, optimal_return  # noqa: E402
from antsearch.estimators import RewardEstimator  # noqa: E402
from antsearch.harness import (  # noqa: E402
    ROBUSTNESS_TAU_SET,
    ExperimentConfig,
    entropy_grid,
    linear_grid,
    log_grid,
    robustness_metric,
    run_experiment,
    run_learning,
    sweep,
)
from antsearch.planner import (  # noqa: E402
    MaxEntPlanner,
    PlannerConfig,
    TemperatureController,
    adapt_temperature,
    recalculate_qvalues,
    simulate,
    smooth_temperature,
)
from antsearch.tree import TreeNode, expand, internal_nodes  # noqa: E402

RESULTS = {}


def report(number, ok, detail):
    line = f"CRITERION {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[number] = line
    return line


@pytest.fixture
def emit(capsys):
    def _emit(number, ok, detail):
        line = report(number, ok, detail)
        with capsys.disabled():
            print("\n" + line)
        assert ok, line
    return _emit


class UniformTree:
    """K-ary tree of depth-tagged states with fixed random edge rewards."""

    initial_state = ()

    def __init__(self, n_actions, depth, scale, seed):
        self.n_actions = n_actions
        rng = np.random.default_rng(seed)
        self.rewards = {}
        for d in range(1, depth + 2):
            for path in itertools.product(range(n_actions), repeat=d):
                self.rewards[path] = float(rng.uniform(0.0, scale))

    def step(self, state, action):
        nxt = state + (action,)
        return nxt, self.rewards[nxt], False


def oracle_kind(kind):
    return "shannon" if EntropyKind.parse(kind) is EntropyKind.SHANNON else "tsallis"


def full_tree_planner(kind, k, depth, tau, shaping, seed):
    # Rewards well below tau keep every sparsemax support full, so selection
    # with epsilon = 0 still reaches every node.
    model = UniformTree(k, depth, 0.1 * tau / depth, seed)
    cfg = PlannerConfig(kind=kind, n_passes=40 * k**depth, depth_limit=depth, epsilon=0.0,
                        gamma=0.9, adapt=False, shaping=shaping, reuse_tree=False, seed=seed)
    planner = MaxEntPlanner(model, RewardEstimator(model), cfg, TemperatureController(tau0=tau))
    root = planner.search(())
    n_internal = sum(k**d for d in range(depth))
    return model, root, len(internal_nodes(root)) == n_internal


# ------------------------------------------------------------------ checks


def check_1():
    worst, cases, full = 0.0, 0, True
    for kind, k, depth, tau in itertools.product(
            list(EntropyKind), (2, 3), (1, 2, 3), (0.05, 0.5, 5.0)):
        model, root, is_full = full_tree_planner(kind, k, depth, tau, True, seed=cases)
        full &= is_full
        want = oracles.recursive_soft_value(model.step, (), depth, k, 0.9, tau,
                                            oracle_kind(kind), shaping=True)
        worst = max(worst, float(np.max(np.abs(root.child_qvalues() - want))))
        cases += 1
    return full and worst <= 1e-9, f"{cases} trees, max |dQ| = {worst:.2e} (tol 1e-9)"


# Sup over tau >= 0.05 and r in [-5, 5]^K, K <= 10, of ||d softmax / d tau||_inf,
# fitted once on 2e4 random and 7.2e3 adversarial vectors (max 12.687) and frozen.
LIPSCHITZ_TAU_FLOOR = 0.05
LIPSCHITZ_C = 12.7


def check_2():
    rng = np.random.default_rng(2024)
    n, bad_r, bad_t = 10_000, 0, 0
    for _ in range(n):
        k = int(rng.integers(2, 11))
        tau = float(rng.uniform(0.05, 5.0))
        r1, r2 = rng.uniform(-5, 5, k), rng.uniform(-5, 5, k)
        if rng.random() < 0.5:  # small perturbations probe the local constant
            r2 = np.clip(r1 + rng.normal(scale=0.05, size=k), -5, 5)
        lhs = np.max(np.abs(soft_policy(r1, "shannon", tau) - soft_policy(r2, "shannon", tau)))
        bad_r += lhs > (2 / tau) * np.max(np.abs(r1 - r2)) + 1e-9
        t1, t2 = LIPSCHITZ_TAU_FLOOR + rng.exponential(1.0, 2)
        lhs = np.max(np.abs(soft_policy(r1, "shannon", t1) - soft_policy(r1, "shannon", t2)))
        bad_t += lhs > LIPSCHITZ_C * abs(t1 - t2) + 1e-9
    ok = bad_r == 0 and bad_t == 0
    return ok, f"{n} instances: {bad_r} reward violations, {bad_t} temperature violations"


def check_3():
    means = np.linspace(0, 1, 5)
    details, ok = [], True
    for schedule in ("constant", "log_decay"):
        trials = [BanditTrial(means, sigma=0.1, tau=0.1, schedule=schedule, schedule_c=1.0,
                              horizon=100_000, seed=s) for s in range(100)]
        logs = run_trials(trials)
        errors = [sum(1 - log.rows[i]["greedy_correct"] for log in logs) for i in range(4)]
        monotone = all(a >= b for a, b in zip(errors, errors[1:])) and errors[-1] == 0
        gaps_ok = sum(bool(np.all(np.diff(log.normalized_gaps()[-3:]) <= 0)) for log in logs)
        ok &= monotone and gaps_ok >= 95
        details.append(f"{schedule}: errors {errors}, gap non-increasing in {gaps_ok}/100")
    return ok, "; ".join(details)


def random_tree(rng, k, max_depth):
    root = TreeNode(0)
    frontier, depth = [root], 0
    while frontier and depth < max_depth:
        nxt = []
        for node in frontier:
            node.count = 1
            for _ in range(k):
                child = TreeNode(0, parent=node)
                child.qvalue = float(rng.uniform(-1, 1))
                node.children.append(child)
            nxt.extend(c for c in node.children if rng.random() < 0.4)
        frontier, depth = nxt, depth + 1
    return root


def oracle_mean_entropy(root, tau, kind):
    total = []
    for node in internal_nodes(root):
        q = [c.qvalue for c in node.children]
        if kind == "shannon":
            total.append(oracles.shannon_h(oracles.softmax_scalar(q, tau)))
        else:
            total.append(oracles.tsallis_h(oracles.sparsemax_by_enumeration([x / tau for x in q])))
    return sum(total) / len(total)


def check_4():
    rng = np.random.default_rng(4)
    worst, interior, cases = 0.0, 0, 0
    for _ in range(100):
        k = int(rng.integers(2, 7))
        root = random_tree(rng, k, 3)
        for kind in EntropyKind:
            for frac in (0.25, 0.5, 0.75):
                h_avg = frac * max_entropy(kind, k)
                ctl = TemperatureController(tau_min=1e-4, h_avg=h_avg)
                tau = adapt_temperature(root, ctl, kind)
                cases += 1
                if ctl.tau_min < tau < 1e9:
                    interior += 1
                    worst = max(worst, abs(oracle_mean_entropy(root, tau, kind.value) - h_avg))
    ok = interior > 0 and worst <= 1e-6
    return ok, f"{interior}/{cases} interior roots, max |H - H_avg| = {worst:.2e} (tol 1e-6)"


def paired_nodes(a, b):
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        yield x, y
        stack.extend(zip(x.children, y.children))


def exact_tree(model, depth, tau, cfg):
    """Fully expanded tree with every internal node backed up bottom-up."""
    root = TreeNode(model.initial_state)
    frontier = [root]
    for _ in range(depth):
        nxt = []
        for node in frontier:
            expand(node, model)
            simulate(node, RewardEstimator(model), tau, cfg)
            nxt.extend(node.children)
        frontier = nxt
    recalculate_qvalues(root, tau, cfg)
    return root


def check_5():
    worst, shift, cases = 0.0, 0.0, 0
    for kind, k, depth, tau in itertools.product(
            list(EntropyKind), (2, 3), (1, 2, 3), (0.05, 0.5, 5.0)):
        model = UniformTree(k, depth, 1.0, seed=cases)
        shaped, plain = (exact_tree(model, depth, tau, PlannerConfig(kind=kind, gamma=0.9,
                                                                     shaping=flag))
                         for flag in (True, False))
        for x, y in paired_nodes(shaped, plain):
            if x.children:
                px = soft_policy(x.child_qvalues(), kind, tau)
                py = soft_policy(y.child_qvalues(), kind, tau)
                worst = max(worst, float(np.max(np.abs(px - py))))
                shift = max(shift, float(np.max(np.abs(x.child_qvalues() - y.child_qvalues()))))
        cases += 1
    ok = worst <= 1e-9 and shift > 0
    return ok, (f"{cases} tree pairs, max |d pi| = {worst:.2e} (tol 1e-9) "
                f"while Q-values shift by up to {shift:.2f}")


def check_6():
    counts = {}
    model = UniformTree(3, 0, 1.0, 0)
    model.step = lambda s, a: (s + (a,), 0.0, False)
    for n in (1, 10, 100):
        cfg = PlannerConfig(n_passes=n, depth_limit=n + 1, reuse_tree=False, seed=n)
        planner = MaxEntPlanner(model, RewardEstimator(model), cfg, TemperatureController())
        counts[n] = len(internal_nodes(planner.search(())))
    return all(k == v for k, v in counts.items()), f"internal nodes per n_passes {counts}"


def check_7():
    worst = 0.0
    rng = np.random.default_rng(7)
    for alpha in (0.5, 0.9):
        for _ in range(200):
            tau0, target = np.exp(rng.uniform(-6, 6, 2))
            ctl = TemperatureController(tau0=tau0, alpha=alpha, tau_min=1e-6)
            for n in range(1, 6):
                got = smooth_temperature(ctl, target)
                want = tau0 ** (alpha**n) * target ** (1 - alpha**n)
                worst = max(worst, abs(got - want) / want)
    grids_ok = (
        linear_grid(0.3, 2.7, 9) == [0.3, 0.6, 0.9, 1.2, 1.5, 1.8, 2.1, 2.4, 2.7]
        and linear_grid(0.05, 0.45, 9) == [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45]
        and ROBUSTNESS_TAU_SET == (0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0)
        and np.allclose(log_grid(1e-3, 10, 9), ROBUSTNESS_TAU_SET, rtol=0.06, atol=0)
    )
    ok = worst <= 1e-12 and grids_ok
    return ok, f"smoothing max rel err {worst:.1e} (tol 1e-12); grids {'exact' if grids_ok else 'wrong'}"


# Chain fixture for the learning and robustness analogues.  Penalty and
# distractor are small so that exploration, not the myopic reward, decides
# whether the goal is found.
CHAIN = {"step_penalty": 0.001, "distractor_reward": 0.001}
LEARNING_MAX_STEPS = 20
# 37 epochs of 8 episodes: 296 collected episodes, inside the 300 budget.
LEARNING_LOOP = {"epochs": 37}
# ANTS-S settles at tau 0.076 to 0.082 on the unit-scale fixture in the
# reference run; a fixed tau at that value is 100x too small once rewards
# are scaled by 100.  Frozen from that run.
MISSET_TAU = 0.08


def first_optimal(algorithm, env_params, seed, planner=None):
    cfg = ExperimentConfig(algorithm=algorithm, env_params=env_params, planner=planner or {},
                           loop=LEARNING_LOOP, max_steps=LEARNING_MAX_STEPS)
    target = optimal_return(ChainEnv(**env_params), 0.9, LEARNING_MAX_STEPS)
    for row in run_learning(cfg, seed):
        if row["mean_return"] >= target - 1e-9 and row["episodes_collected"] <= 300:
            return row["episodes_collected"]
    return None


def check_8():
    seeds = range(5)
    ants = [first_optimal("ants_s", CHAIN, s) for s in seeds]
    ments = [first_optimal("ments", dict(CHAIN, reward_scale=100), s,
                           {"tau": MISSET_TAU}) for s in seeds]
    ants_ok = sum(x is not None for x in ants)
    ments_fail = sum(x is None for x in ments)
    ok = ants_ok >= 4 and ments_fail >= 4
    return ok, (f"ANTS-S reached optimum in {ants_ok}/5 seeds (episodes {ants}); "
                f"MENTS tau={MISSET_TAU} on x100 failed in {ments_fail}/5 (episodes {ments})")


def check_9():
    fixtures = [{"name": "x1", "env": "chain", "params": CHAIN},
                {"name": "x100", "env": "chain", "params": dict(CHAIN, reward_scale=100)}]
    cfg = ExperimentConfig(algorithm="ants_s", env_params=CHAIN, seeds=[0, 1, 2], episodes=1,
                           max_steps=30)
    rho = {}
    for label, grid in (("entropy", {"parameter": "h_avg", "values": entropy_grid("shannon", 2)}),
                        ("temperature", {"parameter": "tau", "values": log_grid(1e-3, 10, 9)})):
        result = sweep(cfg, dict(grid, fixtures=[dict(f) for f in fixtures]))
        rho[label] = robustness_metric(result["scores"])
    ok = rho["entropy"] < rho["temperature"]
    return ok, f"rho entropy grid {rho['entropy']:.4g} vs temperature grid {rho['temperature']:.4g}"


def determinism_config(out):
    return ExperimentConfig(
        algorithm="ants_s", seeds=[0, 1], episodes=2, max_steps=10,
        planner={"n_passes": 10, "depth_limit": 5}, out=str(out), trace_temperature=True,
        bandit={"horizon": 2000, "checkpoints": [100, 1000, 2000]},
        loop={"epochs": 2, "episodes_per_epoch": 2, "updates_per_epoch": 10},
        sweep={"parameter": "h_avg", "values": [0.1, 0.4]})


def check_10(tmp):
    outputs = []
    for run in range(2):
        cfg = determinism_config(os.path.join(tmp, f"run{run}"))
        texts = {}
        for command in ("plan", "report", "bandit", "loop", "sweep"):
            for path in run_experiment(command, cfg):
                texts[path.name] = path.read_text()
        outputs.append(texts)
    same = outputs[0] == outputs[1]
    return same, f"{len(outputs[0])} CSV files from 5 subcommands, identical: {same}"


# ------------------------------------------------------------------ tests


def timed(fn, *args):
    start = time.perf_counter()
    ok, detail = fn(*args)
    return ok, f"{detail} [{time.perf_counter() - start:.1f}s]"


def test_criterion_1_oracle_equivalence(emit):
    emit(1, *timed(check_1))


def test_criterion_2_lipschitz(emit):
    emit(2, *timed(check_2))


def test_criterion_3_bandit(emit):
    emit(3, *timed(check_3))


def test_criterion_4_entropy_targeting(emit):
    emit(4, *timed(check_4))


def test_criterion_5_shaping_invariance(emit):
    emit(5, *timed(check_5))


def test_criterion_6_node_count(emit):
    emit(6, *timed(check_6))


def test_criterion_7_smoothing_and_grids(emit):
    emit(7, *timed(check_7))


def test_criterion_8_learning(emit):
    emit(8, *timed(check_8))


def test_criterion_9_robustness(emit):
    emit(9, *timed(check_9))


def test_criterion_10_determinism(emit, tmp_path):
    emit(10, *timed(check_10, str(tmp_path)))


if __name__ == "__main__":
    import tempfile

    with tempfile.TemporaryDirectory() as tmp:
        checks = [(n, globals()[f"check_{n}"], ()) for n in range(1, 10)]
        checks.append((10, check_10, (tmp,)))
        for number, fn, args in checks:
            print(report(number, *timed(fn, *args)), flush=True)
