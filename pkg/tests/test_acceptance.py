"""Acceptance gate: one test per criterion, one PASS/FAIL line each.

The lines are echoed in the terminal summary under "acceptance criteria".
"""
import time

import numpy as np
import pytest
from scipy import stats

from conftest import ACCEPTANCE_LINES, brute_force_link, weighted_ball_grid
from csil.dictionary import TrigDictionary, index_project
from csil.geometry import (L1BallSpec, WeightedL1BallSpec, sample_l1_ball,
                           sample_weighted_l1_ball, weighted_l1_norm)
from csil.losses import clipped_absolute, clipped_squared
from csil.meta_learner import (ContinualLearner, IndexParticleCloud, LearnerConfig,
                               mc_deviation, run_stream)
from csil.oracle import best_link, best_theta, frank_wolfe
from csil.rng import substream
from csil.taskgen import StreamConfig, generate
from csil.within_task import LinkParticleCloud, WithinTaskConfig, gibbs_log_weights, run_task


def report(k, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {k} ({title}): {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert passed, line


@pytest.mark.slow
def test_criterion_1_within_task_regret_scaling():
    loss = clipped_absolute(1.0)
    cfg = WithinTaskConfig(dictionary_size=4, budget=1.0, n_particles=2048,
                           scheme="resample-move")
    start = time.perf_counter()
    medians = {}
    for n in (256, 1024, 4096):
        regrets = []
        for seed in range(20):
            s = generate(StreamConfig(T=1, n=n, d=3, seed=seed))
            task = s.tasks[0]
            res = run_task(task.X, task.y, s.theta_star, cfg, loss, substream(seed, "links"))
            comp = best_link(task.X, task.y, s.theta_star, loss, cfg.ball, cfg.dictionary,
                             known=[s.betas[0]])
            regrets.append(res.average_loss - comp.value)
        medians[n] = float(np.median(regrets))
    elapsed = time.perf_counter() - start
    ratio = medians[256] / medians[4096]
    ok = (medians[256] >= medians[1024] >= medians[4096] and ratio >= 2.0
          and elapsed <= 300)
    report(1, "within-task regret scaling", ok,
           f"medians {', '.join(f'n={n}: {v:.4f}' for n, v in medians.items())}; "
           f"ratio {ratio:.2f} (need >= 2); {elapsed:.0f}s (limit 300s)")


@pytest.mark.slow
def test_criterion_2_meta_transfer_trend():
    cfg = LearnerConfig(loss=clipped_absolute(1.0),
                        within=WithinTaskConfig(dictionary_size=4, budget=1.0,
                                                n_particles=256),
                        n_particles=256, mode="sample")
    start = time.perf_counter()
    medians = {}
    for T in (20, 200):
        regrets = [run_stream(generate(StreamConfig(T=T, n=256, d=3, seed=seed)), cfg,
                              seed=seed).compound_regret for seed in range(10)]
        medians[T] = float(np.median(regrets))
    elapsed = time.perf_counter() - start
    ok = medians[200] < medians[20] and elapsed <= 1200
    report(2, "meta-level transfer trend", ok,
           f"median regret T=20: {medians[20]:.4f}, T=200: {medians[200]:.4f}; "
           f"{elapsed:.0f}s (limit 1200s)")


def test_criterion_3_jensen_in_aggregate_mode():
    # sup|prediction| + sup|y| <= 2 + 1.5 <= bound, so clipping never activates
    loss = clipped_absolute(3.5, prediction_range=3.5)
    assert loss.convex_in_first_arg
    cfg = LearnerConfig(loss=loss, within=WithinTaskConfig(n_particles=128),
                        n_particles=64, mode="aggregate-mc", n_draw=16)
    s = generate(StreamConfig(T=10, n=64, d=3, seed=0, noise="uniform", noise_bound=0.5))
    trace = run_stream(s, cfg, seed=0, keep_outcomes=True)
    violations = rounds = 0
    worst = -np.inf
    for o in trace.outcomes:
        excess = o.losses - o.drawn_mean_losses
        violations += int(np.sum(excess > 1e-12))
        rounds += len(excess)
        worst = max(worst, float(excess.max()))
    report(3, "Jensen inequality", violations == 0,
           f"{violations} violations over {rounds} rounds; max excess {worst:.2e}")


def test_criterion_4_monte_carlo_rate():
    s = generate(StreamConfig(T=6, n=128, d=3, seed=0))
    cfg = LearnerConfig(loss=clipped_absolute(1.0), within=WithinTaskConfig(n_particles=128),
                        n_particles=256)
    learner = ContinualLearner(3, cfg, seed=0, horizon=20)
    for t, task in enumerate(s.tasks):
        weights = learner.cloud.weights
        learner.start_task(len(task))
        for i in range(len(task)):
            learner.predict(task.X[i])
            learner.observe(task.y[i])
        outcome = learner.finish_task()
    # the last task is the fixed task; weights are the posterior it was played with
    rng = substream(0, "mc-rate")
    q = {}
    for n_draw in (64, 256):
        dev = [mc_deviation(weights, outcome.particle_losses, n_draw, rng) for _ in range(200)]
        q[n_draw] = float(np.quantile(dev, 0.9))
    ratio = q[64] / q[256]
    report(4, "Monte-Carlo rate", 1.5 <= ratio <= 2.7,
           f"90th pct deviation {q[64]:.3e} -> {q[256]:.3e}, ratio {ratio:.2f} "
           f"(need [1.5, 2.7]); ESS of weights {1 / np.sum(weights ** 2):.0f}")


def test_criterion_5_exponential_weights_algebra():
    rng = substream(0, "ew-algebra")
    failures = {"shift": 0, "gibbs": 0, "norm": 0}
    instances = 2000
    for _ in range(instances):
        n = int(rng.integers(1, 65))
        rounds = int(rng.integers(1, 20))
        rate = float(rng.uniform(0, 10))
        # dyadic losses and shifts keep every sum exact, so bit identity is well defined
        losses = rng.integers(0, 2**10, size=(rounds, n)) / 2**10
        k = int(rng.integers(rounds))
        shifted = losses.copy()
        shifted[k] += rng.integers(1, 2**8) / 2**4
        a = IndexParticleCloud(np.zeros((n, 1)), np.full(n, -np.log(n)), np.zeros(n), rate)
        b = IndexParticleCloud(np.zeros((n, 1)), np.full(n, -np.log(n)), np.zeros(n), rate)
        for la, lb in zip(losses, shifted):
            a.update(la)
            b.update(lb)
        failures["shift"] += int(not np.array_equal(a.log_weights, b.log_weights))
        failures["gibbs"] += int(not np.array_equal(
            a.log_weights, gibbs_log_weights(a.cumulative_task_losses, rate)))
        failures["norm"] += int(abs(a.weights.sum() - 1.0) > 1e-12)
    # the within-task cloud keeps the same Gibbs form through its own update
    D = TrigDictionary(4)
    spec = WeightedL1BallSpec.from_budget(4, 1.0)
    loss = clipped_absolute(1.0)
    for _ in range(200):
        parts = sample_weighted_l1_ball(spec, rng, size=int(rng.integers(1, 200)))
        m = len(parts)
        cloud = LinkParticleCloud(parts, np.full(m, -np.log(m)), np.zeros(m),
                                  float(rng.uniform(0, 5)), D)
        for z, y in rng.uniform(-1, 1, size=(10, 2)):
            cloud.update(z, y, loss)
            failures["gibbs"] += int(not np.array_equal(
                cloud.log_weights,
                gibbs_log_weights(cloud.cumulative_losses, cloud.learning_rate)))
            failures["norm"] += int(abs(cloud.weights.sum() - 1.0) > 1e-12)
    report(5, "exponential-weights algebra", sum(failures.values()) == 0,
           f"{instances} meta instances + 200 link clouds; failures {failures}")


def test_criterion_6_sampler_laws():
    rng = substream(0, "sampler-laws")
    worst, violations = 0.0, 0
    for d in (1, 2, 3, 5, 10):
        spec = L1BallSpec(d, 1.5)
        x = sample_l1_ball(spec, rng, size=100_000)
        r = np.abs(x).sum(axis=1) / spec.radius
        violations += int(np.sum(r > 1.0))
        worst = max(worst, stats.kstest(r ** d, "uniform").statistic)
    for S in (1, 2, 4, 8):
        spec = WeightedL1BallSpec.from_budget(S, 1.0)
        b = sample_weighted_l1_ball(spec, rng, size=100_000)
        r = weighted_l1_norm(b) / spec.radius
        violations += int(np.sum(r > 1.0))
        worst = max(worst, stats.kstest(r ** S, "uniform").statistic)
    report(6, "sampler laws", worst < 0.01 and violations == 0,
           f"max KS {worst:.4f} (need < 0.01); membership violations {violations}")


def test_criterion_7_oracle_equivalence():
    spec = WeightedL1BallSpec.from_budget(2, 1.0)
    D = TrigDictionary(2)
    loss = clipped_squared(9.0, prediction_range=3.0)
    grid = weighted_ball_grid(spec.radius, 1e-3)
    worst_diff, worst_gap = 0.0, 0.0
    for seed in range(50):
        rng = substream(seed, "oracle-equivalence")
        theta = rng.standard_normal(3)
        theta /= np.abs(theta).sum()
        X = rng.uniform(-1, 1, size=(16, 3)) / np.sqrt(3)
        y = rng.uniform(-1, 1, size=16)
        design = D.design(index_project(theta, X, 1.0))
        fw = frank_wolfe(design, y, loss, spec)
        fit = best_link(X, y, theta, loss, spec, D)
        assert fit.value <= fw.value
        worst_diff = max(worst_diff, abs(fw.value - brute_force_link(design, y, loss, grid)))
        worst_gap = max(worst_gap, fw.gap)
    report(7, "oracle equivalence", worst_diff <= 1e-3 and worst_gap < 1e-6,
           f"50 instances; max |FW - grid| {worst_diff:.2e} (need <= 1e-3); "
           f"max FW gap {worst_gap:.2e} (need < 1e-6)")


def test_criterion_8_realizable_sanity():
    s = generate(StreamConfig(T=10, n=64, d=3, seed=0))
    loss = clipped_absolute(1.0)
    cfg = LearnerConfig(loss=loss, within=WithinTaskConfig(n_particles=128), n_particles=64)
    oracle = best_theta(s, loss, cfg.within.ball, cfg.within.dictionary, "known-theta-star")
    trace = run_stream(s, cfg, seed=0, oracle=oracle)
    ok = oracle.comparator_value < 1e-9 and np.all(trace.running_regret >= 0)
    report(8, "realizable sanity", ok,
           f"comparator {oracle.comparator_value:.1e} (need < 1e-9); "
           f"min running regret {trace.running_regret.min():.4f} (need >= 0)")
