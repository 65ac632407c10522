"""Exponentially weighted aggregation over the shared index (EWA-LL / MC-EWA).

The meta posterior is a static cloud of prior draws on the unit l1 ball.
After each task every particle is charged the average loss its own
within-task learner would have suffered, and the weights are recomputed as
the Gibbs measure of the cumulative task losses.
"""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .dictionary import index_project
from .errors import ConfigError, ProtocolError
from .geometry import L1BallSpec, sample_l1_ball
from .rng import substream
from .within_task import (ESS_WARN_FRACTION, LinkCloudBank, WithinTaskConfig,
                          effective_sample_size, gibbs_log_weights)

logger = logging.getLogger(__name__)

MODES = ("sample", "aggregate-mc")
MAX_PARTICLE_PRODUCT = 2 ** 21


def default_meta_rate(loss_bound, horizon):
    """``(2 / C) * sqrt(1 / T)``."""
    return float(2.0 / loss_bound * np.sqrt(1.0 / horizon))


def draw_indices(weights, uniforms):
    """Inverse-CDF categorical draws; ties resolve to the lowest index."""
    cdf = np.cumsum(weights)
    idx = np.searchsorted(cdf, np.asarray(uniforms) * cdf[-1], side="right")
    return np.minimum(idx, len(weights) - 1)


@dataclass
class IndexParticleCloud:
    particles: np.ndarray
    log_weights: np.ndarray
    cumulative_task_losses: np.ndarray
    learning_rate: float

    @property
    def size(self):
        return len(self.particles)

    @property
    def weights(self):
        return np.exp(self.log_weights)

    @property
    def ess(self):
        return float(effective_sample_size(self.log_weights))

    def update(self, task_losses):
        """Add one task's average losses and recompute the Gibbs weights."""
        task_losses = np.asarray(task_losses, dtype=float)
        if task_losses.shape != (self.size,):
            raise ValueError(f"expected {self.size} task losses, got {task_losses.shape}")
        self.cumulative_task_losses = self.cumulative_task_losses + task_losses
        self.log_weights = gibbs_log_weights(self.cumulative_task_losses,
                                             self.learning_rate)


def init_meta(dimension, n_particles, learning_rate, rng, loss_bound=None, horizon=None):
    """Draw the meta cloud from the uniform prior on the unit l1 ball.

    ``learning_rate="auto"`` uses :func:`default_meta_rate`, which needs both
    the loss bound and the number of tasks.
    """
    if int(n_particles) != n_particles or n_particles < 1:
        raise ConfigError("must be a positive integer", field="N")
    if learning_rate == "auto":
        if horizon is None or loss_bound is None:
            raise ConfigError("automatic eta needs the task count T and loss bound C",
                              field="eta")
        learning_rate = default_meta_rate(loss_bound, horizon)
    if not learning_rate >= 0:
        raise ConfigError("must be non-negative", field="eta")
    particles = sample_l1_ball(L1BallSpec(dimension, 1.0), rng, size=n_particles)
    return IndexParticleCloud(
        particles=particles,
        log_weights=np.full(n_particles, -np.log(n_particles)),
        cumulative_task_losses=np.zeros(n_particles),
        learning_rate=float(learning_rate),
    )


@dataclass(frozen=True)
class LearnerConfig:
    """Everything the continual learner needs besides the data."""

    loss: object
    within: WithinTaskConfig = WithinTaskConfig(n_particles=256)
    n_particles: int = 256
    learning_rate: object = "auto"
    mode: str = "sample"
    n_draw: int = 16

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}", field="mode")
        if self.mode == "aggregate-mc" and not self.loss.convex_in_first_arg:
            raise ConfigError(
                "aggregate-mc needs a loss convex in its first argument over the "
                "prediction range (uniform-bound hypothesis); this loss is not",
                field="mode")
        if self.within.scheme != "static":
            raise ConfigError("the lockstep meta learner runs static link clouds only",
                              field="scheme")
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ConfigError("must be a positive integer", field="N")
        if int(self.n_draw) != self.n_draw or self.n_draw < 1:
            raise ConfigError("must be a positive integer", field="n_draw")
        if self.n_particles * self.within.n_particles > MAX_PARTICLE_PRODUCT:
            raise ConfigError(f"N * N1 exceeds {MAX_PARTICLE_PRODUCT}", field="N")


@dataclass
class TaskOutcome:
    """What happened on one task."""

    drawn: np.ndarray
    predictions: np.ndarray
    losses: np.ndarray
    drawn_mean_losses: np.ndarray
    particle_losses: np.ndarray
    expected_loss: float
    link_ess: float = None
    average_loss: float = field(init=False)

    def __post_init__(self):
        self.average_loss = float(np.mean(self.losses))


class TaskSession:
    """Online pass over one task: ``predict(x)`` then ``observe(y)``, repeated.

    Every meta-particle runs its own within-task learner in lockstep (shared
    link particles).  The emitted prediction is the drawn particle's (sample
    mode) or the plain average over ``n_draw`` i.i.d. draws (aggregate-mc).
    ``finish()`` applies the meta update using all particles' task losses.
    """

    def __init__(self, cloud, config, n, rng):
        if n < 1:
            raise ProtocolError("task dataset is empty")
        self.cloud = cloud
        self.config = config
        rate = config.within.rate_for(config.loss, n)
        self.bank = LinkCloudBank.draw(config.within, cloud.size, rate, rng)
        k = 1 if config.mode == "sample" else config.n_draw
        self.drawn = draw_indices(cloud.weights, rng.random(k))
        self.prior_weights = cloud.weights
        self._values = None
        self._row_preds = None
        self._yhat = None
        self._sums = np.zeros(cloud.size)
        self._preds, self._losses, self._jensen = [], [], []
        self.finished = False

    def predict(self, x):
        if self.finished:
            raise ProtocolError("task already finished")
        if self._yhat is not None:
            raise ProtocolError("predict called twice without observe")
        z = index_project(self.cloud.particles, np.asarray(x, dtype=float),
                          self.config.within.input_bound)
        self._values = self.bank.values(z)
        self._row_preds = self.bank.predict(self._values)
        self._yhat = float(np.mean(self._row_preds[self.drawn]))
        return self._yhat

    def observe(self, y):
        if self._yhat is None:
            raise ProtocolError("observe called before predict")
        loss = self.config.loss
        row_losses = loss(self._row_preds, y)
        suffered = float(loss(self._yhat, y))
        self._sums += row_losses
        self.bank.update(self._values, y, loss)
        self._preds.append(self._yhat)
        self._losses.append(suffered)
        self._jensen.append(float(np.mean(row_losses[self.drawn])))
        self._yhat = None
        return suffered

    def finish(self):
        if self._yhat is not None:
            raise ProtocolError("finish called with a pending prediction")
        if not self._losses:
            raise ProtocolError("no rounds were played")
        particle_losses = self._sums / len(self._losses)
        expected = float(self.prior_weights @ particle_losses)
        self.cloud.update(particle_losses)
        self.finished = True
        return TaskOutcome(
            drawn=self.drawn,
            predictions=np.array(self._preds),
            losses=np.array(self._losses),
            drawn_mean_losses=np.array(self._jensen),
            particle_losses=particle_losses,
            expected_loss=expected,
            link_ess=float(np.min(effective_sample_size(self.bank.log_weights))),
        )


def _run_session(cloud, X, y, config, rng):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    session = TaskSession(cloud, config, len(y), rng)
    for i in range(len(y)):
        session.predict(X[i])
        session.observe(y[i])
    return session.finish(), cloud


def process_task_sample_mode(cloud, X, y, config, rng):
    """Draw one index from the meta posterior, suffer its losses, update all."""
    if config.mode != "sample":
        raise ConfigError("config is not in sample mode", field="mode")
    return _run_session(cloud, X, y, config, rng)


def process_task_mc_mode(cloud, X, y, config, rng):
    """Average the predictions of ``n_draw`` i.i.d. index draws, update all."""
    if config.mode != "aggregate-mc":
        raise ConfigError("config is not in aggregate-mc mode", field="mode")
    return _run_session(cloud, X, y, config, rng)


class ContinualLearner:
    """Stateful EWA-LL learner driven by the harness through the online protocol."""

    def __init__(self, dimension, config, seed, horizon=None):
        self.config = config
        self.seed = seed
        self.cloud = init_meta(dimension, config.n_particles, config.learning_rate,
                               substream(seed, "meta/prior"),
                               loss_bound=config.loss.bound, horizon=horizon)
        self.session = None
        self.t = 0
        self._warned = False

    def start_task(self, n):
        if self.session is not None and not self.session.finished:
            raise ProtocolError("previous task not finished")
        self.session = TaskSession(self.cloud, self.config, n,
                                   substream(self.seed, f"task/{self.t}"))

    def predict(self, x):
        return self.session.predict(x)

    def observe(self, y):
        return self.session.observe(y)

    def finish_task(self):
        outcome = self.session.finish()
        self.t += 1
        n1 = self.config.within.n_particles
        if not self._warned and outcome.link_ess < ESS_WARN_FRACTION * n1:
            logger.warning("task %d: smallest link-cloud ESS %.1f is below %.0f%% of "
                           "N1=%d (reported once per run)", self.t - 1, outcome.link_ess,
                           100 * ESS_WARN_FRACTION, n1)
            self._warned = True
        return outcome


def mc_deviation(weights, particle_losses, n_draw, rng):
    """``|mean over n_draw draws of L(theta) - sum_j w_j L(theta_j)|`` for one draw set."""
    idx = draw_indices(weights, rng.random(n_draw))
    return float(abs(np.mean(particle_losses[idx]) - weights @ particle_losses))


def run_stream(stream, config, seed, oracle=None, learner=None, keep_outcomes=False):
    """Drive ``learner`` through ``stream`` under the online protocol.

    For each task: ``start_task(n)``, then ``predict(x_i)`` and ``observe(y_i)``
    strictly alternating, then ``finish_task()``.  The comparator defaults
    to the known-index oracle, an upper bound on the true infimum.
    """
    from .oracle import best_theta
    from .trace import RegretTrace

    if stream.T < 1:
        raise ProtocolError("stream has no tasks")
    if config.within.input_bound != stream.config.M:
        raise ConfigError("learner input bound differs from the stream's M", field="M")
    if learner is None:
        learner = ContinualLearner(stream.config.d, config, seed, horizon=stream.T)
    if oracle is None:
        oracle = best_theta(stream, config.loss, config.within.ball,
                            config.within.dictionary, "known-theta-star")
    start = time.perf_counter()
    outcomes = []
    for task in stream.tasks:
        learner.start_task(len(task))
        for i in range(len(task)):
            learner.predict(task.X[i])
            learner.observe(task.y[i])
        outcomes.append(learner.finish_task())
    elapsed = time.perf_counter() - start
    trace = RegretTrace(
        learner_loss=[o.average_loss for o in outcomes],
        oracle_loss=oracle.per_task_best_losses,
        expected_loss=np.array([o.expected_loss for o in outcomes]),
        timing={"learner_seconds": elapsed},
    )
    if keep_outcomes:
        trace.outcomes = outcomes
    return trace
