"""Exponentially weighted aggregation over link functions for a fixed index.

The posterior over coefficient vectors is represented by a cloud of prior
draws whose log-weights are ``-rate * cumulative_loss`` normalised by
log-sum-exp.  By default particles never move; the ``resample-move`` scheme
rejuvenates them when the weights degenerate.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .dictionary import MAX_DICTIONARY_SIZE, TrigDictionary, index_project
from .errors import ConfigError, DomainError, ProtocolError
from .geometry import WeightedL1BallSpec, sample_weighted_l1_ball, weighted_l1_norm

logger = logging.getLogger(__name__)

ESS_WARN_FRACTION = 0.01
SCHEMES = ("static", "resample-move")


def gibbs_log_weights(cumulative, rate):
    """Normalised log-weights of ``exp(-rate * cumulative)`` along the last axis.

    The minimum is subtracted before scaling, so shifting every entry of a
    row by the same exactly-representable constant gives identical output.
    """
    cumulative = np.asarray(cumulative, dtype=float)
    a = -rate * (cumulative - cumulative.min(axis=-1, keepdims=True))
    return a - np.log(np.sum(np.exp(a), axis=-1, keepdims=True))


def effective_sample_size(log_weights):
    w = np.exp(log_weights)
    return np.sum(w, axis=-1) ** 2 / np.sum(w * w, axis=-1)


def default_link_rate(dictionary_size, loss_bound, n):
    """``sqrt(8 S / (C^2 n))``, the rate that balances the within-task bound."""
    return float(np.sqrt(8.0 * dictionary_size / (loss_bound ** 2 * n)))


def mc_error_term(loss_bound, n_particles, horizon, delta=0.05):
    """Hoeffding/union-bound term ``C sqrt(log(horizon/delta) / (2 N))``."""
    return float(loss_bound * np.sqrt(np.log(horizon / delta) / (2.0 * n_particles)))


@dataclass
class LinkParticleCloud:
    """Weighted particle approximation of the within-task posterior."""

    particles: np.ndarray
    log_weights: np.ndarray
    cumulative_losses: np.ndarray
    learning_rate: float
    dictionary: TrigDictionary

    @property
    def weights(self):
        return np.exp(self.log_weights)

    @property
    def ess(self):
        return float(effective_sample_size(self.log_weights))

    def values(self, z):
        """Every particle's link value at ``z``."""
        return self.particles @ self.dictionary.design(z)

    def predict(self, z):
        """Posterior-mean prediction ``sum_s w_s h_s(z)``."""
        return float(self.weights @ self.values(z))

    def update(self, z, y, loss):
        """Charge every particle its loss on ``(z, y)`` and reweight.

        Returns the per-particle losses of this round.
        """
        round_losses = loss(self.values(z), y)
        self.cumulative_losses = self.cumulative_losses + round_losses
        self.log_weights = gibbs_log_weights(self.cumulative_losses, self.learning_rate)
        return round_losses


def init_cloud(spec, dictionary, n_particles, learning_rate, rng):
    """Draw ``n_particles`` prior particles with uniform weights."""
    if int(n_particles) != n_particles or n_particles < 1:
        raise ConfigError("must be a positive integer", field="N1")
    if learning_rate < 0:
        raise ConfigError("must be non-negative", field="zeta")
    if spec.dictionary_size != dictionary.size:
        raise ConfigError("ball and dictionary sizes differ", field="S")
    particles = sample_weighted_l1_ball(spec, rng, size=n_particles)
    return LinkParticleCloud(
        particles=particles,
        log_weights=np.full(n_particles, -np.log(n_particles)),
        cumulative_losses=np.zeros(n_particles),
        learning_rate=float(learning_rate),
        dictionary=dictionary,
    )


@dataclass(frozen=True)
class WithinTaskConfig:
    """Hyper-parameters of the within-task learner.

    ``learning_rate=None`` selects :func:`default_link_rate` for the task length.
    """

    dictionary_size: int = 4
    budget: float = 1.0
    n_particles: int = 2048
    learning_rate: float = None
    input_bound: float = 1.0
    scheme: str = "static"
    ess_threshold: float = 0.5
    n_moves: int = 2

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"must be one of {SCHEMES}", field="scheme")
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ConfigError("must be a positive integer", field="N1")
        if not 1 <= self.dictionary_size <= MAX_DICTIONARY_SIZE:
            raise ConfigError(f"must lie in [1, {MAX_DICTIONARY_SIZE}]", field="S")
        if not 0.0 < self.ess_threshold <= 1.0:
            raise ConfigError("must lie in (0, 1]", field="ess_threshold")
        if not self.budget >= 0:
            raise ConfigError("must be non-negative", field="C2")
        if not self.input_bound > 0:
            raise ConfigError("must be positive", field="M")
        if self.learning_rate is not None and self.learning_rate < 0:
            raise ConfigError("must be non-negative", field="zeta")

    @property
    def ball(self):
        return WeightedL1BallSpec.from_budget(self.dictionary_size, self.budget)

    @property
    def dictionary(self):
        return TrigDictionary(self.dictionary_size)

    def rate_for(self, loss, n):
        if self.learning_rate is not None:
            return self.learning_rate
        return default_link_rate(self.dictionary_size, loss.bound, n)


@dataclass
class WithinTaskResult:
    per_round_losses: np.ndarray
    predictions: np.ndarray
    average_loss: float = field(init=False)
    final_ess: float = None
    rejuvenations: int = 0

    def __post_init__(self):
        self.average_loss = float(np.mean(self.per_round_losses))


def resample_move(cloud, total_losses, design, y, loss, ball, rng, n_moves):
    """Systematic resampling followed by random-walk Metropolis moves.

    The target is the current Gibbs posterior: uniform prior on the ball
    times ``exp(-rate * total_loss)``, where ``total_loss`` is each
    particle's loss summed over every round seen so far (rows of ``design``
    and ``y``).  Returns the new per-particle total losses; the cloud's
    weights are reset to uniform and its cumulative losses to zero.
    """
    n_part = len(cloud.particles)
    cdf = np.cumsum(cloud.weights)
    u = (rng.random() + np.arange(n_part)) / n_part
    idx = np.minimum(np.searchsorted(cdf, u * cdf[-1], side="right"), n_part - 1)
    particles = cloud.particles[idx]
    total = total_losses[idx]
    S = particles.shape[1]
    cov = np.atleast_2d(np.cov(particles.T)) + 1e-12 * np.eye(S)
    chol = np.linalg.cholesky(cov) * (2.38 / np.sqrt(S))
    rate = cloud.learning_rate
    for _ in range(n_moves):
        prop = particles + rng.standard_normal((n_part, S)) @ chol.T
        inside = weighted_l1_norm(prop) <= ball.radius
        prop_total = np.full(n_part, np.inf)
        if np.any(inside):
            prop_total[inside] = np.sum(loss(prop[inside] @ design.T, y), axis=1)
        accept = np.log(rng.random(n_part)) < -rate * (prop_total - total)
        particles[accept] = prop[accept]
        total[accept] = prop_total[accept]
    cloud.particles = particles
    cloud.cumulative_losses = np.zeros(n_part)
    cloud.log_weights = np.full(n_part, -np.log(n_part))
    return total


def run_task(X, y, theta, config, loss, rng):
    """Run the within-task learner through one task, one round at a time.

    At round ``i`` the index ``z_i`` is formed and a prediction made before
    ``y_i`` is read; only then is every particle charged its loss.  With
    ``scheme="resample-move"`` the cloud is rejuvenated whenever its ESS
    falls below ``ess_threshold * N1``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n == 0:
        raise ProtocolError("task dataset is empty")
    cloud = init_cloud(config.ball, config.dictionary, config.n_particles,
                       config.rate_for(loss, n), rng)
    moving = config.scheme == "resample-move"
    if moving:
        design = np.empty((n, config.dictionary_size))
        total = np.zeros(config.n_particles)
    preds = np.empty(n)
    losses = np.empty(n)
    events = 0
    for i in range(n):
        z = index_project(theta, X[i], config.input_bound)
        preds[i] = cloud.predict(z)
        losses[i] = loss(preds[i], y[i])
        round_losses = cloud.update(z, y[i], loss)
        if moving:
            design[i] = config.dictionary.design(z)
            total += round_losses
            if cloud.ess < config.ess_threshold * config.n_particles:
                total = resample_move(cloud, total, design[:i + 1], y[:i + 1], loss,
                                      config.ball, rng, config.n_moves)
                events += 1
    ess = cloud.ess
    if not moving and ess < ESS_WARN_FRACTION * config.n_particles:
        logger.warning("link cloud ESS %.1f below %.0f%% of %d particles",
                       ess, 100 * ESS_WARN_FRACTION, config.n_particles)
    return WithinTaskResult(losses, preds, final_ess=ess, rejuvenations=events)


class LinkCloudBank:
    """One within-task learner per index, advanced in lockstep.

    All rows share the same prior particles (common random numbers) but keep
    their own cumulative losses, since each sees its own projections.
    """

    def __init__(self, particles, n_rows, learning_rate, dictionary):
        self.particles = particles
        self.learning_rate = float(learning_rate)
        self.dictionary = dictionary
        self.cumulative_losses = np.zeros((n_rows, len(particles)))

    @classmethod
    def draw(cls, config, n_rows, learning_rate, rng):
        particles = sample_weighted_l1_ball(config.ball, rng, size=config.n_particles)
        return cls(particles, n_rows, learning_rate, config.dictionary)

    @property
    def log_weights(self):
        return gibbs_log_weights(self.cumulative_losses, self.learning_rate)

    def values(self, z):
        """Link values, shape ``(n_rows, n_particles)``, for per-row indices ``z``."""
        z = np.asarray(z, dtype=float)
        if np.any(np.abs(z) > 1.0):
            raise DomainError("dictionary arguments must lie in [-1, 1]")
        return self.dictionary._design_unchecked(z) @ self.particles.T

    def predict(self, values):
        """Per-row posterior-mean predictions (unnormalised weights, one exp)."""
        c = self.cumulative_losses
        a = c - c.min(axis=1, keepdims=True)
        a *= -self.learning_rate
        np.exp(a, out=a)
        return np.einsum("ij,ij->i", a, values) / a.sum(axis=1)

    def update(self, values, y, loss):
        self.cumulative_losses += loss(values, y)
