"""Uniform samplers on the l1 ball and on the weighted l1 ball B_S(R)."""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class L1BallSpec:
    """The ball {theta in R^d : sum |theta_k| <= radius}."""

    dimension: int
    radius: float = 1.0

    def __post_init__(self):
        if int(self.dimension) != self.dimension or self.dimension < 1:
            raise ConfigError("must be a positive integer", field="dimension")
        if not self.radius > 0:
            raise ConfigError("must be positive", field="radius")


@dataclass(frozen=True)
class WeightedL1BallSpec:
    """The ball {beta in R^S : sum_j j |beta_j| <= radius}.

    For a dictionary budget ``C2`` the prior support uses ``radius = C2 + 1``;
    see :meth:`from_budget`.
    """

    dictionary_size: int
    radius: float

    def __post_init__(self):
        if int(self.dictionary_size) != self.dictionary_size or self.dictionary_size < 1:
            raise ConfigError("must be a positive integer", field="dictionary_size")
        if not self.radius > 0:
            raise ConfigError("must be positive", field="radius")

    @classmethod
    def from_budget(cls, dictionary_size, c2):
        return cls(dictionary_size, c2 + 1.0)

    @property
    def index_weights(self):
        return np.arange(1, self.dictionary_size + 1, dtype=float)


def sample_l1_ball(spec, rng, size=None):
    """Draw uniformly from the l1 ball described by ``spec``.

    A uniform point on the simplex (normalised exponential variates) gets
    independent random signs and is scaled by ``radius * U**(1/d)``, whose
    CDF is ``r**d``.  This is exact in every dimension and rejection free.

    Parameters
    ----------
    spec : L1BallSpec
    rng : numpy.random.Generator
    size : int, optional
        Number of draws. ``None`` returns a single vector of shape ``(d,)``.

    Returns
    -------
    ndarray of shape ``(d,)`` or ``(size, d)``
    """
    d = spec.dimension
    k = 1 if size is None else int(size)
    e = rng.exponential(size=(k, d))
    simplex = e / e.sum(axis=1, keepdims=True)
    signs = np.where(rng.random(size=(k, d)) < 0.5, -1.0, 1.0)
    r = rng.random(size=(k, 1)) ** (1.0 / d)
    out = spec.radius * r * signs * simplex
    return out[0] if size is None else out


def sample_weighted_l1_ball(spec, rng, size=None):
    """Draw from the image of the uniform measure on B_S(radius).

    A uniform draw ``u`` from the plain l1 ball of the same radius is mapped
    to ``beta_j = u_j / j``.
    """
    u = sample_l1_ball(L1BallSpec(spec.dictionary_size, spec.radius), rng, size)
    return u / spec.index_weights


def weighted_l1_norm(beta):
    """``sum_j j |beta_j|`` along the last axis."""
    beta = np.asarray(beta, dtype=float)
    j = np.arange(1, beta.shape[-1] + 1, dtype=float)
    return np.sum(j * np.abs(beta), axis=-1)


def sample_l1_sphere(dimension, rng, size=None):
    """Uniform ball draw rescaled onto the unit l1 sphere."""
    theta = sample_l1_ball(L1BallSpec(dimension, 1.0), rng, size)
    return theta / np.sum(np.abs(theta), axis=-1, keepdims=True)
