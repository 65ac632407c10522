"""Trigonometric dictionary on [-1, 1] and link-function evaluation."""
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError
from .geometry import weighted_l1_norm

MAX_DICTIONARY_SIZE = 64


def _check_domain(z):
    z = np.asarray(z, dtype=float)
    if np.any(np.abs(z) > 1.0) or np.any(np.isnan(z)):
        raise DomainError("dictionary arguments must lie in [-1, 1]")
    return z


@dataclass(frozen=True)
class TrigDictionary:
    """phi_1 = 1, phi_2k(z) = cos(pi k z), phi_2k+1(z) = sin(pi k z)."""

    size: int

    def __post_init__(self):
        if int(self.size) != self.size or self.size < 1:
            raise ConfigError("must be a positive integer", field="size")
        if self.size > MAX_DICTIONARY_SIZE:
            raise ConfigError(f"capped at {MAX_DICTIONARY_SIZE}", field="size")

    @property
    def frequencies(self):
        """Angular frequency (in units of pi) of each basis element."""
        j = np.arange(1, self.size + 1)
        return j // 2

    def basis_eval(self, j, z):
        """Evaluate the 1-based basis element ``j`` at ``z``."""
        if int(j) != j or not 1 <= j <= self.size:
            raise IndexError(f"basis index {j} outside 1..{self.size}")
        z = _check_domain(z)
        if j == 1:
            return np.ones_like(z)[()]
        k = j // 2
        if j % 2 == 0:
            return np.cos(np.pi * k * z)[()]
        return np.sin(np.pi * k * z)[()]

    def design(self, z):
        """Matrix of all basis values, shape ``z.shape + (S,)``."""
        z = _check_domain(z)
        return self._design_unchecked(z)

    def _design_unchecked(self, z):
        z = np.asarray(z, dtype=float)
        arg = np.pi * z[..., None] * self.frequencies
        j = np.arange(1, self.size + 1)
        out = np.where(j % 2 == 0, np.cos(arg), np.sin(arg))
        out[..., 0] = 1.0
        return out


def index_project(theta, x, scale):
    """Map ``theta . x`` into the dictionary domain: ``clip(theta.x / M, -1, 1)``.

    ``x`` may be a single vector or a matrix of row vectors; ``theta`` may
    also be a matrix, in which case the result has shape ``(n_theta, n_x)``.
    """
    if not scale > 0:
        raise ConfigError("input bound M must be positive", field="M")
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x, dtype=float)
    if theta.ndim == 2 and x.ndim == 2:
        dot = theta @ x.T
    else:
        dot = x @ theta if x.ndim == 2 else theta @ x
    return np.clip(dot / scale, -1.0, 1.0)


@dataclass(frozen=True)
class LinkFunction:
    """h = sum_j beta_j phi_j for a fixed coefficient vector."""

    coefficients: np.ndarray
    dictionary: TrigDictionary
    lipschitz: float = field(init=False)

    def __post_init__(self):
        beta = np.array(self.coefficients, dtype=float)
        if beta.shape != (self.dictionary.size,):
            raise ConfigError(
                f"expected {self.dictionary.size} coefficients, got shape {beta.shape}",
                field="coefficients")
        beta.setflags(write=False)
        object.__setattr__(self, "coefficients", beta)
        # |d/dz phi_j| <= pi * j, hence a pi * ||beta||_S Lipschitz bound
        object.__setattr__(self, "lipschitz", float(np.pi * weighted_l1_norm(beta)))

    @property
    def norm(self):
        return float(weighted_l1_norm(self.coefficients))

    def __call__(self, z):
        return link_eval(self, z)


def link_eval(h, z):
    """Evaluate ``h`` at ``z`` (scalar or array) in [-1, 1]."""
    return (h.dictionary.design(z) @ h.coefficients)[()]
