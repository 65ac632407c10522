"""Bounded Lipschitz losses with their constants."""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

KINDS = ("clipped-absolute", "clipped-squared", "hinge-clipped")


@dataclass(frozen=True)
class LossSpec:
    """A loss ``l(yhat, y)`` with values in ``[0, bound]``.

    Attributes
    ----------
    kind : str
        One of ``KINDS``.
    bound : float
        The upper bound ``C``.
    lipschitz : float
        Lipschitz constant ``L1`` in the first argument.
    convex_in_first_arg : bool
        True only if clipping can never activate over the declared
        prediction/label range, so the loss is convex where it is used.
    prediction_range : float or None
        ``sup|yhat| + sup|y|`` declared at construction (``None``: unknown).
    """

    kind: str
    bound: float
    lipschitz: float
    convex_in_first_arg: bool
    prediction_range: float = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown loss kind {self.kind!r}", field="kind")
        if not self.bound > 0:
            raise ConfigError("must be positive", field="bound")
        if not self.lipschitz > 0:
            raise ConfigError("must be positive", field="lipschitz")

    def __call__(self, yhat, y):
        return loss_eval(self, yhat, y)

    def derivative(self, yhat, y):
        """A subgradient in ``yhat`` (0 at kinks and where clipping is active)."""
        yhat = np.asarray(yhat, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "clipped-absolute":
            r = yhat - y
            return np.where(np.abs(r) < self.bound, np.sign(r), 0.0)
        if self.kind == "clipped-squared":
            r = yhat - y
            return np.where(r * r < self.bound, 2.0 * r, 0.0)
        _check_binary(y)
        m = 1.0 - y * yhat
        return np.where((m > 0) & (m < self.bound), -y, 0.0)


def _check_binary(y):
    if not np.all((y == 1.0) | (y == -1.0)):
        raise DomainError("hinge loss needs labels in {-1, +1}")


def loss_eval(spec, yhat, y):
    """Evaluate the loss elementwise; result lies in ``[0, spec.bound]``."""
    yhat = np.asarray(yhat, dtype=float)
    y = np.asarray(y, dtype=float)
    if spec.kind == "clipped-absolute":
        out = np.minimum(np.abs(yhat - y), spec.bound)
    elif spec.kind == "clipped-squared":
        out = np.minimum((yhat - y) ** 2, spec.bound)
    else:
        _check_binary(y)
        out = np.minimum(np.maximum(0.0, 1.0 - y * yhat), spec.bound)
    return out[()]


def clipped_absolute(bound, prediction_range=None):
    """``min(|yhat - y|, C)``, 1-Lipschitz."""
    convex = prediction_range is not None and prediction_range <= bound
    return LossSpec("clipped-absolute", bound, 1.0, convex, prediction_range)


def clipped_squared(bound, prediction_range):
    """``min((yhat - y)^2, C)``, Lipschitz constant ``2 * prediction_range``."""
    if not prediction_range > 0:
        raise ConfigError("must be positive", field="prediction_range")
    convex = prediction_range ** 2 <= bound
    return LossSpec("clipped-squared", bound, 2.0 * prediction_range, convex,
                    prediction_range)


def hinge_clipped(bound, prediction_range=None):
    """``min(max(0, 1 - y yhat), C)`` for labels in {-1, +1}."""
    # with |y| = 1 the range is 1 + sup|yhat|, which bounds 1 - y*yhat
    convex = prediction_range is not None and prediction_range <= bound
    return LossSpec("hinge-clipped", bound, 1.0, convex, prediction_range)


def make_loss(kind, bound, prediction_range=None):
    if kind == "clipped-absolute":
        return clipped_absolute(bound, prediction_range)
    if kind == "clipped-squared":
        if prediction_range is None:
            raise ConfigError("clipped-squared needs a prediction range",
                              field="prediction_range")
        return clipped_squared(bound, prediction_range)
    if kind == "hinge-clipped":
        return hinge_clipped(bound, prediction_range)
    raise ConfigError(f"unknown loss kind {kind!r}", field="kind")
