"""Per-task regret traces and their CSV form."""
import csv
from dataclasses import dataclass, field

import numpy as np

COLUMNS = ("t", "learner_loss", "oracle_loss", "running_regret")


@dataclass
class RegretTrace:
    """Per-task learner and comparator losses.

    ``running_regret[t]`` is the mean learner loss over tasks ``0..t`` minus
    the mean comparator loss over the same tasks.  With the known-index
    comparator this is an upper bound on the true regret.
    """

    learner_loss: np.ndarray
    oracle_loss: np.ndarray
    expected_loss: np.ndarray = None
    config: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)
    outcomes: list = field(default=None, repr=False)

    def __post_init__(self):
        self.learner_loss = np.asarray(self.learner_loss, dtype=float)
        self.oracle_loss = np.asarray(self.oracle_loss, dtype=float)
        if self.learner_loss.shape != self.oracle_loss.shape or self.learner_loss.ndim != 1:
            raise ValueError("learner and oracle losses need matching 1-d shapes")
        if len(self.learner_loss) == 0:
            raise ValueError("a trace needs at least one task")

    @property
    def T(self):
        return len(self.learner_loss)

    @property
    def running_regret(self):
        k = np.arange(1, self.T + 1)
        return np.cumsum(self.learner_loss) / k - np.cumsum(self.oracle_loss) / k

    @property
    def compound_regret(self):
        return float(self.running_regret[-1])


def emit_trace(trace, path):
    """Write ``t,learner_loss,oracle_loss,running_regret`` with 17 significant digits."""
    if trace.T < 1:
        raise ValueError("refusing to write an empty trace")
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            for t, (a, b, r) in enumerate(zip(trace.learner_loss, trace.oracle_loss,
                                              trace.running_regret)):
                w.writerow([t, f"{a:.17g}", f"{b:.17g}", f"{r:.17g}"])
    except OSError as exc:
        raise OSError(f"cannot write trace to {path}: {exc}") from exc


def read_trace(path):
    """Parse a trace CSV; returns the trace and the stored running-regret column."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = [[float(v) for v in r] for r in reader if r]
    data = np.array(rows).reshape(-1, 4)
    return RegretTrace(data[:, 1], data[:, 2]), data[:, 3]
