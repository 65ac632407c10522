"""Synthetic continual task streams with a shared index and per-task links."""
import json
from dataclasses import asdict, dataclass

import numpy as np

from .dictionary import TrigDictionary, index_project
from .errors import ConfigError
from .geometry import WeightedL1BallSpec, sample_l1_sphere, sample_weighted_l1_ball
from .rng import substream

NOISE_KINDS = ("none", "uniform")


@dataclass(frozen=True)
class StreamConfig:
    T: int = 20
    n: int = 256
    d: int = 3
    M: float = 1.0
    S_true: int = 4
    C2_true: float = 1.0
    noise: str = "none"
    noise_bound: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("T", "n", "d", "S_true"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigError("must be a positive integer", field=name)
        if not self.M > 0:
            raise ConfigError("must be positive", field="M")
        if not self.C2_true > 0:
            raise ConfigError("must be positive", field="C2_true")
        if self.noise not in NOISE_KINDS:
            raise ConfigError(f"must be one of {NOISE_KINDS}", field="noise")
        if self.noise_bound < 0 or (self.noise == "uniform" and self.noise_bound == 0):
            raise ConfigError("uniform noise needs a positive bound", field="noise_bound")
        if self.seed < 0:
            raise ConfigError("must be non-negative", field="seed")

    @property
    def label_bound(self):
        """A-priori bound on |y|: |h(z)| <= sum|beta_j| <= C2_true, plus noise."""
        return self.C2_true + (self.noise_bound if self.noise == "uniform" else 0.0)


@dataclass
class Task:
    X: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.y)


@dataclass
class TaskStream:
    tasks: list
    config: StreamConfig
    theta_star: np.ndarray
    betas: np.ndarray

    @property
    def T(self):
        return len(self.tasks)


def _uniform_l2_ball(rng, n, d, radius):
    g = rng.standard_normal((n, d))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    r = radius * rng.random((n, 1)) ** (1.0 / d)
    return g * r


def generate(config):
    """Materialise the stream for ``config``; each task has its own sub-stream,
    so a shorter stream is a prefix of a longer one with the same seed."""
    theta = sample_l1_sphere(config.d, substream(config.seed, "stream/theta"))
    dictionary = TrigDictionary(config.S_true)
    ball = WeightedL1BallSpec(config.S_true, config.C2_true)
    tasks, betas = [], []
    for t in range(config.T):
        rng = substream(config.seed, f"stream/task/{t}")
        beta = sample_weighted_l1_ball(ball, rng)
        X = _uniform_l2_ball(rng, config.n, config.d, config.M)
        z = index_project(theta, X, config.M)
        y = dictionary.design(z) @ beta
        if config.noise == "uniform":
            y = y + rng.uniform(-config.noise_bound, config.noise_bound, size=config.n)
        tasks.append(Task(X, y))
        betas.append(beta)
    return TaskStream(tasks, config, theta, np.array(betas))


def write_stream(stream, csv_path, provenance_path):
    """CSV ``task,index,y,x1..xd`` plus a JSON provenance sidecar."""
    d = stream.config.d
    header = ",".join(["task", "index", "y"] + [f"x{k + 1}" for k in range(d)])
    with open(csv_path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for t, task in enumerate(stream.tasks):
            for i in range(len(task)):
                row = [str(t), str(i), f"{task.y[i]:.17g}"]
                row += [f"{v:.17g}" for v in task.X[i]]
                fh.write(",".join(row) + "\n")
    prov = {
        "config": asdict(stream.config),
        "theta_star": [float(v) for v in stream.theta_star],
        "betas": [[float(v) for v in b] for b in stream.betas],
    }
    with open(provenance_path, "w", newline="\n") as fh:
        json.dump(prov, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_stream(csv_path, provenance_path=None, M=None):
    """Inverse of :func:`write_stream`.

    Without provenance, ``config`` is rebuilt from the shapes, ``theta_star``
    and ``betas`` are ``None``, and the input bound is ``M`` (default: the
    largest input norm in the file).
    """
    data = np.loadtxt(csv_path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        raise ConfigError("stream file has no rows", field="stream")
    task_ids = data[:, 0].astype(int)
    tasks = []
    for t in range(task_ids.max() + 1):
        rows = data[task_ids == t]
        rows = rows[np.argsort(rows[:, 1], kind="stable")]
        tasks.append(Task(rows[:, 3:].copy(), rows[:, 2].copy()))
    if provenance_path is not None:
        with open(provenance_path) as fh:
            prov = json.load(fh)
        config = StreamConfig(**prov["config"])
        return TaskStream(tasks, config, np.array(prov["theta_star"]),
                          np.array(prov["betas"]))
    n = len(tasks[0])
    d = data.shape[1] - 3
    if M is None:
        M = float(np.max(np.linalg.norm(data[:, 3:], axis=1))) or 1.0
    config = StreamConfig(T=len(tasks), n=n, d=d, M=M)
    return TaskStream(tasks, config, None, None)
