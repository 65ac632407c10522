"""Experiment configuration files (TOML) with schema validation.

Every section and key is optional; missing values take the defaults below.
Unknown keys are rejected so typos surface as configuration errors.
"""
from dataclasses import asdict, dataclass, field, fields, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .losses import make_loss
from .meta_learner import LearnerConfig
from .oracle import STRATEGIES
from .taskgen import StreamConfig
from .within_task import WithinTaskConfig


@dataclass(frozen=True)
class LossSection:
    kind: str = "clipped-absolute"
    bound: float = 1.0
    prediction_range: object = "auto"


@dataclass(frozen=True)
class LearnerSection:
    mode: str = "sample"
    N: int = 256
    N1: int = 256
    S: int = 4
    C2: float = 1.0
    eta: object = "auto"
    zeta: object = "auto"
    n_draw: int = 16


@dataclass(frozen=True)
class OracleSection:
    strategy: str = "known-theta-star"
    grid_step: float = 0.05
    n_random: int = 1000

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"must be one of {STRATEGIES}", field="strategy")
        if not 0 < self.grid_step <= 1:
            raise ConfigError("must lie in (0, 1]", field="grid_step")
        if self.n_random < 1:
            raise ConfigError("must be positive", field="n_random")


@dataclass(frozen=True)
class SweepSection:
    T: tuple = (20, 200)
    n: tuple = ()
    N: tuple = ()
    N1: tuple = ()
    eta: tuple = ()
    zeta: tuple = ()
    replicates: int = 3

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("must be positive", field="replicates")


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    stream: StreamConfig = field(default_factory=StreamConfig)
    loss: LossSection = field(default_factory=LossSection)
    learner: LearnerSection = field(default_factory=LearnerSection)
    oracle: OracleSection = field(default_factory=OracleSection)
    sweep: SweepSection = field(default_factory=SweepSection)

    def with_seed(self, seed):
        return replace(self, seed=seed, stream=replace(self.stream, seed=seed))

    def with_mode(self, mode):
        return replace(self, learner=replace(self.learner, mode=mode))

    def with_stream(self, **changes):
        return replace(self, stream=replace(self.stream, **changes))

    def with_learner(self, **changes):
        return replace(self, learner=replace(self.learner, **changes))

    def make_loss(self):
        pr = self.loss.prediction_range
        if pr == "auto":
            # sup|h| <= C2 + 1 on the prior support, plus the label bound
            pr = self.learner.C2 + 1.0 + self.stream.label_bound
        return make_loss(self.loss.kind, self.loss.bound, pr)

    def learner_config(self, input_bound=None):
        lr = self.learner
        within = WithinTaskConfig(
            dictionary_size=lr.S,
            budget=lr.C2,
            n_particles=lr.N1,
            learning_rate=None if lr.zeta == "auto" else float(lr.zeta),
            input_bound=self.stream.M if input_bound is None else input_bound,
        )
        return LearnerConfig(
            loss=self.make_loss(),
            within=within,
            n_particles=lr.N,
            learning_rate=lr.eta if lr.eta == "auto" else float(lr.eta),
            mode=lr.mode,
            n_draw=lr.n_draw,
        )

    def as_dict(self):
        return asdict(self)


LOSS_FIELDS = ("kind", "bound", "lipschitz", "prediction_range")


def _auto_or_number(value, name):
    if value == "auto":
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError("must be a number or \"auto\"", field=name)
    return float(value)


def _build(cls, raw, section):
    if not isinstance(raw, dict):
        raise ConfigError("must be a table", field=section)
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(raw) - set(known))
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(unknown)}", field=section)
    kwargs = {}
    for key, value in raw.items():
        name = f"{section}.{key}"
        default = known[key].default
        if key in ("eta", "zeta", "prediction_range"):
            value = _auto_or_number(value, name)
        elif cls is SweepSection and key != "replicates":
            if not isinstance(value, list):
                raise ConfigError("must be a list", field=name)
            value = tuple(v if v == "auto" else (float(v) if key in ("eta", "zeta") else v)
                          for v in value)
        elif isinstance(default, bool):
            pass
        elif isinstance(default, int) and not isinstance(value, int):
            raise ConfigError("must be an integer", field=name)
        elif isinstance(default, float):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError("must be a number", field=name)
            value = float(value)
        elif isinstance(default, str) and not isinstance(value, str):
            raise ConfigError("must be a string", field=name)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except ConfigError as exc:
        if exc.field and "." not in exc.field:
            raise ConfigError(str(exc).split(": ", 1)[-1], field=f"{section}.{exc.field}") from None
        raise


def parse_config(raw):
    """Validate a parsed TOML document and return an :class:`ExperimentConfig`."""
    allowed = {"seed", "stream", "loss", "learner", "oracle", "sweep"}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) {', '.join(unknown)}", field="config")
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("must be a non-negative integer", field="seed")
    stream_raw = dict(raw.get("stream", {}))
    if "seed" in stream_raw:
        raise ConfigError("set the seed at top level", field="stream.seed")
    stream_raw["seed"] = seed
    cfg = ExperimentConfig(
        seed=seed,
        stream=_build(StreamConfig, stream_raw, "stream"),
        loss=_build(LossSection, raw.get("loss", {}), "loss"),
        learner=_build(LearnerSection, raw.get("learner", {}), "learner"),
        oracle=_build(OracleSection, raw.get("oracle", {}), "oracle"),
        sweep=_build(SweepSection, raw.get("sweep", {}), "sweep"),
    )
    # fail early on combinations only checked when objects are built
    try:
        cfg.learner_config()
    except ConfigError as exc:
        section = "loss" if exc.field in LOSS_FIELDS else "learner"
        if exc.field and "." not in exc.field:
            raise ConfigError(str(exc).split(": ", 1)[-1],
                              field=f"{section}.{exc.field}") from None
        raise
    return cfg


def load_config(path):
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found", field="--config") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}", field="--config") from None
    return parse_config(raw)
