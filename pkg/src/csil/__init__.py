"""Continual single-index learning with exponentially weighted aggregation."""
from .dictionary import LinkFunction, TrigDictionary, index_project, link_eval
from .errors import ConfigError, DomainError, ProtocolError, UnsupportedConfigurationError
from .geometry import (L1BallSpec, WeightedL1BallSpec, sample_l1_ball,
                       sample_weighted_l1_ball, weighted_l1_norm)
from .losses import LossSpec, clipped_absolute, clipped_squared, hinge_clipped, loss_eval
from .meta_learner import (ContinualLearner, IndexParticleCloud, LearnerConfig, init_meta,
                           process_task_mc_mode, process_task_sample_mode, run_stream)
from .oracle import OracleResult, best_link, best_theta, compound_regret
from .taskgen import StreamConfig, TaskStream, generate
from .trace import RegretTrace, emit_trace, read_trace
from .within_task import LinkParticleCloud, WithinTaskConfig, init_cloud, run_task

__version__ = "0.1.0"
