"""Approximation Vector Machines: kernel online learning with a bounded model size."""

__version__ = "0.1.0"

from .coverage import CellAssignment, Coverage
from .data import Dataset, load_libsvm, normalize_minmax, parse_libsvm, shuffle
from .kernel import KernelSpec, delta_phi, kernel_eval
from .learner import Learner, LearnerConfig, run_batch, run_stream, schedule_prob
from .loss import LossSpec, loss_grad_scalar, loss_value
from .metrics import MetricsTrace, online_metrics_update
from .model import AveragedModel, KernelModel, objective
from .multiclass import MulticlassLearner, MulticlassModel
from .sparse import SparseVector

__all__ = [
    "AveragedModel", "CellAssignment", "Coverage", "Dataset", "KernelModel", "KernelSpec",
    "Learner", "LearnerConfig", "LossSpec", "MetricsTrace", "MulticlassLearner",
    "MulticlassModel", "SparseVector", "delta_phi", "kernel_eval", "load_libsvm",
    "loss_grad_scalar", "loss_value", "normalize_minmax", "objective",
    "online_metrics_update", "parse_libsvm", "run_batch", "run_stream", "schedule_prob",
    "shuffle",
]
