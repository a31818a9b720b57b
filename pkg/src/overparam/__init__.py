"""Gram matrices, gradient-descent training and concentration checks for
over-parametrized two-layer ReLU networks."""

from .data import Dataset, gen_gaussian_sphere, gen_orthogonal, load_csv, make_labels, save_csv, theta
from .errors import (
    DivergenceError,
    InputError,
    OverparamError,
    ParseError,
    SingularMatrixError,
    ValidationError,
)
from .gram import (
    AssumptionConstants,
    GramKind,
    GramMatrix,
    estimate_constants,
    h_at_step,
    h_of_w,
    h_perp,
    hcts,
    hcts_matrix,
    hdis,
)
from .network import NetworkState, TrainConfig, TrainingTrace, forward, gradient, init, loss, train
from .rng import RngSeed, make_rng
from .theory import TheoremVariant

__version__ = "0.1.0"

__all__ = [
    "AssumptionConstants", "Dataset", "DivergenceError", "GramKind", "GramMatrix", "InputError",
    "NetworkState", "OverparamError", "ParseError", "RngSeed", "SingularMatrixError",
    "TheoremVariant", "TrainConfig", "TrainingTrace", "ValidationError", "estimate_constants",
    "forward", "gen_gaussian_sphere", "gen_orthogonal", "gradient", "h_at_step", "h_of_w",
    "h_perp", "hcts", "hcts_matrix", "hdis", "init", "load_csv", "loss", "make_labels",
    "make_rng", "save_csv", "theta", "train",
]
