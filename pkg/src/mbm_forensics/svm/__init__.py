"""RBF support vector machine trained by SMO, one-vs-one multiclass, grid search."""

from .kernel import rbf_kernel, rbf_kernel_matrix
from .model import SvmParams, SvmModel, BinarySvm, GridSearchResult
from .smo import train_binary, audit_kkt, dual_objective
from .multiclass import train_multiclass, predict, classify
from .grid_search import grid_search, DEFAULT_C_GRID, DEFAULT_GAMMA_GRID
from .model_io import write_model, read_model

__all__ = [
    "rbf_kernel",
    "rbf_kernel_matrix",
    "SvmParams",
    "SvmModel",
    "BinarySvm",
    "GridSearchResult",
    "train_binary",
    "audit_kkt",
    "dual_objective",
    "train_multiclass",
    "predict",
    "classify",
    "grid_search",
    "DEFAULT_C_GRID",
    "DEFAULT_GAMMA_GRID",
    "write_model",
    "read_model",
]
