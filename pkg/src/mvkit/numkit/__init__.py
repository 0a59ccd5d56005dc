"""Numerical building blocks shared by the learning pipelines."""
from .kernels import KernelSpec, kernel_matrix, laplacian
from .linalg import ridge_solve, spd_solve
from .stats import classification_metrics, rmse, t_test_one_tailed, welch_t
from .stiefel import StiefelProblem, StiefelResult, feasibility, stiefel_minimize
from .svm import SvmSolution, kkt_residual, svm_train

__all__ = [
    "KernelSpec", "kernel_matrix", "laplacian", "ridge_solve", "spd_solve",
    "classification_metrics", "rmse", "t_test_one_tailed", "welch_t",
    "StiefelProblem", "StiefelResult", "feasibility", "stiefel_minimize",
    "SvmSolution", "kkt_residual", "svm_train",
]
