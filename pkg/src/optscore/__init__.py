"""Sparse multi-class discriminant analysis by penalized optimal scoring."""

from .population import PopulationModel, decaying_model, derive, model_from_contrasts, null_model, sparse_model
from .scores import build_score_matrix, indicator_matrix, response_from_labels, verify_score_constraints
from .simulate import Dataset, sample_dataset
from .solver import FitResult, Problem, SolverOptions, fit, lambda_max, lambda_path, theoretical_lambda

__version__ = "0.1.0"
