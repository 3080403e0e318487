"""Bound quantities, restricted eigenvalue estimates, certificates and experiments."""

from .certificates import BoundCertificate, check_certificates, deterministic_certificates, gamma_for_certificate, violations
from .classify import ScoreClassifier, class_centroids, classify, train_classifier
from .experiments import (
    ExperimentReport,
    GridPoint,
    calibrate_constant,
    certificate_experiment,
    concentration_experiment,
    fast_rate_experiment,
    loglog_slope,
    slow_rate_experiment,
)
from .metrics import (
    covariance_deviation,
    estimation_error,
    in_sample_error,
    inf2_norm,
    norm12,
    prediction_risk,
    residual_matrix,
    xte_norm,
)
from .restricted_eigen import REReport, re_constant
