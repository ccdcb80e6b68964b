"""Purely sequential minimum-risk point estimation of the Gini index."""

__version__ = "0.1.0"

from .engine import StoppingResult, StudyConfig, run_sequential, threshold
from .errors import (
    InsufficientDataError,
    InsufficientSampleError,
    RejectedObservationError,
    ReplicationError,
    SeqGiniError,
    ValidationError,
)
from .estimators import EstimateSnapshot, EstimatorState, gini, gmd, s_w_squared, tau_hat, v_squared
from .harness import ReplicationSummary, run_fixed_n_study, run_second_order_batches, run_study
from .population import STUDY_MODELS, PopulationModel, PopulationParams, SamplerSource, population_params
from .risk import RiskReport, empirical_mse, empirical_report, fixed_n_risk, optimal_n

__all__ = [
    "EstimateSnapshot",
    "EstimatorState",
    "InsufficientDataError",
    "InsufficientSampleError",
    "STUDY_MODELS",
    "PopulationModel",
    "PopulationParams",
    "RejectedObservationError",
    "ReplicationError",
    "ReplicationSummary",
    "RiskReport",
    "SamplerSource",
    "SeqGiniError",
    "StoppingResult",
    "StudyConfig",
    "ValidationError",
    "empirical_mse",
    "empirical_report",
    "fixed_n_risk",
    "gini",
    "gmd",
    "optimal_n",
    "population_params",
    "run_fixed_n_study",
    "run_second_order_batches",
    "run_sequential",
    "run_study",
    "s_w_squared",
    "tau_hat",
    "threshold",
    "v_squared",
]
