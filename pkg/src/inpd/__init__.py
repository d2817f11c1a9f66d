"""Iterated networked prisoner's dilemma: affect-driven and imitation agents,
a deterministic batch engine, and the five-property statistical battery."""

from .act import (
    Action,
    ActionSemantics,
    DEFAULT_SEMANTICS,
    Epa,
    FRIEND,
    FundamentalSentiment,
    ImpressionModel,
    ImpressionModelError,
    SCROOGE,
    STUDY_SEMANTICS,
    TransientImpression,
    default_impression_model,
    deflection,
    deflection_of_event,
    form_impression,
    grid_search_behavior,
    identity_impression_model,
    load_impression_model,
    nearest_action,
    optimal_behavior,
)
from .agents import AgentConfig, AgentFamily, BeliefState, AgentView, aggregate_opponent_epa
from .engine import M1, M2, M3, RewardMatrix, SimulationLog, RunSpec, run_simulation, run_batch, score_round
from .network import Graph, Neighborhood, degree_stats, erdos_renyi, grid
from .stats import (
    Contingency,
    PropertyReport,
    anticorrelation_report,
    chi2_sf,
    cooperation_histogram,
    cooperation_timeseries,
    g_test,
    mcc_report,
    network_invariance_report,
    one_way_anova,
    pearson,
    stratification_report,
)
from .config import ExperimentConfig, parse_config
from .runner import run_experiment, regenerate_reports

__all__ = [k for k in dir() if not k.startswith("_")]
