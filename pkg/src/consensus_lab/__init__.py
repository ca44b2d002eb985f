"""Simulation and condition checking for linear consensus dynamics with time-varying connections."""

__version__ = "0.1.0"

from .errors import CapacityError, DomainError, NumericError, ScenarioNotFound
from .schedule import (
    ConnectionSchedule,
    Constant,
    Hyperbolic,
    InvCbrtRight,
    InvSqrtLeft,
    PiecewiseFunction,
    TimeMap,
    Zero,
    time_rescale,
    window_integral,
)
from .dynamics import AgentState, SimConfig, Trajectory, simulate, simulate_multi_d
from .graphs import DirectedGraph, SelectorOracle, gamma_reduce, globally_reachable_nodes, pairwise_coverage
from .conditions import (
    ConditionParams,
    ConditionReport,
    CutBalanceParams,
    Verdict,
    build_limit_graph_thm3,
    build_limit_graph_thm6,
    build_moreau_graph,
    certify,
    check_cut_balance,
    check_isc,
    check_property_B,
    check_property_C,
    estimate_limits,
    estimate_property_A,
)
from .analysis import NonlinearInteraction, diagnose, linearize_nonlinear, project, simulate_nonlinear
from .scenarios import SCENARIOS, Scenario, get_scenario
