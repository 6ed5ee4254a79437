"""Adaptive locational pricing that steers price-taking users to the welfare optimum."""

from .dcopf import DemandUnservable, DispatchModel, DispatchResult, evaluate_cost, subgradient_check
from .dynamics import RunConfig, RunStatus, Trajectory, lyapunov_series, run, step
from .grid import GridCase, Generator, Line, User, build_ptdf, load_case, validate_case
from .lp import LpProblem, LpSolution, LpStatus, dual_vector, solve_lp
from .oracle import grid_search, joint_lp_kkt_check
from .users import QuadraticDisutility, UserSet, best_response, best_response_profile, grad_disutility

__version__ = "0.1.0"
