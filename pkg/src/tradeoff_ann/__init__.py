"""Approximate near-neighbour search on the sphere with a tunable
space/query-time trade-off, via random spherical caps."""

from .caps import alpha_beta, cap_prob, joint_cap_prob, log_cap_prob, log_joint_cap_prob
from .solver import InfeasibleError, TradeoffPoint, curve_point, solve_thresholds

__all__ = [
    "alpha_beta", "cap_prob", "joint_cap_prob", "log_cap_prob", "log_joint_cap_prob",
    "InfeasibleError", "TradeoffPoint", "curve_point", "solve_thresholds",
]
__version__ = "0.1.0"
