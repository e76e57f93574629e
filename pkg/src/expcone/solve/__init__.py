"""Exact solving of the polyhedral path: LP engines, branch-and-bound and cut loops."""

from .bnb import MipResult, Status, branch_and_bound
from .driver import (branch_and_cut, cutting_plane, max_cone_residual, separate_cones,
                     solve_miecp, solve_reformulated)
from .lp import LpModel, LpResult, get_backend, register_backend, solve_lp

__all__ = ["LpModel", "LpResult", "MipResult", "Status", "branch_and_bound", "branch_and_cut",
           "cutting_plane", "get_backend", "max_cone_residual", "register_backend",
           "separate_cones", "solve_lp", "solve_miecp", "solve_reformulated"]
