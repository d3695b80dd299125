"""Stackelberg commitment with standard and satisfaction followers.

The solvers live in :mod:`stacksat.stackelberg`, the simplex in
:mod:`stacksat.lp`, learning dynamics in :mod:`stacksat.regret` and the
random-game sweeps in :mod:`stacksat.experiments`.
"""
from stacksat.game import BimatrixGame, find_pure_ne, load_game, save_game
from stacksat.stackelberg import (
    StackelbergSolution,
    pure_commit_sat,
    pure_commit_standard,
    solve_multi_lp_sat,
    solve_multi_lp_standard,
    solve_single_lp_standard,
)

__all__ = [
    "BimatrixGame",
    "StackelbergSolution",
    "find_pure_ne",
    "load_game",
    "pure_commit_sat",
    "pure_commit_standard",
    "save_game",
    "solve_multi_lp_sat",
    "solve_multi_lp_standard",
    "solve_single_lp_standard",
]
