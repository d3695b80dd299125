"""Optimal commitment for the leader, standard and satisfaction follower models.

Three families of solver:

* pure commitment, by scanning BR-consistent action pairs;
* one LP per follower action (the follower action is fixed and the LP
  maximises leader utility subject to that action being a best response);
* a single LP over joint distributions whose constraints say the follower
  has no conditional regret (standard model only).

Leader-favouring tie resolution comes for free from the per-action LPs. Exact
objective ties across follower actions go to the lowest follower index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from stacksat.errors import AllInfeasibleError
from stacksat.game import (
    BimatrixGame,
    _check_index,
    expected_utilities,
    follower_br_pure,
    follower_br_sat_pure,
    satisfaction_probability,
    satisfied,
)
from stacksat.lp import INFEASIBLE, BasicFeasibleSeed, LPProblem, solve_lp, solve_lp_seeded

log = logging.getLogger(__name__)


@dataclass
class LPDiagnostic:
    follower_action: int
    status: str
    objective: float | None = None
    pruned: bool = False
    iterations: int = 0


@dataclass
class StackelbergSolution:
    leader_strategy: np.ndarray
    follower_action: int
    leader_utility: float
    follower_utility: float
    follower_sat_prob: float | None = None
    per_lp: list[LPDiagnostic] = field(default_factory=list)
    method: str = ""
    threshold: float | None = None

    def to_dict(self) -> dict:
        """JSON-ready view with 1-based action indices."""
        out = {
            "method": self.method,
            "leader_strategy": {str(i + 1): float(p) for i, p in enumerate(self.leader_strategy) if p > 0},
            "follower_action": self.follower_action + 1,
            "leader_utility": self.leader_utility,
            "follower_utility": self.follower_utility,
        }
        if self.threshold is not None:
            out["threshold"] = self.threshold
            out["follower_sat_prob"] = self.follower_sat_prob
        out["per_lp"] = [
            {
                "follower_action": d.follower_action + 1,
                "status": d.status,
                "objective": d.objective,
                "pruned": d.pruned,
                "iterations": d.iterations,
            }
            for d in self.per_lp
        ]
        return out


@dataclass(frozen=True)
class Pruned:
    """The LP for this follower action is infeasible without being solved."""


def _point_mass(n, k):
    e = np.zeros(n)
    e[k] = 1.0
    return e


def _solution(game, pi, t, method, threshold=None, per_lp=None):
    lu, fu = expected_utilities(game, pi, t)
    sat = None if threshold is None else satisfaction_probability(game, threshold, pi, t)
    return StackelbergSolution(pi, t, lu, fu, sat, per_lp or [], method, threshold)


def _best_pair(game, responses):
    best = None
    for s in range(game.n_leader):
        for t in responses(s):
            # strict > keeps the lexicographically first maximiser
            if best is None or game.u_leader[s, t] > game.u_leader[best]:
                best = (s, t)
    return best


def pure_commit_standard(game: BimatrixGame) -> StackelbergSolution:
    s, t = _best_pair(game, lambda s: follower_br_pure(game, s))
    return _solution(game, _point_mass(game.n_leader, s), t, "pure")


def pure_commit_sat(game: BimatrixGame, threshold: float) -> StackelbergSolution:
    s, t = _best_pair(game, lambda s: follower_br_sat_pure(game, threshold, s))
    return _solution(game, _point_mass(game.n_leader, s), t, "pure", threshold)


def build_sat_constraints(game: BimatrixGame, threshold: float, s_f: int) -> np.ndarray:
    """N^f x N^l matrix of indicator differences for the LP indexed by ``s_f``.

    Entry ``(t, s)`` is ``1{U^f(s,t) >= th} - 1{U^f(s,s_f) >= th}``; the LP
    constraint is ``A @ pi <= 0``.
    """
    _check_index(s_f, game.n_follower, "follower")
    sat = satisfied(game, threshold).astype(np.int8)
    return (sat - sat[:, [s_f]]).T


def prune_or_seed(a: np.ndarray) -> Union[Pruned, BasicFeasibleSeed]:
    """Prune when every column holds a +1; otherwise a vertex to start from.

    The seed uses the lowest-index column ``k`` free of +1 entries: leader
    plays ``e_k`` and the slacks take ``-a[:, k] >= 0``. Variables are ordered
    ``[pi, slack]`` as in :meth:`LPProblem.standard_form`.
    """
    a = np.asarray(a)
    n_f, n_l = a.shape
    clean = np.flatnonzero(~np.any(a == 1, axis=0))
    if not clean.size:
        return Pruned()
    k = int(clean[0])
    values = np.zeros(n_l + n_f)
    values[k] = 1.0
    values[n_l:] = -a[:, k]
    return BasicFeasibleSeed((k, *range(n_l, n_l + n_f)), values)


def sat_lp(game: BimatrixGame, threshold: float, s_f: int) -> LPProblem:
    a = build_sat_constraints(game, threshold, s_f)
    return LPProblem(
        game.u_leader[:, s_f],
        a_le=a,
        b_le=np.zeros(game.n_follower),
        a_eq=np.ones((1, game.n_leader)),
        b_eq=[1.0],
    )


def standard_lp(game: BimatrixGame, s_f: int) -> LPProblem:
    others = [t for t in range(game.n_follower) if t != s_f]
    uf = game.u_follower
    a = (uf[:, others] - uf[:, [s_f]]).T
    return LPProblem(
        game.u_leader[:, s_f],
        a_le=a,
        b_le=np.zeros(len(others)),
        a_eq=np.ones((1, game.n_leader)),
        b_eq=[1.0],
    )


def _strategy(x):
    pi = np.clip(x, 0.0, None)
    return pi / pi.sum()


def _pick(results):
    best = None
    for t, outcome in results:
        if outcome is not None and outcome.optimal:
            if best is None or outcome.objective_value > best[1].objective_value:
                best = (t, outcome)
    return best


def solve_multi_lp_standard(game: BimatrixGame) -> StackelbergSolution:
    results, diags = [], []
    for t in range(game.n_follower):
        out = solve_lp(standard_lp(game, t))
        results.append((t, out))
        diags.append(LPDiagnostic(t, out.status, out.objective_value, False, out.iterations))
    best = _pick(results)
    if best is None:
        raise AllInfeasibleError("every standard per-follower LP reported infeasible")
    t, out = best
    return _solution(game, _strategy(out.x), t, "multi-lp", per_lp=diags)


def solve_multi_lp_sat(game: BimatrixGame, threshold: float) -> StackelbergSolution:
    """Satisfaction-follower commitment; pruned LPs never reach the solver."""
    results, diags = [], []
    for t in range(game.n_follower):
        verdict = prune_or_seed(build_sat_constraints(game, threshold, t))
        if isinstance(verdict, Pruned):
            results.append((t, None))
            diags.append(LPDiagnostic(t, INFEASIBLE, None, True, 0))
            continue
        out = solve_lp_seeded(sat_lp(game, threshold, t), verdict)
        results.append((t, out))
        diags.append(LPDiagnostic(t, out.status, out.objective_value, False, out.iterations))
    best = _pick(results)
    if best is None:
        # Unreachable: if every action were pruned, no action is ever
        # satisfying and all constraint matrices would be zero.
        raise AllInfeasibleError(f"every satisfaction LP was infeasible at threshold {threshold!r}")
    t, out = best
    return _solution(game, _strategy(out.x), t, "multi-lp", threshold, diags)


def single_lp(game: BimatrixGame) -> LPProblem:
    """Joint-distribution LP; variable ``s * N^f + t`` is the mass on ``(s, t)``."""
    n_l, n_f = game.n_leader, game.n_follower
    uf = game.u_follower
    rows = []
    for t in range(n_f):
        for t2 in range(n_f):
            if t2 == t:
                continue
            row = np.zeros((n_l, n_f))
            row[:, t] = uf[:, t2] - uf[:, t]
            rows.append(row.reshape(-1))
    a_le = np.array(rows).reshape(len(rows), n_l * n_f)
    return LPProblem(
        game.u_leader.reshape(-1),
        a_le=a_le,
        b_le=np.zeros(len(rows)),
        a_eq=np.ones((1, n_l * n_f)),
        b_eq=[1.0],
    )


def solve_single_lp_standard(game: BimatrixGame) -> StackelbergSolution:
    """Standard commitment via one LP over joint play.

    The optimum is a vertex and its mass sits in a single follower column;
    the leader strategy is that column renormalised. With several columns
    carrying mass the heaviest one (lowest index on ties) is reported.
    """
    out = solve_lp(single_lp(game))
    if not out.optimal:
        raise AllInfeasibleError(f"single LP returned {out.status}")
    joint = np.clip(out.x, 0.0, None).reshape(game.n_leader, game.n_follower)
    col_mass = joint.sum(axis=0)
    t = int(np.argmax(col_mass))
    if col_mass[t] < 1.0 - 1e-9:
        log.debug("single-LP optimum spreads mass over follower columns %s", np.flatnonzero(col_mass > 0))
    pi = joint[:, t] / col_mass[t]
    diag = LPDiagnostic(t, out.status, out.objective_value, False, out.iterations)
    return _solution(game, pi, t, "single-lp", per_lp=[diag])
