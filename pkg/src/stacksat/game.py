"""Bimatrix games, best-response correspondences and pure Nash equilibria.

Action indices are 0-based throughout the Python API. The JSON game format
and all CLI/CSV output use 1-based indices; conversion happens in
:mod:`stacksat.cli` and the ``to_json``/``from_json`` helpers only.

Best-response ties use exact float equality: utilities are stored doubles and
an epsilon band would silently enlarge BR sets.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from stacksat.errors import ActionIndexError, GameValidationError, InvalidStrategyError

STRATEGY_ATOL = 1e-9


@dataclass(frozen=True, eq=False)
class BimatrixGame:
    """Leader/follower utilities; row = leader action, column = follower action."""

    u_leader: np.ndarray
    u_follower: np.ndarray

    def __post_init__(self):
        for name in ("u_leader", "u_follower"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_leader(self) -> int:
        return self.u_leader.shape[0]

    @property
    def n_follower(self) -> int:
        return self.u_leader.shape[1]

    @classmethod
    def from_dict(cls, raw: dict) -> "BimatrixGame":
        try:
            ul, uf = raw["u_leader"], raw["u_follower"]
        except KeyError as exc:
            raise GameValidationError(f"missing field {exc.args[0]!r}") from None
        game = validate_game(_as_matrix(ul, "u_leader"), _as_matrix(uf, "u_follower"))
        for key, actual in (("n_leader", game.n_leader), ("n_follower", game.n_follower)):
            if key in raw and raw[key] != actual:
                raise GameValidationError(
                    f"dimension-mismatch: {key}={raw[key]} but matrices have {actual}"
                )
        return game

    def to_dict(self) -> dict:
        return {
            "n_leader": self.n_leader,
            "n_follower": self.n_follower,
            "u_leader": self.u_leader.tolist(),
            "u_follower": self.u_follower.tolist(),
        }


def _as_matrix(rows, name):
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        # ragged rows land here
        raise GameValidationError(f"dimension-mismatch: {name} is not a rectangular real matrix") from exc
    return arr


def validate_game(u_leader, u_follower) -> BimatrixGame:
    """Build a game from two matrices, checking shapes and finiteness.

    Raises :class:`GameValidationError` naming the offending matrix and the
    first bad (row, column), reported 1-based.
    """
    ul = np.asarray(u_leader, dtype=float)
    uf = np.asarray(u_follower, dtype=float)
    for name, arr in (("u_leader", ul), ("u_follower", uf)):
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise GameValidationError(f"dimension-mismatch: {name} must be a non-empty 2-D matrix, got shape {arr.shape}")
    if ul.shape != uf.shape:
        raise GameValidationError(
            f"dimension-mismatch: u_leader is {ul.shape[0]}x{ul.shape[1]} "
            f"but u_follower is {uf.shape[0]}x{uf.shape[1]}"
        )
    for name, arr in (("u_leader", ul), ("u_follower", uf)):
        bad = np.argwhere(~np.isfinite(arr))
        if bad.size:
            r, c = bad[0]
            raise GameValidationError(f"non-finite-entry: {name}[row {r + 1}, column {c + 1}] = {arr[r, c]}")
    return BimatrixGame(ul, uf)


def load_game(path) -> BimatrixGame:
    with open(path) as fh:
        return BimatrixGame.from_dict(json.load(fh))


def save_game(game: BimatrixGame, path) -> None:
    Path(path).write_text(json.dumps(game.to_dict(), indent=2) + "\n")


def _check_index(idx, n, who):
    if not isinstance(idx, (int, np.integer)) or not 0 <= idx < n:
        raise ActionIndexError(f"{who} action {idx!r} out of range [0, {n})")


def check_strategy(pi, n) -> np.ndarray:
    """Return ``pi`` as a float vector after checking it is a pmf over ``n`` actions."""
    p = np.asarray(pi, dtype=float)
    if p.shape != (n,):
        raise InvalidStrategyError(f"strategy has shape {p.shape}, expected ({n},)")
    if not np.all(np.isfinite(p)) or np.any(p < 0):
        raise InvalidStrategyError("strategy has negative or non-finite entries")
    if abs(p.sum() - 1.0) > STRATEGY_ATOL:
        raise InvalidStrategyError(f"strategy sums to {p.sum()!r}, not 1")
    return p


def _argmax_set(values) -> tuple[int, ...]:
    values = np.asarray(values)
    return tuple(int(i) for i in np.flatnonzero(values == values.max()))


def follower_br_pure(game: BimatrixGame, s_leader: int) -> tuple[int, ...]:
    """All follower actions maximising follower utility against a pure leader action."""
    _check_index(s_leader, game.n_leader, "leader")
    return _argmax_set(game.u_follower[s_leader])


def satisfied(game: BimatrixGame, threshold: float) -> np.ndarray:
    """Boolean matrix ``U^f(s, t) >= threshold`` with weak inequality."""
    return game.u_follower >= threshold


def follower_br_sat_pure(game: BimatrixGame, threshold: float, s_leader: int) -> tuple[int, ...]:
    """Satisfying follower actions against ``s_leader``; every action if none satisfies."""
    _check_index(s_leader, game.n_leader, "leader")
    return _argmax_set(satisfied(game, threshold)[s_leader].astype(int))


def satisfaction_probability(game: BimatrixGame, threshold: float, pi, t: int) -> float:
    """Probability under leader mixture ``pi`` that follower action ``t`` is satisfied."""
    _check_index(t, game.n_follower, "follower")
    p = check_strategy(pi, game.n_leader)
    return float(p @ satisfied(game, threshold)[:, t])


def satisfaction_probabilities(game: BimatrixGame, threshold: float, pi) -> np.ndarray:
    p = check_strategy(pi, game.n_leader)
    return p @ satisfied(game, threshold).astype(float)


def follower_br_sat_mixed(game: BimatrixGame, threshold: float, pi) -> tuple[int, ...]:
    return _argmax_set(satisfaction_probabilities(game, threshold, pi))


def follower_br_mixed(game: BimatrixGame, pi) -> tuple[int, ...]:
    """Standard BR to a leader mixture: maximisers of expected follower utility."""
    p = check_strategy(pi, game.n_leader)
    return _argmax_set(p @ game.u_follower)


def expected_utilities(game: BimatrixGame, pi, t: int) -> tuple[float, float]:
    _check_index(t, game.n_follower, "follower")
    p = check_strategy(pi, game.n_leader)
    return float(p @ game.u_leader[:, t]), float(p @ game.u_follower[:, t])


def find_pure_ne(game: BimatrixGame) -> list[tuple[int, int]]:
    """Pure Nash equilibria of the simultaneous-move game, lexicographically ordered.

    A profile qualifies when neither player can strictly gain by deviating
    (weak inequalities on both sides).
    """
    leader_best = game.u_leader >= game.u_leader.max(axis=0, keepdims=True)
    follower_best = game.u_follower >= game.u_follower.max(axis=1, keepdims=True)
    return [(int(s), int(t)) for s, t in np.argwhere(leader_best & follower_best)]
