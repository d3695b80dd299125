"""Regret matching in a repeated bimatrix game.

Two regret notions are supported:

* unconditional (external) regrets, whose regret-matching dynamics drive the
  empirical joint play towards the Hannan set;
* conditional (internal) regrets ``R(j, k)``, the average gain from having
  played ``k`` at every stage where ``j`` was played; these drive play towards
  the correlated equilibria.

Regret states store running sums and the stage count, so ``regrets`` is the
batch average itself rather than an accumulated recursion.

In the ``*+follower-br`` modes the follower does not learn: at every stage it
plays the lowest-index pure best response to the realised leader action.
Its regrets are still tracked so both SPR series are available.
"""
from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from stacksat.errors import EmptyTraceError, InvalidConstantError
from stacksat.game import BimatrixGame, _check_index, follower_br_pure

MODES = (
    "leader-uncond-rm+follower-br",
    "leader-cond-rm+follower-br",
    "both-uncond-rm",
    "both-cond-rm",
)
POST_CONVERGENCE = ("uniform", "freeze-empirical")
TRACE_COLUMNS = ("stage", "leader_action", "follower_action", "spr_leader", "spr_follower")


def own_utilities(game: BimatrixGame, role: str) -> np.ndarray:
    """Utility matrix indexed ``[own action, opponent action]``."""
    if role == "leader":
        return game.u_leader
    if role == "follower":
        return game.u_follower.T
    raise ValueError(f"role must be 'leader' or 'follower', not {role!r}")


@dataclass(frozen=True)
class UncondRegretState:
    cumulative: np.ndarray
    stage: int = 0

    @classmethod
    def zeros(cls, n_actions: int) -> "UncondRegretState":
        return cls(np.zeros(n_actions))

    @property
    def regrets(self) -> np.ndarray:
        return self.cumulative / self.stage if self.stage else np.zeros_like(self.cumulative)


@dataclass(frozen=True)
class CondRegretState:
    cumulative: np.ndarray
    stage: int = 0

    @classmethod
    def zeros(cls, n_actions: int) -> "CondRegretState":
        return cls(np.zeros((n_actions, n_actions)))

    @property
    def regrets(self) -> np.ndarray:
        return self.cumulative / self.stage if self.stage else np.zeros_like(self.cumulative)


def _check_actions(u, own_action, opponent_action):
    _check_index(own_action, u.shape[0], "own")
    _check_index(opponent_action, u.shape[1], "opponent")


def update_uncond(state: UncondRegretState, own_action, opponent_action, game, role) -> UncondRegretState:
    u = own_utilities(game, role)
    _check_actions(u, own_action, opponent_action)
    gain = u[:, opponent_action] - u[own_action, opponent_action]
    return UncondRegretState(state.cumulative + gain, state.stage + 1)


def update_cond(state: CondRegretState, own_action, opponent_action, game, role) -> CondRegretState:
    u = own_utilities(game, role)
    _check_actions(u, own_action, opponent_action)
    cumulative = state.cumulative.copy()
    # only the played row moves; its diagonal term is exactly zero
    cumulative[own_action] += u[:, opponent_action] - u[own_action, opponent_action]
    return CondRegretState(cumulative, state.stage + 1)


def sum_positive_regrets(state) -> float:
    regrets = state.regrets if hasattr(state, "regrets") else np.asarray(state, dtype=float)
    return float(np.maximum(regrets, 0.0).sum())


def he_play_probs(state: UncondRegretState, last_action: int) -> np.ndarray:
    """Next-stage mixture from unconditional regrets.

    Positive regrets are normalised over the actions other than
    ``last_action``, whose probability is the remainder. With no positive
    regret at all the play is uniform.
    """
    r = state.regrets
    n = r.size
    _check_index(last_action, n, "own")
    pos = np.maximum(r, 0.0)
    total = pos.sum()
    if total <= 0.0:
        return np.full(n, 1.0 / n)
    p = pos / total
    p[last_action] = 0.0
    p[last_action] = max(1.0 - p.sum(), 0.0)
    return p


def ce_play_probs(state: CondRegretState, last_action: int, c: float) -> np.ndarray:
    """Next-stage mixture from conditional regrets with inertia constant ``c``.

    Raises :class:`InvalidConstantError` unless ``c > 0`` leaves strictly
    positive probability on repeating ``last_action``.
    """
    r = state.regrets
    n = r.shape[0]
    _check_index(last_action, n, "own")
    if not c > 0:
        raise InvalidConstantError(f"c must be positive, got {c!r}")
    p = c * np.maximum(r[last_action], 0.0)
    p[last_action] = 0.0
    stay = 1.0 - p.sum()
    if stay <= 0.0:
        raise InvalidConstantError(f"c={c!r} leaves no probability on the previous action")
    p[last_action] = stay
    return p


def auto_c(u_own: np.ndarray) -> float:
    """``1 / (2 (N - 1) range)``, range = utility spread clamped below by 1.

    Every conditional regret is bounded by the spread, so the stay
    probability never drops under one half.
    """
    n = u_own.shape[0]
    if n == 1:
        return 1.0
    spread = max(float(u_own.max() - u_own.min()), 1.0)
    return 1.0 / (2.0 * (n - 1) * spread)


@dataclass(frozen=True)
class RMConfig:
    mode: str = "leader-cond-rm+follower-br"
    max_stages: int = 10_000
    spr_tolerance: float = 1e-5
    ce_constant_c: float | None = None  # None selects auto_c per player
    rng_seed: int = 0
    post_convergence: str = "uniform"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}; expected one of {MODES}")
        if self.post_convergence not in POST_CONVERGENCE:
            raise ValueError(f"unknown post_convergence {self.post_convergence!r}")
        if not self.spr_tolerance > 0:
            raise ValueError("spr_tolerance must be positive")
        if self.max_stages < 1:
            raise ValueError("max_stages must be >= 1")
        if self.ce_constant_c is not None and not self.ce_constant_c > 0:
            raise ValueError("ce_constant_c must be positive")

    @property
    def conditional(self) -> bool:
        return "-cond-" in self.mode

    @property
    def follower_learns(self) -> bool:
        return self.mode.startswith("both-")


@dataclass
class RMTrace:
    leader_actions: np.ndarray
    follower_actions: np.ndarray
    spr_leader: np.ndarray
    spr_follower: np.ndarray
    n_leader: int
    n_follower: int
    converged_at: int | None = None
    leader_state: object = field(default=None, repr=False)
    follower_state: object = field(default=None, repr=False)
    config: RMConfig | None = None

    @property
    def actions(self) -> list[tuple[int, int]]:
        return list(zip(self.leader_actions.tolist(), self.follower_actions.tolist()))

    @property
    def empirical_joint(self) -> np.ndarray:
        return empirical_joint(self)

    @property
    def outcome_joint(self) -> np.ndarray:
        """Empirical joint play over stages ``1..converged_at``, or the whole run.

        Play after convergence follows the post-convergence policy, not the
        learning dynamics, so it is excluded from the converged outcome.
        """
        return empirical_joint(self, self.converged_at)

    @property
    def modal_joint_action(self) -> tuple[int, int]:
        joint = self.outcome_joint
        s, t = np.unravel_index(int(np.argmax(joint)), joint.shape)
        return int(s), int(t)

    def attained_utilities(self, game: BimatrixGame) -> tuple[float, float]:
        """Average realised (leader, follower) utility under :attr:`outcome_joint`."""
        joint = self.outcome_joint
        return float((joint * game.u_leader).sum()), float((joint * game.u_follower).sum())

    def summary(self, game: BimatrixGame) -> dict:
        """JSON-ready report with 1-based actions; marginals are of :attr:`outcome_joint`."""
        joint = self.outcome_joint
        lu, fu = self.attained_utilities(game)
        s, t = self.modal_joint_action
        return {
            "mode": self.config.mode if self.config else None,
            "stages": int(self.leader_actions.size),
            "converged_at": self.converged_at,
            "modal_joint_action": [s + 1, t + 1],
            "final_spr_leader": float(self.spr_leader[-1]),
            "final_spr_follower": float(self.spr_follower[-1]),
            "leader_marginal": joint.sum(axis=1).tolist(),
            "follower_marginal": joint.sum(axis=0).tolist(),
            "leader_utility": lu,
            "follower_utility": fu,
        }


def empirical_joint(trace: RMTrace, stages: int | None = None) -> np.ndarray:
    """Normalised joint action counts over the first ``stages`` stages (default all).

    Shape ``(n_leader, n_follower)``.
    """
    la, fa = trace.leader_actions[:stages], trace.follower_actions[:stages]
    if la.size == 0:
        raise EmptyTraceError("trace has no stages")
    counts = np.zeros((trace.n_leader, trace.n_follower))
    np.add.at(counts, (la, fa), 1.0)
    return counts / la.size


DRAW_CHUNK = 1 << 16


def _draw_chunks(rng: np.random.Generator, n_stages: int):
    """Uniform variates, one (leader, follower) pair per stage, in fixed chunks."""
    for start in range(0, n_stages, DRAW_CHUNK):
        yield start, rng.random((min(DRAW_CHUNK, n_stages - start), 2))


def _inertia(game, cfg):
    if not cfg.conditional:
        return 0.0, 0.0
    if cfg.ce_constant_c is not None:
        return cfg.ce_constant_c, cfg.ce_constant_c
    return auto_c(own_utilities(game, "leader")), auto_c(own_utilities(game, "follower"))


def _lowest_br(game):
    return np.array([follower_br_pure(game, s)[0] for s in range(game.n_leader)], dtype=np.int64)


def run_rm(game: BimatrixGame, cfg: RMConfig) -> RMTrace:
    """Simulate ``cfg.max_stages`` stages of regret matching.

    Stage 1 is drawn uniformly for every learning player. ``converged_at`` is
    the first stage whose SPR falls below the tolerance for every learning
    player; from the next stage on, learners play uniformly or freeze their
    empirical marginal, per ``cfg.post_convergence``. Regrets keep updating
    after convergence. The run is a pure function of ``(game, cfg)``.

    The stage loop is compiled; :func:`run_rm_reference` is the same
    procedure written with the public regret functions.
    """
    from stacksat import _rmkernel

    rng = np.random.default_rng(cfg.rng_seed)
    n_l, n_f = game.n_leader, game.n_follower
    T = cfg.max_stages
    c_l, c_f = _inertia(game, cfg)
    cum_l, cum_f = _rmkernel.empty_state(n_l, n_f, cfg.conditional)
    probs_l, probs_f = np.full(n_l, 1.0 / n_l), np.full(n_f, 1.0 / n_f)
    counts_l, counts_f = np.zeros(n_l), np.zeros(n_f)
    la = np.empty(T, dtype=np.int64)
    fa = np.empty(T, dtype=np.int64)
    spr_l, spr_f = np.empty(T), np.empty(T)
    converged = np.zeros(1, dtype=np.int64)
    ul = np.ascontiguousarray(game.u_leader)
    uf = np.ascontiguousarray(game.u_follower)
    br = _lowest_br(game)

    for start, draws in _draw_chunks(rng, T):
        ok = _rmkernel.run_chunk(
            ul, uf, br, draws, start, cfg.conditional, cfg.follower_learns, c_l, c_f,
            cfg.spr_tolerance, cfg.post_convergence == "freeze-empirical",
            cum_l, cum_f, probs_l, probs_f, counts_l, counts_f,
            la, fa, spr_l, spr_f, converged,
        )
        if not ok:
            raise InvalidConstantError("inertia constant left no probability on the previous action")

    state_type = CondRegretState if cfg.conditional else UncondRegretState
    shape = (lambda a: a) if cfg.conditional else (lambda a: a[0])
    return RMTrace(
        la, fa, spr_l, spr_f, n_l, n_f, int(converged[0]) or None,
        state_type(shape(cum_l), T), state_type(shape(cum_f), T), cfg,
    )


def _sample(u: float, p: np.ndarray) -> int:
    cdf = np.cumsum(p)
    k = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(k, p.size - 1)


def run_rm_reference(game: BimatrixGame, cfg: RMConfig) -> RMTrace:
    """Plain-Python version of :func:`run_rm`; slow, kept as the readable definition."""
    rng = np.random.default_rng(cfg.rng_seed)
    n_l, n_f = game.n_leader, game.n_follower
    T = cfg.max_stages
    c_l, c_f = _inertia(game, cfg)
    if cfg.conditional:
        leader, follower = CondRegretState.zeros(n_l), CondRegretState.zeros(n_f)
        update = update_cond
    else:
        leader, follower = UncondRegretState.zeros(n_l), UncondRegretState.zeros(n_f)
        update = update_uncond
    probs_l, probs_f = np.full(n_l, 1.0 / n_l), np.full(n_f, 1.0 / n_f)
    counts_l, counts_f = np.zeros(n_l), np.zeros(n_f)
    br = _lowest_br(game)
    la, fa = np.empty(T, dtype=np.int64), np.empty(T, dtype=np.int64)
    spr_l, spr_f = np.empty(T), np.empty(T)
    converged_at = None

    for start, draws in _draw_chunks(rng, T):
        for i, (u_l, u_f) in enumerate(draws):
            stage = start + i
            s = _sample(u_l, probs_l)
            f = _sample(u_f, probs_f) if cfg.follower_learns else int(br[s])
            la[stage], fa[stage] = s, f
            counts_l[s] += 1
            counts_f[f] += 1
            leader = update(leader, s, f, game, "leader")
            follower = update(follower, f, s, game, "follower")
            spr_l[stage], spr_f[stage] = sum_positive_regrets(leader), sum_positive_regrets(follower)

            if converged_at is None and spr_l[stage] < cfg.spr_tolerance and (
                not cfg.follower_learns or spr_f[stage] < cfg.spr_tolerance
            ):
                converged_at = stage + 1
                if cfg.post_convergence == "freeze-empirical":
                    probs_l, probs_f = counts_l / counts_l.sum(), counts_f / counts_f.sum()
                else:
                    probs_l, probs_f = np.full(n_l, 1.0 / n_l), np.full(n_f, 1.0 / n_f)
            if converged_at is not None:
                continue
            if cfg.conditional:
                probs_l = ce_play_probs(leader, s, c_l)
                if cfg.follower_learns:
                    probs_f = ce_play_probs(follower, f, c_f)
            else:
                probs_l = he_play_probs(leader, s)
                if cfg.follower_learns:
                    probs_f = he_play_probs(follower, f)

    return RMTrace(la, fa, spr_l, spr_f, n_l, n_f, converged_at, leader, follower, cfg)


def export_trace_csv(trace: RMTrace, destination) -> None:
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", newline="") as fh:
            export_trace_csv(trace, fh)
        return
    writer = csv.writer(destination, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for i in range(trace.leader_actions.size):
        writer.writerow(
            [
                i + 1,
                int(trace.leader_actions[i]) + 1,
                int(trace.follower_actions[i]) + 1,
                format(float(trace.spr_leader[i]), ".17g"),
                format(float(trace.spr_follower[i]), ".17g"),
            ]
        )
