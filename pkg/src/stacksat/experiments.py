"""Monte Carlo threshold sweeps over random games, and the bundled example game.

Each trial draws a fresh game with i.i.d. uniform(0, 1) utilities, solves the
standard commitment problem once and the satisfaction problem at every
threshold of an inclusive grid on [0, 1]. Trial ``i`` draws from its own
stream derived from ``(rng_seed, i)``, so results do not depend on how trials
are scheduled across workers.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from stacksat.errors import DominanceViolation, FixtureCorruptError
from stacksat.game import BimatrixGame
from stacksat.stackelberg import (
    pure_commit_sat,
    pure_commit_standard,
    solve_multi_lp_sat,
    solve_multi_lp_standard,
)

log = logging.getLogger(__name__)

EXAMPLE_SHA256 = "bbf9e499fc5f16679e6ac3457e3079e788c9c872eeea47438fe11db8285731aa"
CSV_COLUMNS = (
    "threshold",
    "avg_sat_leader_utility",
    "avg_std_leader_utility",
    "avg_max_utility",
    "avg_sat_probability",
)
PROP1_TOL = 1e-7


def _matrix_digest(raw: dict) -> str:
    payload = json.dumps({"u_leader": raw["u_leader"], "u_follower": raw["u_follower"]}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()


def example_game_path():
    return resources.files("stacksat").joinpath("data/example_10x7.json")


def load_example_game() -> BimatrixGame:
    """The 10x7 example game with two pure equilibria, (4,5) and (9,4) one-based."""
    raw = json.loads(example_game_path().read_text())
    if _matrix_digest(raw) != EXAMPLE_SHA256:
        raise FixtureCorruptError("example game fixture does not match its recorded checksum")
    return BimatrixGame.from_dict(raw)


def sample_game(n_leader: int, n_follower: int, rng: np.random.Generator) -> BimatrixGame:
    if n_leader < 1 or n_follower < 1:
        raise ValueError("game dimensions must be positive")
    ul = rng.uniform(size=(n_leader, n_follower))
    uf = rng.uniform(size=(n_leader, n_follower))
    return BimatrixGame(ul, uf)


def expected_max_utility(n_pairs: int) -> float:
    """Mean of the maximum of ``n_pairs`` i.i.d. uniform(0, 1) draws."""
    if n_pairs < 1:
        raise ValueError("n_pairs must be >= 1")
    return n_pairs / (n_pairs + 1)


@dataclass(frozen=True)
class SweepConfig:
    n_leader: int = 10
    n_follower: int = 5
    n_thresholds: int = 40
    n_trials: int = 100
    rng_seed: int = 0
    mode: str = "mixed"

    def __post_init__(self):
        if self.n_leader < 1 or self.n_follower < 1:
            raise ValueError("n_leader and n_follower must be >= 1")
        if self.n_thresholds < 2:
            raise ValueError("n_thresholds must be >= 2")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.mode not in ("mixed", "pure"):
            raise ValueError(f"mode must be 'mixed' or 'pure', not {self.mode!r}")

    @property
    def thresholds(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n_thresholds)


@dataclass
class SweepResult:
    thresholds: np.ndarray
    avg_sat_leader_utility: np.ndarray
    avg_std_leader_utility: float
    avg_max_utility: float
    avg_sat_probability: np.ndarray
    n_trials_used: int
    max_utility_stderr: float = float("nan")
    trial_sat_leader_utility: np.ndarray | None = field(default=None, repr=False)
    trial_std_leader_utility: np.ndarray | None = field(default=None, repr=False)
    trial_max_utility: np.ndarray | None = field(default=None, repr=False)
    counterexamples: list[dict] = field(default_factory=list, repr=False)
    lp_solved: int = 0
    lp_pruned: int = 0


def trial_rng(rng_seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(rng_seed, spawn_key=(trial,)))


def run_trial(cfg: SweepConfig, trial: int) -> dict:
    game = sample_game(cfg.n_leader, cfg.n_follower, trial_rng(cfg.rng_seed, trial))
    if cfg.mode == "pure":
        std = pure_commit_standard(game)
        sats = [pure_commit_sat(game, th) for th in cfg.thresholds]
    else:
        std = solve_multi_lp_standard(game)
        sats = [solve_multi_lp_sat(game, th) for th in cfg.thresholds]
    diags = [d for sol in sats for d in sol.per_lp]
    return {
        "game": game,
        "std": std.leader_utility,
        "max": float(game.u_leader.max()),
        "sat": np.array([s.leader_utility for s in sats]),
        "sat_prob": np.array([s.follower_sat_prob for s in sats]),
        "lp_solved": len(std.per_lp) + sum(not d.pruned for d in diags),
        "lp_pruned": sum(d.pruned for d in diags),
    }


def _trial_worker(args):
    cfg, trial = args
    out = run_trial(cfg, trial)
    out["game"] = out["game"].to_dict()
    return out


def run_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """Average leader utilities and satisfaction probabilities over random games.

    ``workers`` > 1 spreads trials across processes (0 means one per CPU);
    the result is bitwise identical to a serial run.

    Pure mode enforces the satisfaction >= standard ordering and raises
    :class:`DominanceViolation` if it ever fails. Mixed mode only records
    violations (beyond 1e-7) in ``counterexamples``, together with the game.
    """
    if workers == 0:
        workers = os.cpu_count() or 1
    jobs = [(cfg, i) for i in range(cfg.n_trials)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(_trial_worker, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        trials = [_trial_worker(job) for job in jobs]

    thresholds = cfg.thresholds
    sat = np.stack([tr["sat"] for tr in trials])
    std = np.array([tr["std"] for tr in trials])
    mx = np.array([tr["max"] for tr in trials])
    prob = np.stack([tr["sat_prob"] for tr in trials])

    counterexamples = []
    for i, tr in enumerate(trials):
        bad = np.flatnonzero(tr["sat"] < tr["std"] - (0.0 if cfg.mode == "pure" else PROP1_TOL))
        if not bad.size:
            continue
        if cfg.mode == "pure":
            k = bad[0]
            raise DominanceViolation(
                f"trial {i}, threshold {thresholds[k]}: pure satisfaction utility "
                f"{tr['sat'][k]} < standard {tr['std']}; game={json.dumps(tr['game'])}"
            )
        for k in bad:
            record = {
                "trial": i,
                "threshold": float(thresholds[k]),
                "sat_leader_utility": float(tr["sat"][k]),
                "std_leader_utility": float(tr["std"]),
                "game": tr["game"],
            }
            log.warning("satisfaction utility below standard: %s", json.dumps(record))
            counterexamples.append(record)

    n = cfg.n_trials
    return SweepResult(
        thresholds=thresholds,
        avg_sat_leader_utility=sat.mean(axis=0),
        avg_std_leader_utility=float(std.mean()),
        avg_max_utility=float(mx.mean()),
        avg_sat_probability=prob.mean(axis=0),
        n_trials_used=n,
        max_utility_stderr=float(mx.std(ddof=1) / np.sqrt(n)) if n > 1 else float("nan"),
        trial_sat_leader_utility=sat,
        trial_std_leader_utility=std,
        trial_max_utility=mx,
        counterexamples=counterexamples,
        lp_solved=sum(tr["lp_solved"] for tr in trials),
        lp_pruned=sum(tr["lp_pruned"] for tr in trials),
    )


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_csv(result: SweepResult, destination) -> None:
    """Write one row per threshold; ``destination`` is a path or text stream."""
    if isinstance(destination, (str, os.PathLike)):
        with open(destination, "w", newline="") as fh:
            export_csv(result, fh)
        return
    writer = csv.writer(destination, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for k, th in enumerate(result.thresholds):
        writer.writerow(
            [
                _fmt(th),
                _fmt(result.avg_sat_leader_utility[k]),
                _fmt(result.avg_std_leader_utility),
                _fmt(result.avg_max_utility),
                _fmt(result.avg_sat_probability[k]),
            ]
        )


def read_csv(source) -> dict[str, np.ndarray]:
    """Column arrays from a sweep CSV written by :func:`export_csv`."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, newline="") as fh:
            return read_csv(fh)
    reader = csv.reader(source)
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected sweep CSV header {header}")
    rows = [[float(v) for v in row] for row in reader]
    data = np.array(rows).reshape(len(rows), len(CSV_COLUMNS))
    return {name: data[:, j] for j, name in enumerate(CSV_COLUMNS)}


def sweep_to_csv_text(result: SweepResult) -> str:
    buf = io.StringIO()
    export_csv(result, buf)
    return buf.getvalue()
