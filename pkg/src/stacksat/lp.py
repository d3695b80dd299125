"""Dense two-phase tableau simplex with Bland's anti-cycling rule.

Problems are stated as::

    maximise    c @ x
    subject to  A_le @ x <= b_le
                A_eq @ x == b_eq
                x >= 0

Internally each ``<=`` row receives a slack variable, so the standard-form
variable vector is ``z = [x, slack]`` with one slack per inequality row (in
row order). :class:`BasicFeasibleSeed` indexes into that vector.

The LPs generated by the Stackelberg formulations are tiny (tens of
variables) and the satisfaction constraint matrices hold only 0/+1/-1, so a
dense tableau keeps pivots exact in the common case.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from stacksat.errors import InvalidSeedError, IterationLimitError, MalformedProblemError

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-7
SEED_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LPProblem:
    objective: np.ndarray
    a_le: np.ndarray | None = None
    b_le: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float).reshape(-1)
        n = self.objective.size
        if n == 0:
            raise MalformedProblemError("objective has no variables")

        def _mat(a, b, name):
            a = np.zeros((0, n)) if a is None else np.asarray(a, dtype=float)
            b = np.zeros(0) if b is None else np.asarray(b, dtype=float).reshape(-1)
            if a.size == 0 and a.shape[0] == 0:
                a = a.reshape(0, n)
            if a.ndim != 2 or a.shape[1] != n:
                raise MalformedProblemError(f"{name} matrix has shape {a.shape}, expected (*, {n})")
            if a.shape[0] != b.size:
                raise MalformedProblemError(f"{name} matrix has {a.shape[0]} rows but rhs has {b.size} entries")
            return a, b

        self.a_le, self.b_le = _mat(self.a_le, self.b_le, "inequality")
        self.a_eq, self.b_eq = _mat(self.a_eq, self.b_eq, "equality")

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.a_le.shape[0] + self.a_eq.shape[0]

    def standard_form(self) -> tuple[np.ndarray, np.ndarray]:
        """``(A, b)`` of the equality system over ``z = [x, slack]``."""
        m_le, m_eq, n = self.a_le.shape[0], self.a_eq.shape[0], self.n_vars
        a = np.zeros((m_le + m_eq, n + m_le))
        a[:m_le, :n] = self.a_le
        a[:m_le, n:] = np.eye(m_le)
        a[m_le:, :n] = self.a_eq
        return a, np.concatenate([self.b_le, self.b_eq])


@dataclass
class LPOutcome:
    status: str
    x: np.ndarray | None = None
    objective_value: float | None = None
    iterations: int = 0
    basis: tuple[int, ...] | None = None
    phase1_objective: float | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass
class BasicFeasibleSeed:
    """Starting vertex: basic variable indices and the full assignment of ``z``."""

    basis: tuple[int, ...]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.basis = tuple(int(i) for i in self.basis)
        self.values = np.asarray(self.values, dtype=float)


class _Tableau:
    """Rows ``[B^-1 A | B^-1 b]`` plus a reduced-cost row ``d`` (last row).

    ``d_j = c_B B^-1 A_j - c_j`` so a column may enter while ``d_j < 0``.
    """

    def __init__(self, body: np.ndarray, basis: list[int], max_iter: int):
        self.t = body
        self.basis = basis
        self.iterations = 0
        self.max_iter = max_iter

    @property
    def m(self) -> int:
        return self.t.shape[0] - 1

    def set_costs(self, c: np.ndarray) -> None:
        cb = c[self.basis]
        self.t[-1, :-1] = cb @ self.t[:-1, :-1] - c
        self.t[-1, -1] = cb @ self.t[:-1, -1]

    def pivot(self, row: int, col: int) -> None:
        t = self.t
        t[row] /= t[row, col]
        for r in range(t.shape[0]):
            if r != row and t[r, col] != 0.0:
                t[r] -= t[r, col] * t[row]
        t[row, col] = 1.0
        self.basis[row] = col

    def entering(self, allowed: int) -> int:
        d = self.t[-1, :allowed]
        cand = np.flatnonzero(d < -PIVOT_TOL)
        return int(cand[0]) if cand.size else -1

    def leaving(self, col: int) -> int:
        column = self.t[:-1, col]
        rhs = self.t[:-1, -1]
        rows = np.flatnonzero(column > PIVOT_TOL)
        if not rows.size:
            return -1
        ratios = rhs[rows] / column[rows]
        best = ratios.min()
        tied = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
        # Bland: among tied rows leave the lowest-indexed basic variable
        return int(min(tied, key=lambda r: self.basis[r]))

    def run(self, allowed: int) -> str:
        while True:
            col = self.entering(allowed)
            if col < 0:
                return OPTIMAL
            row = self.leaving(col)
            if row < 0:
                return UNBOUNDED
            if self.iterations >= self.max_iter:
                raise IterationLimitError(f"simplex exceeded {self.max_iter} pivots")
            self.pivot(row, col)
            self.iterations += 1
            np.maximum(self.t[:-1, -1], 0.0, out=self.t[:-1, -1], where=self.t[:-1, -1] > -FEAS_TOL)

    def point(self, n_total: int) -> np.ndarray:
        z = np.zeros(n_total)
        z[self.basis] = self.t[:-1, -1]
        return z


def _default_max_iter(rows: int, cols: int) -> int:
    return 50 * (rows + cols) + 50


def _finish(problem: LPProblem, tab: _Tableau, c_std: np.ndarray, status: str, phase1=None) -> LPOutcome:
    if status == UNBOUNDED:
        return LPOutcome(UNBOUNDED, iterations=tab.iterations, phase1_objective=phase1)
    z = tab.point(c_std.size)
    z[(z < 0) & (z > -FEAS_TOL)] = 0.0
    x = z[: problem.n_vars]
    return LPOutcome(
        OPTIMAL,
        x=x,
        objective_value=float(problem.objective @ x),
        iterations=tab.iterations,
        basis=tuple(tab.basis),
        phase1_objective=phase1,
    )


def solve_lp(problem: LPProblem, max_iter: int | None = None) -> LPOutcome:
    """Solve ``problem`` from scratch (phase 1 then phase 2).

    Raises :class:`IterationLimitError` rather than return a non-terminated
    tableau as optimal.
    """
    a, b = problem.standard_form()
    m, n_std = a.shape
    m_le = problem.a_le.shape[0]
    n = problem.n_vars
    if max_iter is None:
        max_iter = _default_max_iter(m, n_std)

    a = a.copy()
    b = b.copy()
    basis = [-1] * m
    art_rows = []
    for i in range(m):
        if i < m_le and b[i] >= 0:
            basis[i] = n + i
        else:
            if b[i] < 0:
                a[i] *= -1.0
                b[i] *= -1.0
            art_rows.append(i)

    n_art = len(art_rows)
    body = np.zeros((m + 1, n_std + n_art + 1))
    body[:m, :n_std] = a
    body[:m, -1] = b
    for j, i in enumerate(art_rows):
        body[i, n_std + j] = 1.0
        basis[i] = n_std + j
    tab = _Tableau(body, basis, max_iter)

    phase1 = 0.0
    if n_art:
        c1 = np.zeros(n_std + n_art)
        c1[n_std:] = -1.0
        tab.set_costs(c1)
        tab.run(n_std + n_art)
        phase1 = -float(tab.t[-1, -1])
        if phase1 > FEAS_TOL:
            return LPOutcome(INFEASIBLE, iterations=tab.iterations, phase1_objective=phase1)
        _drive_out_artificials(tab, n_std)

    tab.t = np.delete(tab.t, np.s_[n_std:n_std + n_art], axis=1)
    c_std = np.zeros(n_std)
    c_std[:n] = problem.objective
    tab.set_costs(c_std)
    status = tab.run(n_std)
    return _finish(problem, tab, c_std, status, phase1 if n_art else None)


def _drive_out_artificials(tab: _Tableau, n_std: int) -> None:
    row = 0
    while row < tab.m:
        if tab.basis[row] >= n_std:
            cand = np.flatnonzero(np.abs(tab.t[row, :n_std]) > PIVOT_TOL)
            if cand.size:
                tab.pivot(row, int(cand[0]))
            else:
                # redundant equality row
                tab.t = np.delete(tab.t, row, axis=0)
                del tab.basis[row]
                continue
        row += 1


def solve_lp_seeded(problem: LPProblem, seed: BasicFeasibleSeed, max_iter: int | None = None) -> LPOutcome:
    """Run phase 2 only, starting from the vertex described by ``seed``.

    Raises :class:`InvalidSeedError` when the seed is not a basic feasible
    solution of ``problem``.
    """
    a, b = problem.standard_form()
    m, n_std = a.shape
    if max_iter is None:
        max_iter = _default_max_iter(m, n_std)
    basis = list(seed.basis)
    z = seed.values
    if z.shape != (n_std,):
        raise InvalidSeedError(f"seed assigns {z.size} variables, problem has {n_std}")
    if len(basis) != m or len(set(basis)) != m or any(not 0 <= j < n_std for j in basis):
        raise InvalidSeedError(f"seed basis {seed.basis} is not {m} distinct variable indices")
    if np.any(z < -SEED_TOL):
        raise InvalidSeedError(f"seed violates nonnegativity (min component {z.min()!r})")
    nonbasic = np.ones(n_std, dtype=bool)
    nonbasic[basis] = False
    if np.any(np.abs(z[nonbasic]) > SEED_TOL):
        raise InvalidSeedError("seed assigns nonzero values to nonbasic variables")
    if np.max(np.abs(a @ z - b), initial=0.0) > SEED_TOL:
        raise InvalidSeedError("seed does not satisfy the equality constraints")

    body = np.zeros((m + 1, n_std + 1))
    body[:m, :n_std] = a
    body[:m, -1] = b
    tab = _Tableau(body, [-1] * m, max_iter)
    free_rows = list(range(m))
    for col in basis:
        r = max(free_rows, key=lambda i: abs(tab.t[i, col]))
        if abs(tab.t[r, col]) <= PIVOT_TOL:
            raise InvalidSeedError(f"seed basis {seed.basis} is singular")
        tab.pivot(r, col)
        free_rows.remove(r)
    if np.max(np.abs(tab.point(n_std) - z)) > SEED_TOL:
        raise InvalidSeedError("seed values disagree with its basis")

    c_std = np.zeros(n_std)
    c_std[: problem.n_vars] = problem.objective
    tab.set_costs(c_std)
    status = tab.run(n_std)
    return _finish(problem, tab, c_std, status)
