"""Independent reference computations used by the test-suite.

Nothing here calls into the simplex code; the LP oracle enumerates every
basis of the standard-form system with dense linear algebra.
"""
import itertools

import numpy as np

from stacksat.lp import LPProblem


def vertex_enumeration(problem: LPProblem, tol=1e-9):
    """Best objective over all basic feasible solutions, or None if there are none.

    Only meaningful for bounded problems with a full-row-rank standard form.
    All bases are solved together as one stacked linear system.
    """
    a, b = problem.standard_form()
    m, n_std = a.shape
    c = np.zeros(n_std)
    c[: problem.n_vars] = problem.objective
    cols = np.array(list(itertools.combinations(range(n_std), m)))
    subs = a[:, cols].transpose(1, 0, 2)
    keep = np.abs(np.linalg.det(subs)) >= 1e-12
    if not keep.any():
        return None
    cols, subs = cols[keep], subs[keep]
    zb = np.linalg.solve(subs, np.broadcast_to(b, (len(subs), m))[..., None])[..., 0]
    feasible = np.all(zb >= -tol, axis=1)
    if not feasible.any():
        return None
    values = np.einsum("ij,ij->i", c[cols[feasible]], zb[feasible])
    return float(values.max())


def random_bounded_lp(rng, kind="continuous"):
    """Three structural variables, three constraint rows, bounded by row 0.

    ``kind`` selects continuous data, small-integer degenerate data, or a
    variant whose last row is an equality.
    """
    n = 3
    if kind == "degenerate":
        a = rng.integers(-1, 2, size=(3, n)).astype(float)
        a[0] = rng.integers(1, 3, size=n)
        b = rng.integers(0, 2, size=3).astype(float)
        b[0] = rng.integers(1, 3)
        c = rng.integers(-2, 3, size=n).astype(float)
    else:
        a = rng.uniform(-1, 1, size=(3, n))
        a[0] = rng.uniform(0.1, 1.0, size=n)
        b = rng.uniform(-1, 1, size=3)
        b[0] = rng.uniform(0.2, 1.0)
        c = rng.uniform(-1, 1, size=n)
    if kind == "equality":
        return LPProblem(c, a_le=a[:2], b_le=b[:2], a_eq=a[2:], b_eq=b[2:])
    return LPProblem(c, a_le=a, b_le=b)


def batch_uncond_regrets(u_own, own_actions, opp_actions):
    """Average unconditional regrets computed from the full history.

    ``u_own[k, o]`` is the agent's utility for own action k against opponent
    action o.
    """
    t = len(own_actions)
    total = np.zeros(u_own.shape[0])
    for s, o in zip(own_actions, opp_actions):
        for k in range(u_own.shape[0]):
            total[k] += u_own[k, o] - u_own[s, o]
    return total / t


def batch_cond_regrets(u_own, own_actions, opp_actions):
    t = len(own_actions)
    n = u_own.shape[0]
    total = np.zeros((n, n))
    for s, o in zip(own_actions, opp_actions):
        for j in range(n):
            if s != j:
                continue
            for k in range(n):
                total[j, k] += u_own[k, o] - u_own[j, o]
    return total / t


def sat_matrix_by_scan(u_follower, threshold, s_f):
    """Entrywise evaluation of the satisfaction constraint matrix."""
    n_l, n_f = u_follower.shape
    out = np.zeros((n_f, n_l), dtype=int)
    for t in range(n_f):
        for s in range(n_l):
            sat_t = 1 if u_follower[s, t] >= threshold else 0
            sat_sf = 1 if u_follower[s, s_f] >= threshold else 0
            out[t, s] = sat_t - sat_sf
    return out


def pure_commit_by_scan(u_leader, u_follower, threshold=None):
    """Best (leader, follower) pair over all pure BR-consistent pairs by loops."""
    n_l, n_f = u_leader.shape
    best = None
    for s in range(n_l):
        row = u_follower[s]
        if threshold is None:
            responses = [t for t in range(n_f) if row[t] == max(row)]
        else:
            responses = [t for t in range(n_f) if row[t] >= threshold] or list(range(n_f))
        for t in responses:
            if best is None or u_leader[s, t] > u_leader[best]:
                best = (s, t)
    return best
