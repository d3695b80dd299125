"""Compiled inner loop for :func:`stacksat.regret.run_rm`.

Mirrors ``run_rm_reference`` step for step; the reference is the readable
definition and the test-suite checks the two produce the same traces.
"""
import numba
import numpy as np


@numba.njit(cache=True)
def _sample(p, u):
    total = 0.0
    for k in range(p.size):
        total += p[k]
    x = u * total
    acc = 0.0
    for k in range(p.size):
        acc += p[k]
        if acc > x:
            return k
    return p.size - 1


@numba.njit(cache=True)
def _spr(cum, t):
    out = 0.0
    flat = cum.ravel()
    for k in range(flat.size):
        r = flat[k] / t
        if r > 0.0:
            out += r
    return out


@numba.njit(cache=True)
def _he_probs(cum, t, last, probs):
    n = cum.size
    total = 0.0
    for k in range(n):
        r = cum[k] / t
        if r > 0.0:
            total += r
    if total <= 0.0:
        for k in range(n):
            probs[k] = 1.0 / n
        return
    rest = 0.0
    for k in range(n):
        r = cum[k] / t
        probs[k] = r / total if r > 0.0 else 0.0
        if k != last:
            rest += probs[k]
    probs[last] = max(1.0 - rest, 0.0)


@numba.njit(cache=True)
def _ce_probs(cum, t, last, c, probs):
    n = cum.shape[0]
    rest = 0.0
    for k in range(n):
        if k == last:
            continue
        r = cum[last, k] / t
        probs[k] = c * r if r > 0.0 else 0.0
        rest += probs[k]
    stay = 1.0 - rest
    if stay <= 0.0:
        return False
    probs[last] = stay
    return True


@numba.njit(cache=True)
def run_chunk(
    ul, uf, br, draws, start, conditional, follower_learns, c_l, c_f, tol, freeze,
    cum_l, cum_f, probs_l, probs_f, counts_l, counts_f,
    la, fa, spr_l, spr_f, converged,
):
    """Advance stages ``start .. start + len(draws)``; state arrays are mutated.

    ``converged[0]`` holds the 1-based convergence stage or 0. Returns False
    if the inertia constant ever leaves no probability on repeating.
    """
    n_l, n_f = ul.shape
    for i in range(draws.shape[0]):
        stage = start + i
        t = stage + 1.0
        s = _sample(probs_l, draws[i, 0])
        if follower_learns:
            f = _sample(probs_f, draws[i, 1])
        else:
            f = br[s]
        la[stage] = s
        fa[stage] = f
        counts_l[s] += 1.0
        counts_f[f] += 1.0
        if conditional:
            for k in range(n_l):
                cum_l[s, k] += ul[k, f] - ul[s, f]
            for k in range(n_f):
                cum_f[f, k] += uf[s, k] - uf[s, f]
        else:
            for k in range(n_l):
                cum_l[0, k] += ul[k, f] - ul[s, f]
            for k in range(n_f):
                cum_f[0, k] += uf[s, k] - uf[s, f]
        a = _spr(cum_l, t)
        b = _spr(cum_f, t)
        spr_l[stage] = a
        spr_f[stage] = b

        if converged[0] == 0 and a < tol and (not follower_learns or b < tol):
            converged[0] = stage + 1
            if freeze:
                for k in range(n_l):
                    probs_l[k] = counts_l[k] / t
                for k in range(n_f):
                    probs_f[k] = counts_f[k] / t
            else:
                for k in range(n_l):
                    probs_l[k] = 1.0 / n_l
                for k in range(n_f):
                    probs_f[k] = 1.0 / n_f
        if converged[0] != 0:
            continue
        if conditional:
            if not _ce_probs(cum_l, t, s, c_l, probs_l):
                return False
            if follower_learns and not _ce_probs(cum_f, t, f, c_f, probs_f):
                return False
        else:
            _he_probs(cum_l[0], t, s, probs_l)
            if follower_learns:
                _he_probs(cum_f[0], t, f, probs_f)
    return True


def empty_state(n_l, n_f, conditional):
    shape_l = (n_l, n_l) if conditional else (1, n_l)
    shape_f = (n_f, n_f) if conditional else (1, n_f)
    return np.zeros(shape_l), np.zeros(shape_f)
