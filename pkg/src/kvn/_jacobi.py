"""Cyclic Jacobi eigenvalue kernels.

Both backends sweep the off-diagonal entries in the same round-robin
("tournament") order: every round is a set of disjoint index pairs, so the
rotations of a round commute and may be applied one after the other (numba)
or all at once (numpy) with identical results in exact arithmetic.

A rotation on (p, q) is skipped when

    |a_pq| <= max(rel_tol * sqrt(|a_pp * a_qq|), abs_floor)

and iteration stops after the first sweep that performs no rotation.
"""
import math

import numpy as np

from ._accel import njit

REL_TOL = 1e-15
ABS_FLOOR = 1e-18
MAX_SWEEPS = 60


def round_robin(n):
    """Pair schedule of shape ``(rounds, n_pairs, 2)``; ``-1`` marks a bye."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(max(m - 1, 1)):
        pairs = []
        for i in range(m // 2):
            p, q = players[i], players[m - 1 - i]
            if p >= n or q >= n:
                pairs.append((-1, -1))
            else:
                pairs.append((min(p, q), max(p, q)))
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    return np.asarray(rounds, dtype=np.int64).reshape(len(rounds), m // 2, 2)


@njit(cache=True)
def _jacobi_numba(a, w, schedule, rel_tol, abs_floor, max_sweeps, want_vectors):
    # a: symmetric working copy (overwritten); w: rows are eigenvectors.
    n = a.shape[0]
    for sweep in range(max_sweeps):
        rotations = 0
        for r in range(schedule.shape[0]):
            for k in range(schedule.shape[1]):
                p = schedule[r, k, 0]
                q = schedule[r, k, 1]
                if p < 0:
                    continue
                apq = a[p, q]
                app = a[p, p]
                aqq = a[q, q]
                if abs(apq) <= max(rel_tol * math.sqrt(abs(app * aqq)), abs_floor):
                    continue
                rotations += 1
                theta = (aqq - app) / (2.0 * apq)
                if abs(theta) > 1e100:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                for j in range(n):
                    apj = a[p, j]
                    aqj = a[q, j]
                    a[p, j] = c * apj - s * aqj
                    a[q, j] = s * apj + c * aqj
                for j in range(n):
                    a[j, p] = a[p, j]
                    a[j, q] = a[q, j]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                if want_vectors:
                    for j in range(n):
                        wpj = w[p, j]
                        wqj = w[q, j]
                        w[p, j] = c * wpj - s * wqj
                        w[q, j] = s * wpj + c * wqj
        if rotations == 0:
            return sweep + 1
    return -1


def _jacobi_numpy(a, w, schedule, rel_tol, abs_floor, max_sweeps, want_vectors):
    for sweep in range(max_sweeps):
        rotations = 0
        for pairs in schedule:
            pairs = pairs[pairs[:, 0] >= 0]
            P, Q = pairs[:, 0], pairs[:, 1]
            apq = a[P, Q]
            app = a[P, P]
            aqq = a[Q, Q]
            hit = np.abs(apq) > np.maximum(rel_tol * np.sqrt(np.abs(app * aqq)), abs_floor)
            if not hit.any():
                continue
            P, Q, apq, app, aqq = P[hit], Q[hit], apq[hit], app[hit], aqq[hit]
            rotations += P.size
            theta = (aqq - app) / (2.0 * apq)
            big = np.abs(theta) > 1e100
            safe = np.where(big, 1.0, theta)
            t = np.where(
                big,
                0.5 / np.where(big, theta, 1.0),
                np.copysign(1.0, safe) / (np.abs(safe) + np.sqrt(safe * safe + 1.0)),
            )
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            ap = a[P, :]
            aq = a[Q, :]
            a[P, :] = c[:, None] * ap - s[:, None] * aq
            a[Q, :] = s[:, None] * ap + c[:, None] * aq
            # entries between two pairs of the round need both rotations
            ap = a[:, P]
            aq = a[:, Q]
            a[:, P] = ap * c - aq * s
            a[:, Q] = ap * s + aq * c
            a[P, P] = app - t * apq
            a[Q, Q] = aqq + t * apq
            a[P, Q] = 0.0
            a[Q, P] = 0.0
            if want_vectors:
                wp = w[P, :]
                wq = w[Q, :]
                w[P, :] = c[:, None] * wp - s[:, None] * wq
                w[Q, :] = s[:, None] * wp + c[:, None] * wq
        if rotations == 0:
            return sweep + 1
    return -1


def jacobi_eigh(A, backend="numba", want_vectors=True,
                rel_tol=REL_TOL, max_sweeps=MAX_SWEEPS):
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi.

    Returns ``(values, vectors, sweeps)`` with values unsorted in diagonal
    order and eigenvectors as columns. ``sweeps`` is ``-1`` when the sweep
    budget ran out.
    """
    a = np.array(A, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    w = np.eye(n) if want_vectors else np.zeros((0, 0))
    if n == 1:
        return a.diagonal().copy(), np.eye(1), 1
    scale = math.sqrt(float(np.sum(a * a)))
    if scale == 0.0:
        return np.zeros(n), np.eye(n), 1
    abs_floor = ABS_FLOOR * scale
    schedule = round_robin(n)
    kernel = _jacobi_numba if backend == "numba" else _jacobi_numpy
    sweeps = kernel(a, w, schedule, rel_tol, abs_floor, max_sweeps, want_vectors)
    vectors = w.T.copy() if want_vectors else None
    return a.diagonal().copy(), vectors, sweeps
