"""Derivative-free simplex minimization used by the knot refiner."""
from __future__ import annotations

import numpy as np

_ALPHA = 1.0  # reflection
_GAMMA = 2.0  # expansion
_RHO = 0.5    # contraction
_SIGMA = 0.5  # shrink


def nelder_mead(f, x0, step=0.1, max_iter=1000, f_tol=1e-6, stall_iters=10):
    """Minimize f over R^n starting from x0.

    Stops when the best value has improved by less than f_tol over the last
    stall_iters iterations, or at max_iter.  Returns (x_best, f_best, iters).
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    step = np.broadcast_to(np.asarray(step, dtype=float), (n,))

    simplex = np.tile(x0, (n + 1, 1))
    for i in range(n):
        simplex[i + 1, i] += step[i] if step[i] != 0 else 1e-4
    values = np.array([f(x) for x in simplex])

    history = [float(values.min())]
    iters = 0
    while iters < max_iter:
        iters += 1
        order = np.argsort(values)
        simplex = simplex[order]
        values = values[order]

        centroid = simplex[:-1].mean(axis=0)
        reflected = centroid + _ALPHA * (centroid - simplex[-1])
        f_r = f(reflected)
        if values[0] <= f_r < values[-2]:
            simplex[-1], values[-1] = reflected, f_r
        elif f_r < values[0]:
            expanded = centroid + _GAMMA * (reflected - centroid)
            f_e = f(expanded)
            if f_e < f_r:
                simplex[-1], values[-1] = expanded, f_e
            else:
                simplex[-1], values[-1] = reflected, f_r
        else:
            contracted = centroid + _RHO * (simplex[-1] - centroid)
            f_c = f(contracted)
            if f_c < values[-1]:
                simplex[-1], values[-1] = contracted, f_c
            else:
                best = simplex[0].copy()
                for i in range(1, n + 1):
                    simplex[i] = best + _SIGMA * (simplex[i] - best)
                    values[i] = f(simplex[i])

        history.append(float(values.min()))
        if len(history) > stall_iters and \
                history[-1 - stall_iters] - history[-1] < f_tol:
            break

    best = int(np.argmin(values))
    return simplex[best], float(values[best]), iters
