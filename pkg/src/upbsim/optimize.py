"""Derivative-free simplex minimizer (Nelder-Mead with adaptive restarts off).

Small, deterministic, dependency-free; standard reflection/expansion/
contraction/shrink moves with termination on the spread of simplex function
values.
"""

from __future__ import annotations

import numpy as np


def nelder_mead(
    f,
    x0,
    step=0.1,
    fatol: float = 1e-6,
    xatol: float = 1e-8,
    max_iter: int = 2000,
):
    """Minimize f: R^n -> R from x0.

    ``step`` (scalar or per-coordinate) sets the initial simplex size.
    Returns (x_best, f_best, n_evaluations).
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    steps = np.broadcast_to(np.asarray(step, dtype=float), (n,))

    simplex = np.empty((n + 1, n))
    simplex[0] = x0
    for i in range(n):
        v = x0.copy()
        v[i] += steps[i] if steps[i] != 0 else 0.1
        simplex[i + 1] = v
    values = np.array([f(v) for v in simplex])
    nfev = n + 1

    alpha, gamma, beta, delta = 1.0, 2.0, 0.5, 0.5
    for _ in range(max_iter):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        if values[-1] - values[0] <= fatol and np.abs(simplex[1:] - simplex[0]).max() <= xatol:
            break
        centroid = simplex[:-1].mean(axis=0)
        xr = centroid + alpha * (centroid - simplex[-1])
        fr = f(xr)
        nfev += 1
        if fr < values[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = f(xe)
            nfev += 1
            if fe < fr:
                simplex[-1], values[-1] = xe, fe
            else:
                simplex[-1], values[-1] = xr, fr
        elif fr < values[-2]:
            simplex[-1], values[-1] = xr, fr
        else:
            contract_out = fr < values[-1]
            base = xr if contract_out else simplex[-1]
            xc = centroid + beta * (base - centroid)
            fc = f(xc)
            nfev += 1
            if fc < min(fr, values[-1]):
                simplex[-1], values[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    simplex[i] = simplex[0] + delta * (simplex[i] - simplex[0])
                    values[i] = f(simplex[i])
                nfev += n
    order = np.argsort(values, kind="stable")
    return simplex[order][0], float(values[order][0]), nfev
