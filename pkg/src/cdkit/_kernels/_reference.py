"""NumPy reference implementation of the propagation kernel.

Propagates the linear oscillator ``u''(s) + q(s) u(s) = 0`` over the unit
interval for a whole batch of coefficient rows at once, using classical RK4
with a fixed step.  ``q`` is sampled on the step grid; midpoint values are
the averages of adjacent samples, which is exact for piecewise-linear
coefficients sampled at the nodes.  Trajectories (u and u') at every node
are returned so callers can evaluate at arbitrary interior times by cubic
Hermite interpolation.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def propagate_sin(q: np.ndarray, u0=0.0, du0=1.0) -> tuple[np.ndarray, np.ndarray]:
    """Integrate u'' + q(s) u = 0 on s in [0, 1] with given initial data.

    Parameters
    ----------
    q : (G, M+1) float64 array
        Coefficient sampled at the M+1 equispaced nodes of each row.
    u0, du0 : float or (G,) arrays
        Initial value and slope at s = 0 (defaults give the sine-type
        solution).

    Returns
    -------
    u, du : (G, M+1) float64 arrays
        Solution and first derivative at the nodes.
    """
    q = np.ascontiguousarray(q, dtype=np.float64)
    if q.ndim != 2 or q.shape[1] < 2:
        raise ValueError("q must have shape (G, M+1) with M >= 1")
    g, nodes = q.shape
    m = nodes - 1
    h = 1.0 / m
    u = np.empty_like(q)
    du = np.empty_like(q)
    uk = np.broadcast_to(np.asarray(u0, dtype=np.float64), (g,)).copy()
    wk = np.broadcast_to(np.asarray(du0, dtype=np.float64), (g,)).copy()
    u[:, 0] = uk
    du[:, 0] = wk
    for k in range(m):
        qk = q[:, k]
        qk1 = q[:, k + 1]
        qm = 0.5 * (qk + qk1)
        u1 = wk
        w1 = -qk * uk
        u2 = wk + 0.5 * h * w1
        w2 = -qm * (uk + 0.5 * h * u1)
        u3 = wk + 0.5 * h * w2
        w3 = -qm * (uk + 0.5 * h * u2)
        u4 = wk + h * w3
        w4 = -qk1 * (uk + h * u3)
        uk = uk + (h / 6.0) * (u1 + 2.0 * u2 + 2.0 * u3 + u4)
        wk = wk + (h / 6.0) * (w1 + 2.0 * w2 + 2.0 * w3 + w4)
        u[:, k + 1] = uk
        du[:, k + 1] = wk
    return u, du
