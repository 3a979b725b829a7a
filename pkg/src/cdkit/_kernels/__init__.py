"""Backend selection for the propagation kernel.

The compiled Cython kernel is preferred when it built successfully; the
NumPy reference implementation is the fallback.  Set ``CDKIT_KERNEL`` to
``python`` or ``compiled`` to force a backend (``compiled`` raises if the
extension is unavailable).  Evaluation helpers shared by both backends
(Hermite interpolation, positivity detection) live here.
"""

from __future__ import annotations

import os

import numpy as np

from . import _reference


def _load_backend():
    choice = os.environ.get("CDKIT_KERNEL", "auto")
    if choice not in ("auto", "python", "compiled"):
        raise ValueError(f"CDKIT_KERNEL must be auto|python|compiled, got {choice!r}")
    if choice in ("auto", "compiled"):
        try:
            from . import _rk4core

            return _rk4core
        except ImportError:
            if choice == "compiled":
                raise
    return _reference


_backend = _load_backend()
BACKEND = _backend.BACKEND
propagate_sin = _backend.propagate_sin


def hermite_eval(u: np.ndarray, du: np.ndarray, t: float) -> np.ndarray:
    """Evaluate node trajectories at time t in [0, 1] by cubic Hermite.

    u, du have shape (G, M+1) on the equispaced node grid of [0, 1].
    """
    g, nodes = u.shape
    m = nodes - 1
    if t <= 0.0:
        return u[:, 0].copy()
    if t >= 1.0:
        return u[:, -1].copy()
    pos = t * m
    k = min(int(pos), m - 1)
    s = pos - k
    h = 1.0 / m
    h00 = (1 + 2 * s) * (1 - s) ** 2
    h10 = s * (1 - s) ** 2
    h01 = s * s * (3 - 2 * s)
    h11 = s * s * (s - 1)
    return h00 * u[:, k] + h * h10 * du[:, k] + h01 * u[:, k + 1] + h * h11 * du[:, k + 1]


def first_nonpositive(u: np.ndarray) -> np.ndarray:
    """Whether each trajectory row dips to <= 0 somewhere on (0, 1]."""
    return (u[:, 1:] <= 0.0).any(axis=1)


def hermite_eval_points(u: np.ndarray, du: np.ndarray, pos: np.ndarray) -> np.ndarray:
    """Evaluate one node trajectory at many positions in [0, 1].

    u, du have shape (M+1,) on the equispaced node grid of [0, 1]; pos is an
    array of query positions.
    """
    m = u.size - 1
    pos = np.asarray(pos, dtype=float)
    x = np.clip(pos * m, 0.0, float(m))
    idx = np.minimum(x.astype(int), m - 1)
    s = x - idx
    h = 1.0 / m
    h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
    h10 = s * (1.0 - s) ** 2
    h01 = s * s * (3.0 - 2.0 * s)
    h11 = s * s * (s - 1.0)
    return h00 * u[idx] + h * h10 * du[idx] + h01 * u[idx + 1] + h * h11 * du[idx + 1]
