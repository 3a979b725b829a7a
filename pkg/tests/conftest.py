"""Shared test fixtures and generators."""

from __future__ import annotations

import numpy as np
import pytest

from cdkit.comparison_ode import CurvatureProfile


def random_smooth_profile(
    rng: np.random.Generator,
    L: float = 1.5,
    cells: int = 512,
    amp: float = 3.0,
    modes: int = 3,
    offset: float | None = None,
) -> CurvatureProfile:
    """Bounded random curvature field, sampled onto a uniform grid.

    Smooth (a few Fourier modes) so that finite-difference residual oracles
    are meaningful; the stored profile is piecewise linear as always.
    """
    r = np.linspace(0.0, L, cells + 1)
    vals = np.full(cells + 1, rng.uniform(-amp, amp) if offset is None else offset)
    for m in range(1, modes + 1):
        a, b = rng.normal(size=2) * amp / (2.0 * m)
        vals = vals + a * np.sin(2.0 * np.pi * m * r / L) + b * np.cos(2.0 * np.pi * m * r / L)
    return CurvatureProfile(L, vals)


def random_euclidean_space(rng: np.random.Generator, n: int, dim: int = 3, kappa_scale: float = 2.0):
    """Random finite mm space from points in Euclidean space."""
    from cdkit.mm_core import FiniteMmSpace

    pts = rng.random((n, dim))
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=2)
    np.fill_diagonal(dist, 0.0)
    weights = rng.random(n) + 0.05
    kappa = rng.normal(0.0, kappa_scale, n)
    return FiniteMmSpace(dist, weights, kappa)


def random_coupling(rng: np.random.Generator, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Random feasible coupling with exact marginals.

    Mass is matched two-pointer style after shuffling both supports, so the
    marginals hold to rounding, not to an iterative-fitting tolerance.
    """
    perm0 = rng.permutation(a.size)
    perm1 = rng.permutation(b.size)
    out = np.zeros((a.size, b.size))
    rem0 = a[perm0].copy()
    rem1 = b[perm1].copy()
    i = j = 0
    while i < a.size and j < b.size:
        m = min(rem0[i], rem1[j])
        out[perm0[i], perm1[j]] += m
        rem0[i] -= m
        rem1[j] -= m
        if rem0[i] <= 1e-17:
            i += 1
        if j < b.size and rem1[j] <= 1e-17:
            j += 1
    return out


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)
