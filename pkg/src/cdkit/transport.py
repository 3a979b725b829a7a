"""Discrete optimal transport, displacement interpolation and entropy.

Exact transport plans come from a linear-program solver (HiGHS simplex
through scipy); entropic regularization is deliberately absent from all
verification paths because the inequalities under test carry explicit small
error terms that regularization bias would contaminate.  On interval spaces
the quadratic-cost problem is solved exactly by the monotone (quantile)
coupling, which also provides the geodesic family used for displacement
interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import DomainError, MarginalMismatchError
from .mm_core import FiniteMmSpace, OneDimMmSpace, validate_metric

__all__ = [
    "DiscreteMeasure",
    "Coupling",
    "DynamicalPlan1D",
    "w2_exact",
    "w2_1d",
    "interpolate",
    "renyi_entropy",
    "coupling_transfer",
    "sturm_D_upper",
    "gw_surrogate",
]

MASS_TOL = 1e-12
MARGINAL_TOL = 1e-10


@dataclass
class DiscreteMeasure:
    """Probability measure on the atoms of a space: support indices + masses."""

    indices: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        self.indices = np.asarray(self.indices, dtype=int)
        self.masses = np.asarray(self.masses, dtype=float)
        if self.indices.shape != self.masses.shape or self.indices.ndim != 1:
            raise DomainError("indices and masses must be parallel 1-d arrays")
        if np.any(self.masses < 0.0):
            raise DomainError("masses must be nonnegative")
        if abs(self.masses.sum() - 1.0) > MASS_TOL:
            raise DomainError(f"masses must sum to 1, got {self.masses.sum()}")
        if np.unique(self.indices).size != self.indices.size:
            raise DomainError("support indices must be distinct")

    @classmethod
    def from_dense(cls, vec: np.ndarray) -> "DiscreteMeasure":
        vec = np.asarray(vec, dtype=float)
        idx = np.nonzero(vec > 0.0)[0]
        return cls(idx, vec[idx] / vec[idx].sum())

    @classmethod
    def from_density(cls, space, f: Callable) -> "DiscreteMeasure":
        """Measure with density proportional to f against the space weights."""
        if isinstance(space, OneDimMmSpace):
            vals = np.asarray(f(space.grid), dtype=float)
        else:
            vals = np.asarray(f(np.arange(space.n)), dtype=float)
        if np.any(vals < 0.0):
            raise DomainError("density must be nonnegative")
        return cls.from_dense(vals * space.weights)

    def dense(self, n: int) -> np.ndarray:
        out = np.zeros(n)
        out[self.indices] = self.masses
        return out

    def density(self, ref_weights: np.ndarray) -> np.ndarray:
        """Atomwise density mass/weight; infinite where the reference vanishes."""
        w = np.asarray(ref_weights, dtype=float)[self.indices]
        with np.errstate(divide="ignore"):
            return np.where(w > 0.0, self.masses / np.where(w > 0.0, w, 1.0), math.inf)


@dataclass
class Coupling:
    """Transport plan between two discrete measures.

    ``matrix[i, j]`` is the mass moved from ``mu0.indices[i]`` to
    ``mu1.indices[j]``; marginals must match the measures to 1e-10.
    """

    matrix: np.ndarray
    mu0: DiscreteMeasure
    mu1: DiscreteMeasure

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=float)
        k0, k1 = self.mu0.masses.size, self.mu1.masses.size
        if self.matrix.shape != (k0, k1):
            raise DomainError("coupling shape must match the two supports")
        if np.any(self.matrix < -1e-15):
            raise MarginalMismatchError("coupling entries must be nonnegative")
        r0, r1 = self.marginal_residuals()
        if max(r0, r1) > MARGINAL_TOL:
            raise MarginalMismatchError(f"marginal residuals {r0:.2e}, {r1:.2e} exceed {MARGINAL_TOL}")

    def marginal_residuals(self) -> tuple[float, float]:
        r0 = float(np.abs(self.matrix.sum(axis=1) - self.mu0.masses).max())
        r1 = float(np.abs(self.matrix.sum(axis=0) - self.mu1.masses).max())
        return r0, r1

    def to_json_dict(self) -> dict:
        return {
            "rows": self.mu0.indices.tolist(),
            "cols": self.mu1.indices.tolist(),
            "matrix": self.matrix.tolist(),
        }


@dataclass
class DynamicalPlan1D:
    """Weighted family of interval geodesics realizing the monotone coupling.

    Each entry moves mass w[k] along the constant-speed segment from
    x0[k] to x1[k]; the family is non-crossing (1-d optimality).
    """

    x0: np.ndarray
    x1: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        self.x1 = np.asarray(self.x1, dtype=float)
        self.w = np.asarray(self.w, dtype=float)
        if not (self.x0.shape == self.x1.shape == self.w.shape):
            raise DomainError("plan arrays must be parallel")
        if np.any(self.w < 0.0) or abs(self.w.sum() - 1.0) > MASS_TOL:
            raise DomainError("plan weights must be a probability vector")
        # monotone: both endpoint sequences non-decreasing along the list
        if np.any(np.diff(self.x0) < -1e-12) or np.any(np.diff(self.x1) < -1e-12):
            raise DomainError("plan must be monotone (non-crossing)")

    @property
    def lengths(self) -> np.ndarray:
        return np.abs(self.x1 - self.x0)

    def positions(self, t: float) -> np.ndarray:
        return (1.0 - t) * self.x0 + t * self.x1

    def cost(self) -> float:
        return float((self.w * (self.x1 - self.x0) ** 2).sum())

    def to_json_dict(self) -> dict:
        return {"x0": self.x0.tolist(), "x1": self.x1.tolist(), "w": self.w.tolist()}


# ---------------------------------------------------------------------------
# Exact LP transport
# ---------------------------------------------------------------------------


def _transport_lp(cost: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact minimizer of <cost, pi> over the transport polytope U(a, b)."""
    k0, k1 = cost.shape
    if abs(a.sum() - b.sum()) > 1e-9:
        raise MarginalMismatchError(f"marginal masses differ: {a.sum()} vs {b.sum()}")
    row = sp.kron(sp.eye(k0), np.ones((1, k1)))
    col = sp.kron(np.ones((1, k0)), sp.eye(k1))
    # drop the last column constraint: it is implied by the others
    A_eq = sp.vstack([row, col.tocsr()[:-1]]).tocsr()
    b_eq = np.concatenate([a, b[:-1]])
    res = linprog(cost.ravel(), A_eq=A_eq, b_eq=b_eq, bounds=(0.0, None), method="highs")
    if res.status != 0:
        raise MarginalMismatchError(f"transport LP failed: {res.message}")
    return np.maximum(res.x.reshape(k0, k1), 0.0)


def w2_exact(mu0: DiscreteMeasure, mu1: DiscreteMeasure, dist: np.ndarray):
    """Quadratic-cost optimal transport via the exact LP solver.

    Returns (W2, Coupling) with the optimal vertex coupling.
    """
    dist = np.asarray(dist, dtype=float)
    cost = dist[np.ix_(mu0.indices, mu1.indices)] ** 2
    plan = _transport_lp(cost, mu0.masses, mu1.masses)
    w2 = math.sqrt(max(0.0, float((plan * cost).sum())))
    return w2, Coupling(plan, mu0, mu1)


def w2_1d(mu0: DiscreteMeasure, mu1: DiscreteMeasure, space: OneDimMmSpace):
    """Monotone (quantile) coupling on an interval space: exact in 1-d.

    Returns (W2, DynamicalPlan1D); the plan is the unique non-crossing one.
    """
    xs = space.grid
    ord0 = np.argsort(xs[mu0.indices], kind="stable")
    ord1 = np.argsort(xs[mu1.indices], kind="stable")
    p0 = xs[mu0.indices][ord0]
    m0 = mu0.masses[ord0]
    p1 = xs[mu1.indices][ord1]
    m1 = mu1.masses[ord1]
    i = j = 0
    rem0 = m0.copy()
    rem1 = m1.copy()
    x0, x1, w = [], [], []
    while i < p0.size and j < p1.size:
        m = min(rem0[i], rem1[j])
        if m > 0.0:
            x0.append(p0[i])
            x1.append(p1[j])
            w.append(m)
        rem0[i] -= m
        rem1[j] -= m
        if rem0[i] <= 1e-16:
            i += 1
        if j < p1.size and rem1[j] <= 1e-16:
            j += 1
    w_arr = np.asarray(w)
    w_arr = w_arr / w_arr.sum()
    plan = DynamicalPlan1D(np.asarray(x0), np.asarray(x1), w_arr)
    return math.sqrt(max(0.0, plan.cost())), plan


def interpolate(plan: DynamicalPlan1D, t: float, space: OneDimMmSpace):
    """Time-t pushforward of the plan, re-binned to the space grid.

    Mass at an off-grid position is split linearly between the two nearest
    grid points (exact total mass, O(h^2) barycenter error); positions
    within 1e-9 of a grid node snap to it so endpoint times reproduce
    grid-aligned measures without re-binning error.  Returns the measure
    and its atomwise density against the space weights.
    """
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")
    pos = plan.positions(t)
    h = space.h
    x = pos / h
    idx = np.clip(np.floor(x).astype(int), 0, space.cells - 1)
    frac = x - idx
    snap = frac < 1e-9
    frac = np.where(snap, 0.0, frac)
    hi_snap = frac > 1.0 - 1e-9
    idx = np.where(hi_snap, idx + 1, idx)
    frac = np.where(hi_snap, 0.0, frac)
    dense = np.zeros(space.cells + 1)
    np.add.at(dense, idx, plan.w * (1.0 - frac))
    up = frac > 0.0
    np.add.at(dense, idx[up] + 1, plan.w[up] * frac[up])
    measure = DiscreteMeasure.from_dense(dense)
    weights = space.weights
    with np.errstate(divide="ignore", invalid="ignore"):
        density = np.where(weights > 0.0, dense / np.where(weights > 0.0, weights, 1.0), math.inf)
    density[dense == 0.0] = 0.0
    return measure, density


def renyi_entropy(mu: DiscreteMeasure, ref_weights: np.ndarray, N: float) -> float:
    """S_N = -sum rho^(1-1/N) w over atoms with positive reference weight.

    rho is the atomwise density mass/weight; mass sitting on zero-weight
    atoms is the singular part and contributes nothing.
    """
    if N <= 1.0:
        raise DomainError(f"entropy index must satisfy N > 1, got {N}")
    w = np.asarray(ref_weights, dtype=float)[mu.indices]
    pos = w > 0.0
    # rho^(1-1/N) * w = mass^(1-1/N) * w^(1/N)
    return -float((mu.masses[pos] ** (1.0 - 1.0 / N) * w[pos] ** (1.0 / N)).sum())


def coupling_transfer(q: Coupling, mu: DiscreteMeasure) -> tuple[DiscreteMeasure, np.ndarray]:
    """Push a measure through the disintegration of a coupling.

    ``q`` couples two reference probability measures; ``mu`` must be
    absolutely continuous w.r.t. the first.  The output measure on the
    second space has density (against the second reference)

        rho2(y) = sum_x rho1(x) q(x, y) / b(y),

    the conditional average of mu's density, hence a probability measure;
    by Jensen the entropy S_N never increases under this map.
    """
    a = q.mu0.masses
    pos0 = {int(i): k for k, i in enumerate(q.mu0.indices)}
    rows = np.full(mu.indices.size, -1, dtype=int)
    for k, i in enumerate(mu.indices):
        r = pos0.get(int(i), -1)
        if r < 0 or a[r] <= 0.0:
            raise MarginalMismatchError("measure is not absolutely continuous w.r.t. the first marginal")
        rows[k] = r
    rho1 = mu.masses / a[rows]
    out_masses = rho1 @ q.matrix[rows]
    total = out_masses.sum()
    out_masses = out_masses / total
    b = q.mu1.masses
    with np.errstate(divide="ignore", invalid="ignore"):
        rho2 = np.where(b > 0.0, out_masses / np.where(b > 0.0, b, 1.0), 0.0)
    keep = out_masses > 0.0
    measure = DiscreteMeasure(q.mu1.indices[keep], out_masses[keep] / out_masses[keep].sum())
    return measure, rho2


def sturm_D_upper(
    X: FiniteMmSpace, Y: FiniteMmSpace, cross: np.ndarray
) -> float:
    """Wasserstein distance between the two measures inside an explicit gluing.

    ``cross[i, j]`` is the user-supplied distance between point i of X and
    point j of Y; the glued metric on the disjoint union must satisfy the
    triangle inequality (validated).  The value is an upper bound for the
    transport distance between the isomorphism classes, which is the
    infimum over all such gluings.
    """
    if abs(X.total_mass - 1.0) > 1e-9 or abs(Y.total_mass - 1.0) > 1e-9:
        raise DomainError("both spaces must be normalized")
    cross = np.asarray(cross, dtype=float)
    if cross.shape != (X.n, Y.n):
        raise DomainError("cross-distance matrix has wrong shape")
    glued = np.block([[X.dist, cross], [cross.T, Y.dist]])
    validate_metric(glued)
    mu_x = DiscreteMeasure(np.arange(X.n), X.weights / X.total_mass)
    mu_y = DiscreteMeasure(np.arange(Y.n), Y.weights / Y.total_mass)
    cost = cross**2
    plan = _transport_lp(cost, mu_x.masses, mu_y.masses)
    return math.sqrt(max(0.0, float((plan * cost).sum())))


def gw_surrogate(
    X: FiniteMmSpace,
    Y: FiniteMmSpace,
    init: np.ndarray | None = None,
    max_iter: int = 60,
    tol: float = 1e-13,
) -> float:
    """Quadratic Gromov-Wasserstein-type discrepancy via alternating LP.

    Minimizes (sum |d_X(i,i') - d_Y(j,j')|^2 pi_{ij} pi_{i'j'})^(1/2) by
    iterating exact-LP steps on the linearized cost, starting from the
    product coupling (or ``init``).  Deterministic, and a non-certified
    local minimum: the true discrepancy is the global one.
    """
    if abs(X.total_mass - 1.0) > 1e-9 or abs(Y.total_mass - 1.0) > 1e-9:
        raise DomainError("both spaces must be normalized")
    a, b = X.weights, Y.weights
    dX, dY = X.dist, Y.dist
    cA = float((dX**2 @ a) @ a)
    cB = float((dY**2 @ b) @ b)
    pi = np.outer(a, b) if init is None else np.asarray(init, dtype=float)
    if pi.shape != (X.n, Y.n):
        raise DomainError("initial coupling has wrong shape")

    def objective(p):
        return cA + cB - 2.0 * float((p * (dX @ p @ dY)).sum())

    def lin_cost(p):
        return (dX**2 @ a)[:, None] + ((dY**2 @ b)[None, :]) - 2.0 * (dX @ p @ dY)

    best = objective(pi)
    best_pi = pi
    for _ in range(max_iter):
        pi = _transport_lp(lin_cost(best_pi), a, b)
        val = objective(pi)
        if val < best - tol:
            best, best_pi = val, pi
        else:
            break
    return math.sqrt(max(0.0, best))
