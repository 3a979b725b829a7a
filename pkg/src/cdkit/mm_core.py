"""Finite and one-dimensional metric measure spaces with curvature fields.

Two discretizations are provided: ``FiniteMmSpace`` (point set, distance
matrix, positive atom weights, sampled curvature) and ``OneDimMmSpace`` (an
interval with a piecewise-linear density against Lebesgue measure).  On the
interval spaces all masses are exact integrals of the piecewise-linear
density, so set operations (balls, cell unions) introduce no binning error.

Exactly-constructed fixtures: interval spaces whose density is u^(N-1) for
a nonnegative solution of u'' + (kappa/(N-1)) u = 0 (these satisfy the
curvature-dimension condition for the attached profile by construction),
the constant-curvature model spaces, spiked profiles driving the cusp
sequences, and warped-product spaces over a finite cross-section.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import dijkstra

from .comparison_ode import (
    CurvatureProfile,
    model_pi,
    model_sin,
    model_volume,
    solve_oscillator,
)
from .errors import DomainError, InvalidProfileError, NormalizationError

__all__ = [
    "SpikedProfile",
    "FiniteMmSpace",
    "OneDimMmSpace",
    "validate_metric",
    "normalize",
    "normalize_pointed",
    "excess_k",
    "excess_k_pointed",
    "rescale",
    "make_model_space",
    "make_cd_fixture",
    "make_spiked_profile",
    "make_warped_product",
]


# ---------------------------------------------------------------------------
# Spiked profiles (cusp drivers)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpikedProfile:
    """Constant curvature ``base`` with one triangular dip of given depth.

    The dip has support width ``width`` centered at ``center`` and reaches
    ``base - depth`` at the center.  Kept in analytic form because cusp
    sequences shrink the width far below any storable uniform grid; the
    breakpoints make exact piecewise integration possible at every scale.
    """

    base: float
    depth: float
    width: float
    center: float
    L: float

    def __post_init__(self):
        if self.L <= 0.0 or self.depth < 0.0 or self.width < 0.0:
            raise InvalidProfileError("spike needs L > 0, depth >= 0, width >= 0")
        if self.width > 0.0 and not (
            0.0 <= self.center - self.width / 2.0 and self.center + self.width / 2.0 <= self.L
        ):
            raise InvalidProfileError("spike support must lie inside [0, L]")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.width == 0.0 or self.depth == 0.0:
            out = np.full_like(r, self.base)
        else:
            out = self.base - self.depth * np.maximum(
                0.0, 1.0 - np.abs(r - self.center) / (self.width / 2.0)
            )
        return out if out.ndim else float(out)

    def breakpoints(self) -> np.ndarray:
        if self.width == 0.0 or self.depth == 0.0:
            return np.array([0.0, self.L])
        return np.unique(
            np.array(
                [0.0, self.center - self.width / 2.0, self.center, self.center + self.width / 2.0, self.L]
            )
        )

    def min_value(self) -> float:
        return self.base - self.depth if self.width > 0.0 else self.base

    def max_value(self) -> float:
        return self.base

    def resample(self, cells: int) -> CurvatureProfile:
        r = np.linspace(0.0, self.L, cells + 1)
        return CurvatureProfile(self.L, self(r))

    def to_json_dict(self) -> dict:
        return {
            "kind": "spike",
            "base": self.base,
            "depth": self.depth,
            "width": self.width,
            "center": self.center,
            "L": self.L,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SpikedProfile":
        return cls(d["base"], d["depth"], d["width"], d["center"], d["L"])


def make_spiked_profile(
    K: float, depth: float, width: float, center: float, L: float, cells: int | None = None
) -> CurvatureProfile:
    """Uniform-grid profile equal to K except a triangular dip to K - depth.

    The grid must resolve the dip; with the default cell count (16 cells
    across the dip, at least 512 total) widths below ~1e-4 * L are rejected,
    use SpikedProfile directly for those.
    """
    spike = SpikedProfile(K, depth, width, center, L)
    if cells is None:
        if width > 0.0 and depth > 0.0:
            cells = max(512, int(math.ceil(16.0 * L / width)))
        else:
            cells = 512
    if cells > 4_000_000:
        raise DomainError(
            f"width {width} needs {cells} cells to resolve; use SpikedProfile instead"
        )
    return spike.resample(cells)


def _kappa_from_json(d: dict):
    if d.get("kind") == "spike":
        return SpikedProfile.from_json_dict(d)
    return CurvatureProfile.from_json_dict(d)


# ---------------------------------------------------------------------------
# Finite metric measure spaces
# ---------------------------------------------------------------------------


_TRIANGLE_SCAN_LIMIT = 300


def validate_metric(dist: np.ndarray, tol: float | None = None) -> None:
    """Raise DomainError unless ``dist`` satisfies the triangle inequality.

    Exhaustive scan up to 300 points, 200k random triples beyond.
    """
    d = np.asarray(dist, dtype=float)
    n = d.shape[0]
    if tol is None:
        tol = 1e-9 * max(float(d.max()), 1e-300)
    if n <= _TRIANGLE_SCAN_LIMIT:
        for k in range(n):
            if np.any(d > d[:, [k]] + d[[k], :] + tol):
                raise DomainError("triangle inequality violated")
    else:
        rng = np.random.default_rng(0)
        idx = rng.integers(0, n, size=(200_000, 3))
        i, j, k = idx.T
        if np.any(d[i, j] > d[i, k] + d[k, j] + tol):
            raise DomainError("triangle inequality violated")


@dataclass
class FiniteMmSpace:
    """Finite point set with distance matrix, atom weights and curvature field.

    Balls are closed: mass queries use d <= R.  Single-point spaces are
    rejected.  Triangle inequality is validated exhaustively up to 300
    points and on random triples beyond.
    """

    dist: np.ndarray
    weights: np.ndarray
    kappa: np.ndarray
    base: int | None = None

    def __post_init__(self):
        self.dist = np.asarray(self.dist, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        self.kappa = np.asarray(self.kappa, dtype=float)
        n = self.dist.shape[0]
        if n < 2:
            raise DomainError("degenerate single-point space rejected")
        if self.dist.shape != (n, n):
            raise DomainError("distance matrix must be square")
        if self.weights.shape != (n,) or self.kappa.shape != (n,):
            raise DomainError("weights and kappa must have one entry per point")
        if not np.all(np.isfinite(self.dist)) or np.any(self.dist < 0.0):
            raise DomainError("distances must be finite and nonnegative")
        if np.any(np.abs(np.diagonal(self.dist)) > 0.0):
            raise DomainError("distance matrix must have zero diagonal")
        if not np.allclose(self.dist, self.dist.T, atol=1e-12 * (1.0 + self.dist.max())):
            raise DomainError("distance matrix must be symmetric")
        if np.any(self.weights <= 0.0) or not np.all(np.isfinite(self.weights)):
            raise DomainError("weights must be strictly positive")
        if not np.all(np.isfinite(self.kappa)):
            raise DomainError("curvature field must be finite")
        if self.base is not None and not 0 <= self.base < n:
            raise DomainError(f"base index {self.base} out of range")
        validate_metric(self.dist)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    @property
    def diameter(self) -> float:
        return float(self.dist.max())

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def ball_mass(self, center: int, R: float) -> float:
        mask = self.dist[center] <= R * (1.0 + 1e-12)
        return float(self.weights[mask].sum())

    def relabeled(self, perm: np.ndarray) -> "FiniteMmSpace":
        """The isomorphic space with points permuted by ``perm``."""
        perm = np.asarray(perm)
        inv = np.argsort(perm)
        base = None if self.base is None else int(inv[self.base])
        return FiniteMmSpace(
            self.dist[np.ix_(perm, perm)], self.weights[perm], self.kappa[perm], base
        )

    def to_json_dict(self) -> dict:
        return {
            "dist": self.dist.tolist(),
            "weights": self.weights.tolist(),
            "kappa": self.kappa.tolist(),
            "base": self.base,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "FiniteMmSpace":
        return cls(
            np.asarray(d["dist"], dtype=float),
            np.asarray(d["weights"], dtype=float),
            np.asarray(d["kappa"], dtype=float),
            d.get("base"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "FiniteMmSpace":
        return cls.from_json_dict(json.loads(text))


# ---------------------------------------------------------------------------
# One-dimensional spaces
# ---------------------------------------------------------------------------


@dataclass
class OneDimMmSpace:
    """Interval [0, L] with piecewise-linear density against Lebesgue measure.

    ``density`` is sampled on the uniform grid with step h = L / (cells);
    masses of intervals and balls are exact integrals of the interpolated
    density.  Atom weights (for transport and entropy) are the trapezoid
    cell masses, consistent with those integrals.
    """

    L: float
    density: np.ndarray
    kappa: CurvatureProfile | SpikedProfile
    N: float
    base: float | None = None

    def __post_init__(self):
        self.density = np.asarray(self.density, dtype=float)
        if self.L <= 0.0:
            raise DomainError("interval length must be positive")
        if self.density.size < 3:
            raise DomainError("density needs at least 3 samples")
        if np.any(self.density < 0.0) or not np.all(np.isfinite(self.density)):
            raise DomainError("density must be nonnegative and finite")
        if np.any(self.density[1:-1] <= 0.0):
            raise DomainError("density must be positive on the open interval")
        if self.N < 2.0:
            raise DomainError(f"dimension bound must satisfy N >= 2, got {self.N}")
        if self.base is not None and not 0.0 <= self.base <= self.L:
            raise DomainError("base point must lie in [0, L]")
        if self.kappa.L < self.L * (1.0 - 1e-9):
            raise DomainError("curvature must be defined on all of [0, L]")

    @property
    def cells(self) -> int:
        return self.density.size - 1

    @property
    def h(self) -> float:
        return self.L / self.cells

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.density.size)

    @property
    def weights(self) -> np.ndarray:
        """Trapezoid cell masses: half cells at the two endpoints."""
        w = self.density * self.h
        w[0] *= 0.5
        w[-1] *= 0.5
        return w

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def density_at(self, x):
        return np.interp(x, self.grid, self.density)

    def interval_mass(self, a: float, b: float) -> float:
        """Exact integral of the piecewise-linear density over [a, b] ∩ [0, L]."""
        a = max(0.0, min(a, self.L))
        b = max(0.0, min(b, self.L))
        if b <= a:
            return 0.0
        cum = self._cumulative()
        return float(np.interp(b, self.grid, cum) - np.interp(a, self.grid, cum))

    def _cumulative(self) -> np.ndarray:
        if not hasattr(self, "_cum"):
            cells = 0.5 * (self.density[:-1] + self.density[1:]) * self.h
            self._cum = np.concatenate([[0.0], np.cumsum(cells)])
        return self._cum

    def ball_mass(self, x: float, R: float) -> float:
        return self.interval_mass(x - R, x + R)

    def with_base(self, x: float) -> "OneDimMmSpace":
        return replace(self, density=self.density.copy(), base=float(x))

    def scaled_mass(self, factor: float) -> "OneDimMmSpace":
        out = replace(self, density=self.density * factor)
        return out

    def to_finite(self, n: int) -> FiniteMmSpace:
        """Quantile discretization: n equal-mass atoms at mass quantiles."""
        cum = self._cumulative()
        total = cum[-1]
        levels = (np.arange(n) + 0.5) / n * total
        xs = np.interp(levels, cum, self.grid)
        dist = np.abs(xs[:, None] - xs[None, :])
        weights = np.full(n, 1.0 / n)
        kap = np.asarray(self.kappa(xs), dtype=float)
        base = None
        if self.base is not None:
            base = int(np.argmin(np.abs(xs - self.base)))
        return FiniteMmSpace(dist, weights, kap, base)

    def to_json_dict(self) -> dict:
        kd = self.kappa.to_json_dict()
        return {
            "L": self.L,
            "h": self.h,
            "density": self.density.tolist(),
            "kappa": kd,
            "N": self.N,
            "base": self.base,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "OneDimMmSpace":
        return cls(
            float(d["L"]),
            np.asarray(d["density"], dtype=float),
            _kappa_from_json(d["kappa"]),
            float(d["N"]),
            d.get("base"),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "OneDimMmSpace":
        return cls.from_json_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Normalization and excess
# ---------------------------------------------------------------------------


def normalize(X):
    """Scale the measure to total mass 1 (distances unchanged; idempotent)."""
    total = X.total_mass
    if not total > 0.0:
        raise NormalizationError("total mass must be positive")
    if isinstance(X, FiniteMmSpace):
        return FiniteMmSpace(X.dist, X.weights / total, X.kappa, X.base)
    return X.scaled_mass(1.0 / total)


def normalize_pointed(X):
    """Scale the measure so the closed unit ball at the base has mass 1."""
    if isinstance(X, FiniteMmSpace):
        if X.base is None:
            raise NormalizationError("pointed normalization needs a base point")
        m1 = X.ball_mass(X.base, 1.0)
        if not m1 > 0.0:
            raise NormalizationError("unit ball at the base has no mass")
        return FiniteMmSpace(X.dist, X.weights / m1, X.kappa, X.base)
    if X.base is None:
        raise NormalizationError("pointed normalization needs a base point")
    m1 = X.ball_mass(X.base, 1.0)
    if not m1 > 0.0:
        raise NormalizationError("unit ball at the base has no mass")
    return X.scaled_mass(1.0 / m1)


def _is_pointed_normalized(X, tol: float = 1e-9) -> bool:
    if X.base is None:
        return False
    return abs(X.ball_mass(X.base, 1.0) - 1.0) <= tol


def _deficit_pieces(space: OneDimMmSpace, K: float, lo: float, hi: float):
    """Linear pieces (a, b, deficit(a), deficit(b)) of (kappa - K)_- on [lo, hi].

    For spiked profiles the deficit values at the dip corners are written
    down analytically: evaluating the profile at a corner suffers float
    cancellation (|r - c| ~ width/2 to the last ulp), and interpolating
    that noise across a wide neighboring cell would fabricate mass for
    widths near the float resolution.
    """
    kap = space.kappa
    if isinstance(kap, SpikedProfile) and kap.width > 0.0 and kap.depth > 0.0:
        hw = kap.width / 2.0
        c = kap.center
        b0 = K - kap.base
        b1 = K - kap.base + kap.depth
        raw = [
            (0.0, c - hw, b0, b0),
            (c - hw, c, b0, b1),
            (c, c + hw, b1, b0),
            (c + hw, kap.L, b0, b0),
        ]
    else:
        g = np.asarray(kap.breakpoints(), dtype=float)
        vals = K - np.asarray(kap(g), dtype=float)
        raw = [(g[i], g[i + 1], vals[i], vals[i + 1]) for i in range(g.size - 1)]
    # subdivide at density grid nodes, clip to [lo, hi], split sign changes
    grid = space.grid
    pieces = []
    for a, b, fa, fb in raw:
        aa, bb = max(a, lo), min(b, hi)
        if bb <= aa:
            continue
        inner = grid[(grid > aa) & (grid < bb)]
        cuts = np.concatenate([[aa], inner, [bb]])
        if b > a:
            fvals = fa + (fb - fa) * (cuts - a) / (b - a)
        else:
            fvals = np.full_like(cuts, fa)
        for j in range(cuts.size - 1):
            x0, x1, v0, v1 = cuts[j], cuts[j + 1], fvals[j], fvals[j + 1]
            if x1 <= x0:
                continue
            if v0 * v1 < 0.0:
                xm = x0 + (x1 - x0) * (-v0) / (v1 - v0)
                pieces.append((x0, xm, max(0.0, v0), 0.0))
                pieces.append((xm, x1, 0.0, max(0.0, v1)))
            else:
                pieces.append((x0, x1, max(0.0, v0), max(0.0, v1)))
    return pieces


def _deficit_lp_integral(space: OneDimMmSpace, p: float, K: float, lo: float, hi: float) -> float:
    """Exact integral of (kappa - K)_-^p * density over [lo, hi].

    Both the curvature and the density are piecewise linear; the integrand
    is integrated in closed form on every subinterval where both are single
    linear pieces and (kappa - K) has one sign.
    """
    lo = max(0.0, lo)
    hi = min(space.L, hi)
    if hi <= lo:
        return 0.0
    return sum(
        _piece_integral(space, p, a, b, fa, fb)
        for a, b, fa, fb in _deficit_pieces(space, K, lo, hi)
    )


def _piece_integral(space: OneDimMmSpace, p: float, a: float, b: float, fa: float, fb: float) -> float:
    """integral of f^p * rho over [a, b] with f linear from fa to fb (both >= 0)."""
    if fa == 0.0 and fb == 0.0:
        return 0.0
    ell = b - a
    ra, rb = float(space.density_at(a)), float(space.density_at(b))
    slope_f = (fb - fa) / ell
    slope_r = (rb - ra) / ell
    if abs(slope_f) * ell < 1e-15 * max(fa, fb):
        # essentially constant deficit
        f = 0.5 * (fa + fb)
        return f**p * (0.5 * (ra + rb)) * ell
    # substitute x = fa + slope_f * s:  integral (1/slope_f) x^p (alpha + beta x) dx
    alpha = ra - slope_r * fa / slope_f
    beta = slope_r / slope_f
    x0, x1 = fa, fb

    def anti(x):
        return alpha * x ** (p + 1.0) / (p + 1.0) + beta * x ** (p + 2.0) / (p + 2.0)

    return (anti(x1) - anti(x0)) / slope_f


def excess_k(X, p: float, K: float) -> float:
    """(diam X)^2 times the L^p norm of (kappa - K)_- against the
    normalized measure."""
    if p < 1.0:
        raise DomainError(f"p must be >= 1, got {p}")
    if isinstance(X, FiniteMmSpace):
        wbar = X.weights / X.total_mass
        deficit = np.maximum(0.0, K - X.kappa)
        lp = float((deficit**p * wbar).sum()) ** (1.0 / p)
        return X.diameter**2 * lp
    integral = _deficit_lp_integral(X, p, K, 0.0, X.L)
    lp = (integral / X.total_mass) ** (1.0 / p)
    return X.L**2 * lp


def excess_k_pointed(X, p: float, K: float, R: float) -> float:
    """R^2 times the L^p norm of (kappa - K)_- over the R-ball at the base.

    Requires the pointed-normalized representative (unit ball mass 1); the
    norm is against the raw measure.
    """
    if p < 1.0:
        raise DomainError(f"p must be >= 1, got {p}")
    if R <= 0.0:
        raise DomainError("R must be positive")
    if not _is_pointed_normalized(X):
        raise NormalizationError("space must be pointed-normalized (m(B_1(o)) = 1)")
    if isinstance(X, FiniteMmSpace):
        mask = X.dist[X.base] <= R * (1.0 + 1e-12)
        deficit = np.maximum(0.0, K - X.kappa[mask])
        lp = float((deficit**p * X.weights[mask]).sum()) ** (1.0 / p)
        return R**2 * lp
    integral = _deficit_lp_integral(X, p, K, X.base - R, X.base + R)
    return R**2 * integral ** (1.0 / p)


def rescale(X, r: float):
    """Distances scaled by r, weights unchanged, curvature by r^-2."""
    if r <= 0.0:
        raise DomainError("scale factor must be positive")
    if isinstance(X, FiniteMmSpace):
        return FiniteMmSpace(X.dist * r, X.weights.copy(), X.kappa / r**2, X.base)
    kap = X.kappa
    if isinstance(kap, CurvatureProfile):
        kap2 = CurvatureProfile(kap.L * r, kap.samples / r**2)
    else:
        kap2 = SpikedProfile(kap.base / r**2, kap.depth / r**2, kap.width * r, kap.center * r, kap.L * r)
    base = None if X.base is None else X.base * r
    return OneDimMmSpace(X.L * r, X.density.copy(), kap2, X.N, base)


# ---------------------------------------------------------------------------
# Fixture generators
# ---------------------------------------------------------------------------


def make_model_space(K: float, N: float, h: float, base: float | None = None) -> OneDimMmSpace:
    """The interval model space with density sin_{K/(N-1)}^(N-1)."""
    if K <= 0.0:
        raise DomainError("the compact model space needs K > 0")
    L = model_pi(K, N)
    cells = max(2, int(round(L / h)))
    grid = np.linspace(0.0, L, cells + 1)
    density = np.asarray(model_sin(K, N, grid), dtype=float) ** (N - 1.0)
    density[-1] = max(density[-1], 0.0)
    profile = CurvatureProfile.constant(K, L, cells=min(cells, 512))
    return OneDimMmSpace(L, density, profile, N, base)


def make_cd_fixture(
    kappa: CurvatureProfile | SpikedProfile,
    N: float,
    h: float,
    u0: float = 0.0,
    du0: float = 1.0,
    base: float | None = None,
) -> OneDimMmSpace:
    """Interval space with density u^(N-1), u solving u'' + (kappa/(N-1)) u = 0.

    If u hits zero inside the interval the space is truncated at the first
    zero (with a warning); the resulting space carries the restricted
    curvature.
    """
    if N < 2.0:
        raise DomainError(f"dimension bound must satisfy N >= 2, got {N}")
    if u0 < 0.0 or (u0 == 0.0 and du0 <= 0.0):
        raise DomainError("initial data must give a nonnegative nontrivial solution")
    L = kappa.L
    u_eval, zero = _solve_weight_ode(kappa, N, u0, du0)
    L_eff = L
    if zero < L:
        warnings.warn(
            f"solution hits zero at r={zero:.6g} < L={L:.6g}; truncating the fixture",
            stacklevel=2,
        )
        L_eff = zero
    cells = max(2, int(round(L_eff / h)))
    grid = np.linspace(0.0, L_eff, cells + 1)
    density = np.maximum(0.0, np.asarray(u_eval(grid), dtype=float)) ** (N - 1.0)
    if L_eff < L:
        if isinstance(kappa, CurvatureProfile):
            kappa = kappa.restricted(L_eff)
        else:
            kappa = replace(kappa, L=L_eff)
    return OneDimMmSpace(L_eff, density, kappa, N, base)


_SPIKE_RESOLVE_CELLS = 200_000


def _solve_weight_ode(kappa, N: float, u0: float, du0: float):
    """Solve u'' + (kappa/(N-1)) u = 0; returns (evaluator, first zero).

    Spiked profiles whose dip is too narrow for any affordable grid are
    handled by a derivative impulse at the spike center: crossing the dip
    changes u' by -(depth * width / 2) u(c) / (N-1) up to O(depth width^2),
    which is the exact effect of the triangular well in that limit.
    """
    L = kappa.L
    if isinstance(kappa, SpikedProfile) and kappa.depth > 0.0 and kappa.width > 0.0:
        cells_needed = int(math.ceil(16.0 * L / kappa.width))
        if cells_needed > _SPIKE_RESOLVE_CELLS:
            c = kappa.center
            left = CurvatureProfile.constant(kappa.base / (N - 1.0), c, 512)
            osc1 = solve_oscillator(left, c, u0, du0)
            u_c = osc1.y(c)
            du_c = osc1.dy(c) - (kappa.depth * kappa.width / 2.0) * u_c / (N - 1.0)
            right = CurvatureProfile.constant(kappa.base / (N - 1.0), L - c, 512)
            osc2 = solve_oscillator(right, L - c, u_c, du_c)

            def u_eval(r):
                r = np.asarray(r, dtype=float)
                out = np.where(r <= c, osc1.y(np.minimum(r, c)), osc2.y(np.maximum(r - c, 0.0)))
                return out if out.ndim else float(out)

            z1 = osc1.first_zero()
            if z1 < c:
                return u_eval, z1
            z2 = osc2.first_zero()
            return u_eval, (c + z2 if math.isfinite(z2) else math.inf)
        kappa = kappa.resample(max(2048, min(cells_needed, _SPIKE_RESOLVE_CELLS)))
    if isinstance(kappa, SpikedProfile):
        kappa = kappa.resample(2048)
    osc = solve_oscillator(kappa.scaled(1.0 / (N - 1.0)), L, u0, du0)
    return osc.y, osc.first_zero()


def make_warped_product(
    K: float,
    N: float,
    f: Callable | np.ndarray,
    cross_section: FiniteMmSpace,
    grid: np.ndarray,
    kappa_value: float | None = None,
) -> FiniteMmSpace:
    """Warped product of an interval against a finite cross-section.

    Grid points are (t_i, x_j); distances are shortest paths in the graph
    with axial edges of length dt, in-slice edges of length f(t_i) d(x_j,
    x_j'), and diagonal edges combining both (midpoint warp factor).
    Weights are the cell integrals of f^(N-1) times the cross atom masses.
    Slices where f vanishes collapse to a single point.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0.0):
        raise DomainError("axial grid must be strictly increasing with >= 2 points")
    fvals = np.asarray(f(grid), dtype=float) if callable(f) else np.asarray(f, dtype=float)
    if fvals.shape != grid.shape:
        raise DomainError("warping samples must match the axial grid")
    if np.any(fvals < 0.0):
        raise DomainError("warping function must be nonnegative")
    nt, nc = grid.size, cross_section.n
    dM = cross_section.dist
    mM = cross_section.weights

    # node layout: poles collapse to single nodes
    node_of = {}
    nodes = 0
    for i in range(nt):
        if fvals[i] == 0.0:
            node_of[i] = [nodes]
            nodes += 1
        else:
            node_of[i] = list(range(nodes, nodes + nc))
            nodes += nc

    rows, cols, vals = [], [], []

    def add_edge(a, b, w):
        rows.append(a)
        cols.append(b)
        vals.append(w)

    for i in range(nt):
        ids = node_of[i]
        if len(ids) == nc and fvals[i] > 0.0:
            fi = fvals[i]
            for j in range(nc):
                for j2 in range(j + 1, nc):
                    add_edge(ids[j], ids[j2], fi * dM[j, j2])
        if i + 1 < nt:
            dt = grid[i + 1] - grid[i]
            ids2 = node_of[i + 1]
            fmid = 0.5 * (fvals[i] + fvals[i + 1])
            if len(ids) == 1 or len(ids2) == 1:
                for a in ids:
                    for b in ids2:
                        add_edge(a, b, dt)
            else:
                for j in range(nc):
                    add_edge(ids[j], ids2[j], dt)
                    for j2 in range(nc):
                        if j2 != j:
                            add_edge(ids[j], ids2[j2], math.hypot(dt, fmid * dM[j, j2]))

    graph = sp.coo_matrix((vals, (rows, cols)), shape=(nodes, nodes))
    dist = dijkstra(graph.tocsr(), directed=False)

    # cell-integrated weights: integral of f^(N-1) over [t_i - h/2, t_i + h/2]
    fine = np.linspace(grid[0], grid[-1], 8 * (nt - 1) + 1)
    fN = np.interp(fine, grid, fvals) ** (N - 1.0)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (fN[:-1] + fN[1:]) * np.diff(fine))])
    cell_edges = np.concatenate([[grid[0]], 0.5 * (grid[:-1] + grid[1:]), [grid[-1]]])
    cell_int = np.diff(np.interp(cell_edges, fine, cum))

    weights = np.empty(nodes)
    kappas = np.empty(nodes)
    kv = K if kappa_value is None else kappa_value
    for i in range(nt):
        ids = node_of[i]
        if len(ids) == 1:
            weights[ids[0]] = cell_int[i] * mM.sum()
        else:
            for j, a in enumerate(ids):
                weights[a] = cell_int[i] * mM[j]
        for a in ids:
            kappas[a] = kv
    if np.any(weights <= 0.0):
        raise DomainError("warping function vanishes on a whole axial cell")

    base = node_of[0][0]
    return FiniteMmSpace(dist, weights, kappas, base)
