"""Comparison ODE machinery: generalized sine functions and distortion
coefficients for variable curvature bounds.

The central object is the solution ``s`` of ``v'' + kappa(r) v = 0`` with
``v(0) = 0``, ``v'(0) = 1`` for a sampled curvature profile ``kappa`` on
``[0, L]``.  Distortion coefficients are ratios of its values::

    sigma^(t)(theta) = s(t * theta) / s(theta)     (infinite past the first zero)
    tau^(t)(theta)   = t^(1/N) * sigma_{kappa/(N-1)}^(t)(theta)^(1 - 1/N)

Extended values follow the conventions ``r * inf = inf`` for ``r > 0``,
``0 * inf = 0`` and ``inf^a = inf`` for ``a > 0``; they are handled through
an explicit value-or-infinity type, never a large sentinel float.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.integrate import quad

from . import _kernels
from .errors import DomainError, InvalidProfileError
from .report import CheckPoint, VerificationReport

__all__ = [
    "CurvatureProfile",
    "ExtCoeff",
    "SinSolution",
    "solve_generalized_sin",
    "sigma",
    "tau",
    "tau_from_sigma",
    "const_sin",
    "const_cos",
    "const_pi",
    "sigma_const",
    "tau_const",
    "model_sin",
    "model_pi",
    "model_volume",
    "GeodesicCoefficients",
    "check_sigma_concavity",
]


# ---------------------------------------------------------------------------
# Curvature profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureProfile:
    """Piecewise-linear curvature bound sampled on a uniform grid of [0, L].

    ``samples[j]`` is the curvature at ``r_j = j * L / (len(samples) - 1)``;
    values in between are linearly interpolated.  Units: 1/length^2.
    """

    L: float
    samples: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "samples", np.asarray(self.samples, dtype=float))
        if not (self.L > 0.0 and math.isfinite(self.L)):
            raise InvalidProfileError(f"profile length must be positive, got {self.L}")
        if self.samples.ndim != 1 or self.samples.size < 3:
            raise InvalidProfileError("profile needs at least 3 uniform samples")
        if not np.all(np.isfinite(self.samples)):
            raise InvalidProfileError("profile samples must be finite")

    @property
    def cells(self) -> int:
        return self.samples.size - 1

    @property
    def step(self) -> float:
        return self.L / self.cells

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.samples.size)

    def __call__(self, r):
        return np.interp(r, self.grid, self.samples)

    def min_value(self) -> float:
        return float(self.samples.min())

    def max_value(self) -> float:
        return float(self.samples.max())

    def breakpoints(self) -> np.ndarray:
        return self.grid

    def scaled(self, factor: float) -> "CurvatureProfile":
        """Profile with all curvature values multiplied by ``factor``."""
        return CurvatureProfile(self.L, self.samples * factor)

    def reversed_(self) -> "CurvatureProfile":
        """The profile traversed from L to 0."""
        return CurvatureProfile(self.L, self.samples[::-1].copy())

    def restricted(self, L_new: float, cells: int | None = None) -> "CurvatureProfile":
        """Resample onto [0, L_new] for 0 < L_new <= L."""
        if not 0.0 < L_new <= self.L * (1.0 + 1e-12):
            raise DomainError(f"cannot restrict profile of length {self.L} to {L_new}")
        L_new = min(L_new, self.L)
        m = cells if cells is not None else max(2, int(round(self.cells * L_new / self.L)))
        r = np.linspace(0.0, L_new, m + 1)
        return CurvatureProfile(L_new, self(r))

    @classmethod
    def constant(cls, value: float, L: float, cells: int = 2) -> "CurvatureProfile":
        return cls(L, np.full(max(2, cells) + 1, float(value)))

    @classmethod
    def from_callable(cls, f: Callable[[np.ndarray], np.ndarray], L: float, cells: int) -> "CurvatureProfile":
        r = np.linspace(0.0, L, max(2, cells) + 1)
        return cls(L, np.asarray(f(r), dtype=float))

    def to_json_dict(self) -> dict:
        return {"L": self.L, "samples": self.samples.tolist()}

    @classmethod
    def from_json_dict(cls, d: dict) -> "CurvatureProfile":
        return cls(float(d["L"]), np.asarray(d["samples"], dtype=float))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, text: str) -> "CurvatureProfile":
        return cls.from_json_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Extended values
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExtCoeff:
    """Nonnegative extended real: a finite float or +infinity.

    Arithmetic needed by the distortion-coefficient formulas is provided as
    explicit methods so that the conventions 0*inf = 0 and r*inf = inf for
    r > 0 are applied exactly rather than through IEEE semantics.
    """

    value: float

    def __post_init__(self):
        if math.isnan(self.value) or self.value < 0.0:
            raise ValueError(f"ExtCoeff must be nonnegative or +inf, got {self.value}")

    @classmethod
    def finite(cls, v: float) -> "ExtCoeff":
        if not math.isfinite(v):
            raise ValueError("use ExtCoeff.infinite() for the infinite value")
        return cls(float(v))

    @classmethod
    def infinite(cls) -> "ExtCoeff":
        return cls(math.inf)

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)

    def times(self, r: float) -> "ExtCoeff":
        """r * self with 0 * inf = 0 and r * inf = inf for r > 0."""
        if r < 0.0:
            raise ValueError("extended coefficients are nonnegative")
        if self.is_infinite:
            return ExtCoeff.finite(0.0) if r == 0.0 else ExtCoeff.infinite()
        return ExtCoeff.finite(r * self.value)

    def power(self, a: float) -> "ExtCoeff":
        """self**a for a > 0, with inf**a = inf."""
        if a <= 0.0:
            raise ValueError("exponent must be positive")
        if self.is_infinite:
            return ExtCoeff.infinite()
        return ExtCoeff.finite(self.value**a)

    def __float__(self) -> float:
        return self.value

    def __le__(self, other) -> bool:
        return self.value <= float(other)

    def __lt__(self, other) -> bool:
        return self.value < float(other)


# ---------------------------------------------------------------------------
# Constant-curvature closed forms
# ---------------------------------------------------------------------------


def const_sin(k: float, r):
    """Generalized sine for constant curvature k: solution of v'' + k v = 0."""
    r = np.asarray(r, dtype=float)
    if k > 0.0:
        rk = math.sqrt(k)
        out = np.sin(rk * r) / rk
    elif k < 0.0:
        rk = math.sqrt(-k)
        out = np.sinh(rk * r) / rk
    else:
        out = r.copy()
    return out if out.ndim else float(out)


def const_cos(k: float, r):
    """Derivative of const_sin."""
    r = np.asarray(r, dtype=float)
    if k > 0.0:
        out = np.cos(math.sqrt(k) * r)
    elif k < 0.0:
        out = np.cosh(math.sqrt(-k) * r)
    else:
        out = np.ones_like(r)
    return out if out.ndim else float(out)


def const_pi(k: float) -> float:
    """First positive zero of const_sin: pi/sqrt(k) for k > 0, else +inf."""
    return math.pi / math.sqrt(k) if k > 0.0 else math.inf


def sigma_const(k: float, t: float, theta: float) -> ExtCoeff:
    """Distortion coefficient for constant curvature k."""
    _check_t(t)
    if theta < 0.0:
        raise DomainError("theta must be nonnegative")
    if theta >= const_pi(k):
        return ExtCoeff.infinite()
    if theta == 0.0:
        return ExtCoeff.finite(t)
    return ExtCoeff.finite(const_sin(k, t * theta) / const_sin(k, theta))


def tau_from_sigma(sig: ExtCoeff, N: float, t: float) -> ExtCoeff:
    """Modified coefficient t^(1/N) * sigma^(1-1/N) with extended conventions."""
    if N < 2.0:
        raise DomainError(f"dimension bound must satisfy N >= 2, got {N}")
    if sig.is_infinite:
        return ExtCoeff.finite(0.0) if t == 0.0 else ExtCoeff.infinite()
    return ExtCoeff.finite(t ** (1.0 / N) * sig.value ** (1.0 - 1.0 / N))


def tau_const(K: float, N: float, t: float, theta: float) -> ExtCoeff:
    """Modified distortion coefficient for constant curvature bound K."""
    return tau_from_sigma(sigma_const(K / (N - 1.0), t, theta), N, t)


def model_sin(K: float, N: float, r: float):
    """sin_{K/(N-1)}: the model-space warping function."""
    if np.any(np.asarray(r) < 0.0):
        raise DomainError("r must be nonnegative")
    return const_sin(K / (N - 1.0), r)


def model_pi(K: float, N: float) -> float:
    """Model diameter pi_{K/(N-1)}."""
    return const_pi(K / (N - 1.0))


def model_volume(K: float, N: float, R: float) -> float:
    """Model ball volume: integral of sin_{K/(N-1)}^(N-1) from 0 to R."""
    if R < 0.0:
        raise DomainError("R must be nonnegative")
    pk = model_pi(K, N)
    if R > pk * (1.0 + 1e-12):
        raise DomainError(f"R={R} exceeds the model diameter {pk}")
    R = min(R, pk)
    if R == 0.0:
        return 0.0
    k = K / (N - 1.0)
    val, _ = quad(lambda r: const_sin(k, r) ** (N - 1.0), 0.0, R, epsabs=1e-14, epsrel=1e-12, limit=200)
    return val


# ---------------------------------------------------------------------------
# Generalized sine solutions
# ---------------------------------------------------------------------------


@dataclass
class OscillatorSolution:
    """Node trajectory of y'' + kappa(r) y = 0 on [0, L].

    Propagation happens in the normalized variable s = r/L with RK4 steps
    aligned to the coefficient's sampling nodes, so a piecewise-linear
    coefficient is represented exactly (midpoint values are node averages)
    and no step straddles a kink.  Dense evaluation in between nodes is
    cubic Hermite from the stored (value, derivative) pairs.
    """

    L: float
    v: np.ndarray  # y at the s-nodes
    dv: np.ndarray  # L * y' at the s-nodes
    q: np.ndarray  # L^2 * kappa at the s-nodes

    @property
    def n_steps(self) -> int:
        return self.v.size - 1

    def y(self, r):
        pos = np.atleast_1d(np.asarray(r, dtype=float)) / self.L
        out = _kernels.hermite_eval_points(self.v, self.dv, pos)
        return float(out[0]) if np.isscalar(r) or np.asarray(r).ndim == 0 else out

    def dy(self, r):
        pos = np.atleast_1d(np.asarray(r, dtype=float)) / self.L
        out = _kernels.hermite_eval_points(self.dv, -self.q * self.v, pos) / self.L
        return float(out[0]) if np.isscalar(r) or np.asarray(r).ndim == 0 else out

    def first_zero(self) -> float:
        """First r > 0 with y(r) = 0, or +inf if y stays positive on (0, L].

        Bracketed on the node trajectory, then bisected on the Hermite
        interpolant to 1e-10 relative resolution.
        """
        nonpos = np.nonzero(self.v[1:] <= 0.0)[0]
        if nonpos.size == 0:
            return math.inf
        j = int(nonpos[0]) + 1
        hs = self.L / self.n_steps
        lo, hi = (j - 1) * hs, j * hs
        target = 1e-10 * max(1.0, hi)
        while hi - lo > target:
            mid = 0.5 * (lo + hi)
            if self.y(mid) > 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def _substeps_per_cell(step: float, q_max: float) -> int:
    """Substeps so the RK4 step stays well below the oscillation scale."""
    h_target = 0.005 / math.sqrt(max(1.0, q_max))
    return max(4, int(math.ceil(step / h_target)))


def solve_oscillator(
    kappa: Callable,
    L: float,
    y0: float,
    dy0: float,
    cells: int = 512,
    substeps: int | None = None,
) -> OscillatorSolution:
    """Integrate y'' + kappa(r) y = 0 on [0, L] with given initial data.

    For a CurvatureProfile the integration nodes refine the profile grid, so
    every kink of the coefficient lies on a step boundary.
    """
    if isinstance(kappa, CurvatureProfile):
        base_cells, step = kappa.cells, kappa.step
    else:
        base_cells, step = max(2, cells), L / max(2, cells)
    if substeps is None:
        probe = np.abs(np.asarray(kappa(np.linspace(0.0, L, 257)), dtype=float)).max()
        substeps = _substeps_per_cell(step, probe)
    n = base_cells * substeps
    r_nodes = np.linspace(0.0, L, n + 1)
    q = np.asarray(kappa(r_nodes), dtype=float) * L * L
    if not np.all(np.isfinite(q)):
        raise InvalidProfileError("curvature must be finite on [0, L]")
    v, dv = _kernels.propagate_sin(q[None, :], u0=float(y0), du0=float(dy0) * L)
    return OscillatorSolution(L, v[0], dv[0], q)


@dataclass
class SinSolution:
    """Numerically integrated (s, c) pair for a curvature profile.

    ``s_values`` and ``c_values`` sample the solution and its derivative on
    the profile grid; ``pi_kappa`` is the first positive zero of ``s`` in
    (0, L], or +inf when s stays positive (the domain ends at L, nothing is
    claimed beyond it).  Dense evaluation is available through ``s`` / ``c``.
    """

    profile: CurvatureProfile
    s_values: np.ndarray
    c_values: np.ndarray
    pi_kappa: float
    _osc: OscillatorSolution

    def s(self, r):
        return self._osc.y(r)

    def c(self, r):
        return self._osc.dy(r)

    def log_derivative(self, r):
        """s'/s, the logarithmic derivative (cot-like)."""
        return self.c(r) / self.s(r)

    def sigma(self, t: float, theta: float) -> ExtCoeff:
        """Distortion coefficient s(t*theta)/s(theta); +inf for theta >= pi_kappa."""
        _check_t(t)
        if theta < 0.0 or theta > self.profile.L * (1.0 + 1e-12):
            raise DomainError(f"theta={theta} outside [0, L={self.profile.L}]")
        if theta >= self.pi_kappa:
            return ExtCoeff.infinite()
        if theta == 0.0:
            return ExtCoeff.finite(t)
        if t == 0.0:
            return ExtCoeff.finite(0.0)
        if t == 1.0:
            return ExtCoeff.finite(1.0)
        vals = self._osc.y(np.array([t * theta, theta]))
        return ExtCoeff.finite(float(vals[0] / vals[1]))

    def ode_residual(self) -> float:
        """Max of |s'' + kappa s| / (1 + |s|) over interior grid points.

        s'' is recovered by one-sided 4th-order differences of the stored
        derivative nodes, with each stencil confined to a single profile
        cell (kappa is linear there, so the solution is smooth across the
        stencil).  This measures the trajectory against the equation rather
        than restating the construction.
        """
        osc = self._osc
        R = osc.n_steps // self.profile.cells
        if R < 4:
            return math.nan
        idx = np.arange(1, self.profile.cells) * R
        hs = 1.0 / osc.n_steps
        dv = osc.dv
        d = (
            25.0 / 12.0 * dv[idx]
            - 4.0 * dv[idx - 1]
            + 3.0 * dv[idx - 2]
            - 4.0 / 3.0 * dv[idx - 3]
            + 0.25 * dv[idx - 4]
        ) / hs
        # d approximates v''(s) = L^2 y''(r); kappa y = (q/L^2) v
        res = np.abs(d / osc.L**2 + (osc.q[idx] / osc.L**2) * osc.v[idx]) / (1.0 + np.abs(osc.v[idx]))
        return float(res.max())


def solve_generalized_sin(profile: CurvatureProfile, substeps: int | None = None) -> SinSolution:
    """Solve v'' + kappa v = 0, v(0) = 0, v'(0) = 1 on the profile's interval.

    Integration is 4th-order Runge-Kutta on steps aligned with the profile
    grid (the piecewise-linear coefficient is represented exactly); the
    first positive zero is bracketed on the trajectory and bisected to
    1e-10 relative resolution.
    """
    if not isinstance(profile, CurvatureProfile):
        raise InvalidProfileError("profile must be a CurvatureProfile")
    osc = solve_oscillator(profile, profile.L, 0.0, 1.0, substeps=substeps)
    R = osc.n_steps // profile.cells
    idx = np.arange(profile.cells + 1) * R
    return SinSolution(profile, osc.v[idx], osc.dv[idx] / profile.L, osc.first_zero(), osc)


def _check_t(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"t must lie in [0, 1], got {t}")


def sigma(profile: CurvatureProfile | SinSolution, t: float, theta: float) -> ExtCoeff:
    """Distortion coefficient sigma^(t)(theta) for the given profile.

    Accepts a pre-computed SinSolution to amortize the ODE solve in sweeps.
    """
    sol = profile if isinstance(profile, SinSolution) else solve_generalized_sin(profile)
    return sol.sigma(t, theta)


def tau(profile: CurvatureProfile, N: float, t: float, theta: float) -> ExtCoeff:
    """Modified distortion coefficient tau for dimension bound N >= 2.

    A SinSolution may be passed instead of a profile; it must then already
    be the solution for the rescaled profile kappa/(N-1).
    """
    if N < 2.0:
        raise DomainError(f"dimension bound must satisfy N >= 2, got {N}")
    _check_t(t)
    sol = profile if isinstance(profile, SinSolution) else solve_generalized_sin(profile.scaled(1.0 / (N - 1.0)))
    return tau_from_sigma(sol.sigma(t, theta), N, t)


# ---------------------------------------------------------------------------
# Batched coefficients along geodesic bundles
# ---------------------------------------------------------------------------


class GeodesicCoefficients:
    """Distortion coefficients along a bundle of interval geodesics.

    For geodesics with endpoints ``x0[g] -> x1[g]`` inside the domain of a
    curvature function, propagates the oscillator along the forward and the
    reversed parameterization once (fixed-step RK4 kernel, batched) and then
    serves sigma/tau values at arbitrary interpolation times.  Coefficients
    come back as plain float arrays with ``inf`` entries where the solution
    hit a zero; downstream code applies the extended-value conventions.
    """

    def __init__(self, kappa: Callable, x0: np.ndarray, x1: np.ndarray, denom: float = 1.0, steps: int = 256):
        x0 = np.asarray(x0, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        if x0.shape != x1.shape:
            raise ValueError("endpoint arrays must have equal shape")
        self.theta = np.abs(x1 - x0)
        s_nodes = np.linspace(0.0, 1.0, steps + 1)
        pts_fwd = x0[:, None] + (x1 - x0)[:, None] * s_nodes[None, :]
        kap = np.asarray(kappa(pts_fwd), dtype=float)
        q_fwd = kap * (self.theta**2 / denom)[:, None]
        self._u_fwd, self._du_fwd = _kernels.propagate_sin(q_fwd)
        self._u_rev, self._du_rev = _kernels.propagate_sin(q_fwd[:, ::-1])
        self._inf_fwd = _kernels.first_nonpositive(self._u_fwd)
        self._inf_rev = _kernels.first_nonpositive(self._u_rev)

    def _sigma(self, u: np.ndarray, du: np.ndarray, bad: np.ndarray, t: float) -> np.ndarray:
        _check_t(t)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = _kernels.hermite_eval(u, du, t) / u[:, -1]
        if t == 0.0:
            out[:] = 0.0
        elif t == 1.0:
            out[:] = 1.0
        # zero-length geodesics solve u'' = 0 exactly, giving sigma = t already
        out[bad] = math.inf
        return out

    def sigma_forward(self, t: float) -> np.ndarray:
        """sigma^(t) along the forward parameterization (kappa^+)."""
        return self._sigma(self._u_fwd, self._du_fwd, self._inf_fwd, t)

    def sigma_reversed(self, t: float) -> np.ndarray:
        """sigma^(t) along the reversed parameterization (kappa^-)."""
        return self._sigma(self._u_rev, self._du_rev, self._inf_rev, t)

    @staticmethod
    def tau_of(sig: np.ndarray, N: float, t: float) -> np.ndarray:
        """Batched tau = t^(1/N) sigma^(1-1/N) with 0 * inf = 0."""
        if t == 0.0:
            return np.zeros_like(sig)
        inf_mask = np.isinf(sig)
        base = np.clip(sig, 0.0, None)  # Hermite undershoot can graze -1e-17
        with np.errstate(invalid="ignore"):
            out = t ** (1.0 / N) * base ** (1.0 - 1.0 / N)
        out[inf_mask] = math.inf
        return out


# ---------------------------------------------------------------------------
# Distributional concavity check
# ---------------------------------------------------------------------------


def check_sigma_concavity(
    u: np.ndarray,
    profile: CurvatureProfile,
    endpoints: Sequence[tuple[float, float]] | None = None,
    t_grid: Iterable[float] = (0.25, 0.5, 0.75),
    max_length: float | None = None,
    steps: int = 512,
    tol: float = 1e-8,
) -> VerificationReport:
    """Check the two-point concavity characterization of u'' + kappa u <= 0.

    For each geodesic (x0, x1) with length theta and each interpolation
    time t, verifies

        u(gamma(t)) >= sigma^(1-t)_{rev}(theta) u(x0) + sigma^(t)_{fwd}(theta) u(x1)

    with the convention inf * 0 = 0.  ``u`` is sampled on the profile grid
    and evaluated between nodes by linear interpolation (grid-aligned points
    are exact).  When ``endpoints`` is None every pair of grid nodes with
    separation <= max_length (taken from a coarse subsample) is used.
    """
    t0 = time.perf_counter()
    u = np.asarray(u, dtype=float)
    if u.shape != profile.grid.shape:
        raise DomainError("u must be sampled on the profile grid")
    if np.any(u < 0.0):
        raise DomainError("u must be nonnegative")
    grid = profile.grid
    if endpoints is None:
        stride = max(1, profile.cells // 24)
        nodes = grid[::stride]
        cap = max_length if max_length is not None else profile.L
        endpoints = [
            (float(a), float(b))
            for i, a in enumerate(nodes)
            for b in nodes[i + 1 :]
            if 0.0 < b - a <= cap
        ]
    x0 = np.array([e[0] for e in endpoints])
    x1 = np.array([e[1] for e in endpoints])
    coeffs = GeodesicCoefficients(profile, x0, x1, steps=steps)
    u0 = np.interp(x0, grid, u)
    u1 = np.interp(x1, grid, u)
    t_grid = list(t_grid)
    points = []
    for t in t_grid:
        sig_rev = coeffs.sigma_reversed(1.0 - t)
        sig_fwd = coeffs.sigma_forward(t)
        rhs = _ext_mul(sig_rev, u0) + _ext_mul(sig_fwd, u1)
        xt = (1.0 - t) * x0 + t * x1
        lhs = np.interp(xt, grid, u)
        worst = np.argmin(np.where(np.isinf(rhs), -math.inf, lhs - rhs))
        for g in (int(worst),):
            points.append(
                CheckPoint(
                    point={"t": t, "x0": float(x0[g]), "x1": float(x1[g])},
                    lhs=float(rhs[g]),  # inequality is u >= rhs: check rhs <= u
                    rhs=float(lhs[g]),
                )
            )
    report = VerificationReport.from_points(
        name="sigma-concavity",
        params={"L": profile.L, "t_grid": t_grid, "geodesics": len(endpoints)},
        grid=t_grid,
        points=points,
        tol=tol,
        runtime=time.perf_counter() - t0,
    )
    return report


def _ext_mul(coeff: np.ndarray, weight: np.ndarray) -> np.ndarray:
    """coeff * weight with 0 * inf = 0 (weight >= 0)."""
    out = np.empty_like(weight, dtype=float)
    inf_mask = np.isinf(coeff)
    np.multiply(coeff, weight, where=~inf_mask, out=out)
    out[inf_mask & (weight == 0.0)] = 0.0
    out[inf_mask & (weight > 0.0)] = math.inf
    return out
