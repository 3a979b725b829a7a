"""End-to-end verification of displacement-convexity-type inequalities on
interval fixtures, and the cusp-sequence convergence experiment.

All checks run on one-dimensional spaces, where optimal plans are exactly
computable (monotone rearrangement) and set operations are exact interval
arithmetic; nothing here depends on heuristic geodesic selection.  The
default pass tolerance is 5 * h (h the space grid step): interpolated
measures are re-binned to the grid, which introduces an O(h) entropy error,
and every slack is compared against -tol * (1 + max(|lhs|, |rhs|)).
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .comparison_ode import (
    GeodesicCoefficients,
    const_pi,
    const_sin,
    model_pi,
    model_volume,
)
from .errors import DomainError, NormalizationError
from .mm_core import (
    CurvatureProfile,
    OneDimMmSpace,
    SpikedProfile,
    excess_k,
    excess_k_pointed,
    make_cd_fixture,
    normalize_pointed,
)
from .one_dim_bounds import const_C, const_C_prime, const_Lambda
from .report import CheckPoint, VerificationReport, write_atomic
from .transport import (
    DiscreteMeasure,
    gw_surrogate,
    interpolate,
    renyi_entropy,
    sturm_D_upper,
    w2_1d,
)

__all__ = [
    "check_cd_inequality",
    "check_resultA",
    "check_brunn_minkowski",
    "check_bishop_gromov",
    "check_mcp",
    "convergence_experiment",
    "ExperimentTable",
    "default_tol",
]


def default_tol(space: OneDimMmSpace, tol: float | None) -> float:
    return 5.0 * space.h if tol is None else tol


# ---------------------------------------------------------------------------
# Shared pieces
# ---------------------------------------------------------------------------


def _atom_density(space: OneDimMmSpace, mu: DiscreteMeasure) -> np.ndarray:
    """Dense atomwise density (mass / weight); errors on zero-weight atoms."""
    w = space.weights
    if np.any(w[mu.indices] <= 0.0):
        raise DomainError("measure has an atom at a zero-weight point (unbounded density)")
    dense = np.zeros(space.density.size)
    dense[mu.indices] = mu.masses / w[mu.indices]
    return dense


def _sigma_const_vec(k: float, t: float, theta: np.ndarray) -> np.ndarray:
    """Vectorized constant-curvature distortion coefficient."""
    theta = np.asarray(theta, dtype=float)
    out = np.empty_like(theta)
    pik = const_pi(k)
    inf_mask = theta >= pik
    zero = theta == 0.0
    safe = ~inf_mask & ~zero
    out[zero] = t
    with np.errstate(invalid="ignore", divide="ignore"):
        num = np.asarray(const_sin(k, t * theta[safe]), dtype=float)
        den = np.asarray(const_sin(k, theta[safe]), dtype=float)
        out[safe] = num / den
    out[inf_mask] = math.inf
    return out


def _tau_const_vec(K: float, N: float, t: float, theta: np.ndarray) -> np.ndarray:
    sig = _sigma_const_vec(K / (N - 1.0), t, theta)
    return GeodesicCoefficients.tau_of(sig, N, t)


def _rhs_pairing(tau_a: np.ndarray, rho_a: np.ndarray, tau_b: np.ndarray, rho_b: np.ndarray, w: np.ndarray):
    """- sum w [tau_a rho_a^... + tau_b rho_b^...]; returns (value, vacuous)."""
    term = tau_a * rho_a + tau_b * rho_b
    bad = ~np.isfinite(term)
    if bad.any():
        # infinite coefficient: that geodesic makes the bound vacuous
        return -math.inf, True
    return -float((w * term).sum()), False


def _require_pointed_normalized(space: OneDimMmSpace) -> float:
    if space.base is None:
        raise NormalizationError("space needs a base point")
    m1 = space.ball_mass(space.base, 1.0)
    if abs(m1 - 1.0) > 1e-9:
        raise NormalizationError(
            f"space must be pointed-normalized: m(B_1(o)) = {m1}, call normalize_pointed first"
        )
    return m1


# ---------------------------------------------------------------------------
# Curvature-dimension inequality
# ---------------------------------------------------------------------------


def check_cd_inequality(
    space: OneDimMmSpace,
    mu0: DiscreteMeasure,
    mu1: DiscreteMeasure,
    t_grid: Iterable[float] = (0.25, 0.5, 0.75),
    N_grid: Iterable[float] | None = None,
    tol: float | None = None,
    steps: int = 256,
) -> VerificationReport:
    """Displacement convexity of the Renyi entropy with variable-curvature
    coefficients read off the space's profile along each plan geodesic.

    For every t and every N' in the grid, checks

        S_N'(nu_t) <= - sum_g w_g [ tau^(1-t)_{rev}(theta_g) rho_0(g_0)^(-1/N')
                                  + tau^(t)_{fwd}(theta_g) rho_1(g_1)^(-1/N') ]

    where nu_t is the re-binned interpolant of the monotone plan.  An
    infinite coefficient (geodesic at or beyond the scaled profile's first
    zero) makes the bound vacuous for that point; this is recorded in the
    notes and the point passes.
    """
    t0 = time.perf_counter()
    tol = default_tol(space, tol)
    N_grid = [space.N] if N_grid is None else list(N_grid)
    if any(Np < space.N for Np in N_grid):
        raise DomainError("the inequality is asserted only for N' >= N of the space")
    t_grid = list(t_grid)
    w = space.weights
    rho0 = _atom_density(space, mu0)
    rho1 = _atom_density(space, mu1)
    _, plan = w2_1d(mu0, mu1, space)
    h = space.h
    i0 = np.rint(plan.x0 / h).astype(int)
    i1 = np.rint(plan.x1 / h).astype(int)
    points = []
    notes = []
    for Np in N_grid:
        coeffs = GeodesicCoefficients(space.kappa, plan.x0, plan.x1, denom=Np - 1.0, steps=steps)
        r0 = rho0[i0] ** (-1.0 / Np)
        r1 = rho1[i1] ** (-1.0 / Np)
        for t in t_grid:
            tau_rev = GeodesicCoefficients.tau_of(coeffs.sigma_reversed(1.0 - t), Np, 1.0 - t)
            tau_fwd = GeodesicCoefficients.tau_of(coeffs.sigma_forward(t), Np, t)
            rhs, vacuous = _rhs_pairing(tau_rev, r0, tau_fwd, r1, plan.w)
            if vacuous:
                notes.append(f"t={t}, N'={Np}: infinite coefficient, bound vacuous")
                points.append(CheckPoint(point={"t": t, "N'": Np}, lhs=-math.inf, rhs=0.0))
                continue
            nu_t, _ = interpolate(plan, t, space)
            lhs = renyi_entropy(nu_t, w, Np)
            points.append(CheckPoint(point={"t": t, "N'": Np}, lhs=lhs, rhs=rhs))
    return VerificationReport.from_points(
        name="cd-inequality",
        params={"N": space.N, "N_grid": N_grid, "h": space.h, "geodesics": plan.w.size},
        grid=[(t, Np) for Np in N_grid for t in t_grid],
        points=points,
        tol=tol,
        runtime=time.perf_counter() - t0,
        notes=notes,
    )


# ---------------------------------------------------------------------------
# Displacement convexity with excess error term
# ---------------------------------------------------------------------------


def resulta_error_term(space: OneDimMmSpace, K: float, p: float, R: float, eps: float) -> float:
    """2 m(B_2R(o))^(1/N) Lambda^(1/N) C^(1/(N(2p-1))) k(p, K, 2R)^(p/(N(2p-1)))."""
    N = space.N
    k_exc = excess_k_pointed(space, p, K, 2.0 * R)
    if k_exc == 0.0:
        return 0.0
    lam = const_Lambda(K, N, eps)
    C = const_C(p, N, K, eps)
    m2R = space.ball_mass(space.base, 2.0 * R)
    return (
        2.0
        * m2R ** (1.0 / N)
        * lam ** (1.0 / N)
        * C ** (1.0 / (N * (2.0 * p - 1.0)))
        * k_exc ** (p / (N * (2.0 * p - 1.0)))
    )


def check_resultA(
    space: OneDimMmSpace,
    K: float,
    p: float,
    R: float,
    eps: float,
    mu0: DiscreteMeasure,
    mu1: DiscreteMeasure,
    t_grid: Iterable[float] = (0.25, 0.5, 0.75),
    tol: float | None = None,
) -> VerificationReport:
    """Displacement convexity with constant-K coefficients plus the
    excess-driven error term.

    Hypotheses enforced: the space is pointed-normalized, both measures are
    concentrated in B_{R/2}(o), and every plan geodesic is shorter than
    pi_{K/(N-1)} - eps.
    """
    t0 = time.perf_counter()
    tol = default_tol(space, tol)
    N = space.N
    if R < 1.0:
        raise DomainError(f"R must be >= 1, got {R}")
    if eps <= 0.0:
        raise DomainError("eps must be positive")
    _require_pointed_normalized(space)
    o = space.base
    xs = space.grid
    for name, mu in (("mu0", mu0), ("mu1", mu1)):
        d = np.abs(xs[mu.indices] - o)
        if np.any(d > R / 2.0 + 1e-12):
            raise DomainError(f"{name} is not concentrated in B_(R/2)(o)")
    w = space.weights
    rho0 = _atom_density(space, mu0)
    rho1 = _atom_density(space, mu1)
    _, plan = w2_1d(mu0, mu1, space)
    limit = model_pi(K, N) - eps
    lengths = plan.lengths
    if np.any(lengths > limit):
        g = int(np.argmax(lengths))
        raise DomainError(
            f"geodesic {g} ({plan.x0[g]:.6g} -> {plan.x1[g]:.6g}) has length "
            f"{lengths[g]:.6g} > pi_(K/(N-1)) - eps = {limit:.6g}"
        )
    err = resulta_error_term(space, K, p, R, eps)
    h = space.h
    i0 = np.rint(plan.x0 / h).astype(int)
    i1 = np.rint(plan.x1 / h).astype(int)
    r0 = rho0[i0] ** (-1.0 / N)
    r1 = rho1[i1] ** (-1.0 / N)
    points = []
    for t in t_grid:
        tau_rev = _tau_const_vec(K, N, 1.0 - t, lengths)
        tau_fwd = _tau_const_vec(K, N, t, lengths)
        rhs, vacuous = _rhs_pairing(tau_rev, r0, tau_fwd, r1, plan.w)
        nu_t, _ = interpolate(plan, t, space)
        lhs = renyi_entropy(nu_t, w, N)
        points.append(CheckPoint(point={"t": t}, lhs=lhs, rhs=rhs + err))
    return VerificationReport.from_points(
        name="displacement-convexity-with-excess",
        params={"K": K, "N": N, "p": p, "R": R, "eps": eps, "error_term": err},
        grid=list(t_grid),
        points=points,
        tol=tol,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Brunn-Minkowski
# ---------------------------------------------------------------------------


def _cells_to_intervals(space: OneDimMmSpace, cells: Sequence[int]) -> list[tuple[float, float]]:
    cells = np.unique(np.asarray(cells, dtype=int))
    if cells.size == 0:
        raise DomainError("cell set must be nonempty")
    if cells.min() < 0 or cells.max() >= space.cells:
        raise DomainError("cell index out of range")
    h = space.h
    out = []
    start = prev = cells[0]
    for c in cells[1:]:
        if c == prev + 1:
            prev = c
            continue
        out.append((start * h, (prev + 1) * h))
        start = prev = c
    out.append((start * h, (prev + 1) * h))
    return out


def _minkowski_t(int0, int1, t: float) -> list[tuple[float, float]]:
    raw = [
        ((1.0 - t) * a0 + t * a1, (1.0 - t) * b0 + t * b1)
        for (a0, b0) in int0
        for (a1, b1) in int1
    ]
    raw.sort()
    merged = [list(raw[0])]
    for a, b in raw[1:]:
        if a <= merged[-1][1] + 1e-15:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def check_brunn_minkowski(
    space: OneDimMmSpace,
    A0: Sequence[int],
    A1: Sequence[int],
    t_grid: Iterable[float] = (0.25, 0.5, 0.75),
    p: float = 2.0,
    tol: float | None = None,
) -> VerificationReport:
    """Interpolated-set inequality with the K = 0 excess defect.

    m(A_t)^(1/N) >= (1-t) m(A_0)^(1/N) + t m(A_1)^(1/N) - defect, with
    A_t computed exactly as a union of intervals (every geodesic between
    the sets, not only transport-optimal ones).
    """
    t0 = time.perf_counter()
    tol = default_tol(space, tol)
    N = space.N
    if abs(space.total_mass - 1.0) > 1e-9:
        raise NormalizationError("space must be normalized (total mass 1)")
    int0 = _cells_to_intervals(space, A0)
    int1 = _cells_to_intervals(space, A1)
    m0 = sum(space.interval_mass(a, b) for a, b in int0)
    m1 = sum(space.interval_mass(a, b) for a, b in int1)
    k_exc = excess_k(space, p, 0.0)
    defect = (
        0.0
        if k_exc == 0.0
        else 2.0
        * const_C_prime(p, N) ** (1.0 / (N * (2.0 * p - 1.0)))
        * k_exc ** (p / (N * (2.0 * p - 1.0)))
    )
    points = []
    for t in t_grid:
        ints = _minkowski_t(int0, int1, t)
        mt = sum(space.interval_mass(a, b) for a, b in ints)
        lhs = (1.0 - t) * m0 ** (1.0 / N) + t * m1 ** (1.0 / N) - defect
        points.append(CheckPoint(point={"t": t}, lhs=lhs, rhs=mt ** (1.0 / N)))
    return VerificationReport.from_points(
        name="brunn-minkowski-with-defect",
        params={"N": N, "p": p, "defect": defect, "m0": m0, "m1": m1},
        grid=list(t_grid),
        points=points,
        tol=tol,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Volume comparison
# ---------------------------------------------------------------------------


def bishop_gromov_constant(K: float, N: float, p: float, D: float) -> float:
    """Xi(K, N, D) * C'(p, N)^(1/(2p-1)) with Xi the model shell/ball ratio
    maximum over (0, D]."""
    if K > 0.0:
        raise DomainError("volume comparison is implemented for K <= 0")
    k = K / (N - 1.0)
    rs = np.linspace(1e-9, D, 2049)
    om = np.asarray(const_sin(k, rs), dtype=float) ** (N - 1.0)
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (om[:-1] + om[1:]) * np.diff(rs))])
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = rs * om / np.where(cum > 0.0, cum, math.inf)
    ratio[0] = N  # limit r -> 0
    xi = float(np.nanmax(ratio))
    return xi * const_C_prime(p, N) ** (1.0 / (2.0 * p - 1.0))


def check_bishop_gromov(
    space: OneDimMmSpace,
    K: float,
    N: float,
    p: float,
    D: float,
    r_grid: Iterable[float],
    R_grid: Iterable[float],
    tol: float | None = None,
    max_centers: int = 25,
) -> VerificationReport:
    """Ball-volume ratio comparison with the excess-driven exponential factor.

    For admissible centers x in B_{R/2}(o) and window 0 < r < 1 <= R/2,
    2R <= D, checks

        m(B_R(x)) / v(R)  <=  m(B_r(x)) / v(r) * exp(C(K,N,p,D) k^(p/(2p-1)))

    with v the model ball volume and k the pointed excess at radius D.
    When kappa >= K pointwise the factor is exactly 1 and this is the
    classical ratio monotonicity.
    """
    t0 = time.perf_counter()
    tol = default_tol(space, tol)
    if K > 0.0:
        raise DomainError("volume comparison requires K <= 0")
    _require_pointed_normalized(space)
    o = space.base
    r_grid = sorted(r_grid)
    R_grid = sorted(R_grid)
    for r in r_grid:
        if not 0.0 < r < 1.0:
            raise DomainError(f"r={r} violates the window 0 < r < 1")
    for R in R_grid:
        if not (2.0 <= R and 2.0 * R <= D):
            raise DomainError(f"R={R} violates the window 1 <= R/2 and 2R <= D")
    k_exc = excess_k_pointed(space, p, K, D)
    C = bishop_gromov_constant(K, N, p, D)
    factor = math.exp(C * k_exc ** (p / (2.0 * p - 1.0)))
    points = []
    for R in R_grid:
        xs = space.grid[np.abs(space.grid - o) <= R / 2.0]
        stride = max(1, xs.size // max_centers)
        centers = xs[::stride]
        vR = model_volume(K, N, R)
        for r in r_grid:
            vr = model_volume(K, N, r)
            for x in centers:
                lhs = space.ball_mass(x, R) / vR
                rhs = space.ball_mass(x, r) / vr * factor
                points.append(CheckPoint(point={"x": float(x), "r": r, "R": R}, lhs=lhs, rhs=rhs))
    return VerificationReport.from_points(
        name="volume-ratio-comparison",
        params={"K": K, "N": N, "p": p, "D": D, "excess": k_exc, "factor": factor},
        grid=[(r, R) for R in R_grid for r in r_grid],
        points=points,
        tol=tol,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Measure contraction
# ---------------------------------------------------------------------------


def _bin_positions(space: OneDimMmSpace, pos: np.ndarray, masses: np.ndarray) -> np.ndarray:
    h = space.h
    x = pos / h
    idx = np.clip(np.floor(x).astype(int), 0, space.cells - 1)
    frac = x - idx
    snap = frac < 1e-9
    frac = np.where(snap, 0.0, frac)
    hi = frac > 1.0 - 1e-9
    idx = np.where(hi, idx + 1, idx)
    frac = np.where(hi, 0.0, frac)
    dense = np.zeros(space.density.size)
    np.add.at(dense, idx, masses * (1.0 - frac))
    up = frac > 0.0
    np.add.at(dense, idx[up] + 1, masses[up] * frac[up])
    return dense


def check_mcp(
    space: OneDimMmSpace,
    x0: float,
    A: Sequence[int],
    K: float,
    N: float,
    t_grid: Iterable[float] = (0.25, 0.5, 0.75, 1.0),
    p: float | None = None,
    eps: float | None = None,
    R: float | None = None,
    tol: float | None = None,
) -> VerificationReport:
    """Measure contraction toward a point with constant-K coefficients.

    Checks cellwise that m dominates the time-t pushforward of the plan
    from delta_{x0} to the normalized restriction m_A, weighted by
    tau_{K,N}^(t)(length)^N (equivalently t * sigma^(N-1): the coefficient
    that is an equality on the cone point of the model space).  When
    (p, eps, R) are given, additionally checks the entropy form with its
    excess error term.
    """
    t0 = time.perf_counter()
    tol = default_tol(space, tol)
    A = np.unique(np.asarray(A, dtype=int))
    if A.size == 0:
        raise DomainError("A must be nonempty")
    ys = space.grid[A]
    theta = np.abs(ys - x0)
    if K > 0.0 and np.any(theta >= model_pi(K, N)):
        raise DomainError("A must lie inside the model ball around x0")
    w = space.weights
    wA = w[A]
    if np.any(wA <= 0.0):
        raise DomainError("A contains zero-weight atoms")
    mA = float(wA.sum())
    pi_w = wA / mA
    points = []
    entropy_points = []
    err = None
    for t in t_grid:
        tau = _tau_const_vec(K, N, t, theta)
        coeff = tau**N
        if np.any(np.isinf(coeff)):
            raise DomainError("infinite contraction coefficient inside the model ball")
        pos = x0 + t * (ys - x0)
        pushed = _bin_positions(space, pos, coeff * mA * pi_w)
        slack_per_cell = w - pushed
        worst = int(np.argmin(slack_per_cell - tol * np.maximum(w, pushed)))
        points.append(
            CheckPoint(
                point={"t": t, "cell": worst},
                lhs=float(pushed[worst]),
                rhs=float(w[worst]),
            )
        )
        if p is not None:
            if eps is None or R is None:
                raise DomainError("entropy form needs p, eps and R together")
            nu_t = DiscreteMeasure.from_dense(_bin_positions(space, pos, pi_w))
            lhs = renyi_entropy(nu_t, w, N)
            rho_A_pow = mA ** (1.0 / N)  # rho_A = 1/m(A) on A
            rhs_main = -float((pi_w * tau).sum()) * rho_A_pow
            if err is None:
                _require_pointed_normalized(space)
                k_exc = excess_k_pointed(space, p, K, 2.0 * R)
                err = 0.0
                if k_exc > 0.0:
                    err = (
                        space.ball_mass(space.base, 2.0 * R) ** (1.0 / N)
                        * const_Lambda(K, N, eps) ** (1.0 / N)
                        * const_C(p, N, K, eps) ** (1.0 / (N * (2.0 * p - 1.0)))
                        * k_exc ** (p / (N * (2.0 * p - 1.0)))
                    )
            entropy_points.append(CheckPoint(point={"t": t, "form": "entropy"}, lhs=lhs, rhs=rhs_main + err))
    return VerificationReport.from_points(
        name="measure-contraction",
        params={"K": K, "N": N, "x0": x0, "mA": mA, "error_term": err},
        grid=list(t_grid),
        points=points + entropy_points,
        tol=tol,
        runtime=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# Convergence experiment
# ---------------------------------------------------------------------------


@dataclass
class ExperimentTable:
    """Cusp-sequence experiment output: one row per sequence index."""

    params: dict
    columns: list[str]
    rows: list[list[float]]
    flags: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(bool(v) for k, v in self.flags.items() if k.endswith("_ok"))

    def column(self, name: str) -> np.ndarray:
        j = self.columns.index(name)
        return np.array([row[j] for row in self.rows])

    def to_json_dict(self) -> dict:
        return {
            "params": self.params,
            "columns": self.columns,
            "rows": self.rows,
            "flags": self.flags,
            "pass": self.passed,
        }

    def to_csv(self, path: str) -> None:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(repr(v) for v in row))
        write_atomic(path, "\n".join(lines) + "\n")


def default_spike_schedule(p: float) -> Callable[[int], tuple[float, float]]:
    """depth i^2, width i^(-4p): excess ~ i^(-2) while min curvature -> -inf."""

    def schedule(i: int) -> tuple[float, float]:
        return float(i) ** 2, float(i) ** (-4.0 * p)

    return schedule


def convergence_experiment(
    K: float,
    N: float,
    p: float,
    spike_schedule: Callable[[int], tuple[float, float]] | None = None,
    i_max: int = 20,
    h: float = 1e-3,
    L: float = 1.0,
    n_sub: int = 60,
    eps_target: float = 0.05,
) -> ExperimentTable:
    """Build the cusp sequence and track excess, distances and diameter.

    For each i the fixture is the interval space of the spiked profile
    (base K, triangular dip of scheduled depth/width at the center), and
    the row records the pointed excess, the Gromov-Wasserstein-type
    discrepancy and the glued-line transport distance to the unspiked
    reference, the diameter, and the minimum of the curvature field.
    Recorded flags: the distance column is eventually decreasing and ends
    below ``eps_target``; for K > 0 the diameter stays within 1/i of the
    model diameter.
    """
    if spike_schedule is None:
        spike_schedule = default_spike_schedule(p)
    d1, w1 = spike_schedule(1)
    d2, w2 = spike_schedule(max(2, i_max))
    if d2**p * w2 >= max(d1**p * w1, 1e-300):
        warnings.warn("spike schedule does not drive the excess to zero", stacklevel=2)

    if K > 0.0:
        L_req = model_pi(K, N) + 0.5
        u0, du0 = 0.0, 1.0
    else:
        L_req = L
        u0, du0 = 1.0, 0.0

    def build(depth: float, width: float) -> OneDimMmSpace:
        center = L_req / 2.0 if K <= 0.0 else model_pi(K, N) / 2.0
        spike = SpikedProfile(K, depth, width, center, L_req)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # K > 0 truncation is expected
            fix = make_cd_fixture(spike, N, h, u0=u0, du0=du0)
        return normalize_pointed(fix.with_base(fix.L / 2.0))

    def quantile_positions(space: OneDimMmSpace) -> np.ndarray:
        cum = np.concatenate(
            [[0.0], np.cumsum(0.5 * (space.density[:-1] + space.density[1:]) * space.h)]
        )
        levels = (np.arange(n_sub) + 0.5) / n_sub * cum[-1]
        return np.interp(levels, cum, space.grid)

    ref = build(0.0, 0.0)
    ref_fin = ref.to_finite(n_sub)
    ref_q = quantile_positions(ref)

    columns = ["i", "depth", "width", "min_kappa", "excess", "gw", "sturm_D", "diam"]
    rows = []
    for i in range(1, i_max + 1):
        depth, width = spike_schedule(i)
        fix = build(depth, width)
        exc = excess_k_pointed(fix, p, K, 1.0)
        fin = fix.to_finite(n_sub)
        gw = gw_surrogate(fin, ref_fin)
        cross = np.abs(quantile_positions(fix)[:, None] - ref_q[None, :])
        sd = sturm_D_upper(fin, ref_fin, cross)
        rows.append([i, depth, width, fix.kappa.min_value(), exc, gw, sd, fix.L])

    table = ExperimentTable(
        params={"K": K, "N": N, "p": p, "i_max": i_max, "h": h, "n_sub": n_sub, "eps_target": eps_target},
        columns=columns,
        rows=rows,
    )
    dist = table.column("sturm_D")
    increases = np.nonzero(np.diff(dist) > 0.0)[0]
    mono_from = int(increases[-1] + 2) if increases.size else 1
    table.flags["distance_monotone_from"] = mono_from
    table.flags["monotone_ok"] = mono_from < i_max
    table.flags["final_distance"] = float(dist[-1])
    table.flags["final_ok"] = bool(dist[-1] < eps_target)
    if K > 0.0:
        diam = table.column("diam")
        idx = table.column("i")
        table.flags["diameter_ok"] = bool(np.all(diam <= model_pi(K, N) + 1.0 / idx))
    return table
