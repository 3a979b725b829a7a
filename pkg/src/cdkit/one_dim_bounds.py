"""One-dimensional comparison estimates for variable curvature bounds.

Given a curvature profile ``kappa`` on [0, L], a comparison constant ``K``,
a dimension bound ``N >= 2`` and an integrability exponent ``p > N/2``,
this module provides the weighted density ``omega = s_{kappa/(N-1)}^(N-1)``,
the Riccati comparison function

    psi(r) = max(0, g'(r) - g'_model(r)),     g = log(omega),

the explicit constants of the theory, and numerical verifiers for every 1D
inequality bounding distortion-coefficient differences by L^p integrals of
the curvature deficit ``(kappa - K)_-``.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .comparison_ode import (
    CurvatureProfile,
    SinSolution,
    const_cos,
    const_pi,
    const_sin,
    solve_generalized_sin,
    tau_const,
    tau_from_sigma,
)
from .errors import DomainError
from .report import DEFAULT_TOL, CheckPoint, VerificationReport

__all__ = [
    "ComparisonContext",
    "PsiFunction",
    "SampledFunction",
    "omega",
    "psi",
    "const_C_prime",
    "const_C",
    "const_Lambda",
    "check_pwa",
    "check_integrated_bound",
    "check_dist_coeff_bound",
    "check_lemma_B",
    "riccati_residual",
]


@dataclass
class SampledFunction:
    grid: np.ndarray
    values: np.ndarray

    def __call__(self, r):
        return np.interp(r, self.grid, self.values)


@dataclass
class ComparisonContext:
    """Inputs of the 1D estimates.

    Requires p > N/2 strictly (the critical exponent is out of reach) and,
    for K > 0, a cutoff epsilon below the model diameter pi_{K/(N-1)}.
    """

    profile: CurvatureProfile
    K: float
    N: float
    p: float
    epsilon: float

    def __post_init__(self):
        if self.N < 2.0:
            raise DomainError(f"N must be >= 2, got {self.N}")
        if self.p <= self.N / 2.0:
            raise DomainError(f"p must exceed N/2 = {self.N / 2}, got {self.p}")
        if self.epsilon <= 0.0:
            raise DomainError("epsilon must be positive")
        if self.K > 0.0 and self.epsilon >= self.pi_model:
            raise DomainError(
                f"epsilon={self.epsilon} must stay below the model diameter {self.pi_model}"
            )

    @property
    def k_model(self) -> float:
        return self.K / (self.N - 1.0)

    @cached_property
    def pi_model(self) -> float:
        return const_pi(self.K / (self.N - 1.0))

    @cached_property
    def sol_scaled(self) -> SinSolution:
        """Generalized sine of kappa/(N-1), shared by all derived quantities."""
        return solve_generalized_sin(self.profile.scaled(1.0 / (self.N - 1.0)))

    @property
    def pi_scaled(self) -> float:
        return self.sol_scaled.pi_kappa

    # -- pointwise building blocks -------------------------------------

    def omega_at(self, r):
        return self.sol_scaled.s(r) ** (self.N - 1.0)

    def g_prime(self, r):
        return (self.N - 1.0) * self.sol_scaled.log_derivative(r)

    def g_prime_model(self, r):
        k = self.k_model
        return (self.N - 1.0) * const_cos(k, r) / const_sin(k, r)

    def psi_at(self, r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        pos = r > 0.0
        if np.any(pos):
            out[pos] = np.maximum(0.0, self.g_prime(r[pos]) - self.g_prime_model(r[pos]))
        return out if out.ndim else float(out)

    def deficit_at(self, r, power: float | None = None):
        """(kappa(r) - K)_- to the given power (default p)."""
        q = self.p if power is None else power
        return np.maximum(0.0, self.K - self.profile(r)) ** q

    # -- breakpoints for kink-aware quadrature -------------------------

    def deficit_kinks(self, lo: float, hi: float) -> list[float]:
        """Exact zero crossings of the piecewise-linear kappa - K in (lo, hi)."""
        g = self.profile.grid
        v = self.profile.samples - self.K
        roots = []
        for i in range(len(v) - 1):
            if v[i] == 0.0 or v[i] * v[i + 1] >= 0.0:
                continue
            r = g[i] + (g[i + 1] - g[i]) * (-v[i]) / (v[i + 1] - v[i])
            if lo < r < hi:
                roots.append(float(r))
        return roots

    def psi_kinks(self, lo: float, hi: float) -> list[float]:
        """Sign changes of g' - g'_model in (lo, hi), refined by brentq."""
        phi = lambda r: self.g_prime(r) - self.g_prime_model(r)
        rs = np.linspace(max(lo, 1e-9 * hi), hi, 257)
        vals = phi(rs)
        roots = []
        for i in range(len(rs) - 1):
            if vals[i] == 0.0 or vals[i] * vals[i + 1] >= 0.0:
                continue
            roots.append(float(brentq(lambda r: float(phi(r)), rs[i], rs[i + 1], xtol=1e-13)))
        return roots


def omega(ctx: ComparisonContext) -> SampledFunction:
    """The weighted density omega = s_{kappa/(N-1)}^(N-1) on the profile grid."""
    grid = ctx.profile.grid
    grid = grid[grid < ctx.pi_scaled]
    return SampledFunction(grid, ctx.omega_at(grid))


@dataclass
class PsiFunction:
    """Sampled Riccati comparison function of a context."""

    context: ComparisonContext
    grid: np.ndarray = field(init=False)
    values: np.ndarray = field(init=False)

    def __post_init__(self):
        ctx = self.context
        cutoff = min(ctx.pi_scaled, ctx.pi_model)
        grid = ctx.profile.grid
        grid = grid[grid < cutoff]
        self.grid = grid
        self.values = np.asarray(ctx.psi_at(grid), dtype=float)

    def __call__(self, r):
        r_arr = np.asarray(r, dtype=float)
        cutoff = min(self.context.pi_scaled, self.context.pi_model)
        if np.any(r_arr >= cutoff) or np.any(r_arr < 0.0):
            raise DomainError("psi evaluated at or beyond a first zero")
        return self.context.psi_at(r)


def psi(ctx: ComparisonContext) -> PsiFunction:
    return PsiFunction(ctx)


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------


def const_C_prime(p: float, N: float) -> float:
    """C'(p, N) = (2p-1)^p ((N-1)/(2p-N))^(p-1)."""
    if N < 2.0:
        raise DomainError(f"N must be >= 2, got {N}")
    if p <= N / 2.0:
        raise DomainError(f"p must exceed N/2 = {N / 2}, got {p}")
    return (2.0 * p - 1.0) ** p * ((N - 1.0) / (2.0 * p - N)) ** (p - 1.0)


def const_C(p: float, N: float, K: float, epsilon: float) -> float:
    """C'(p,N) for K <= 0; max(C'(p,N), sin_{K/(N-1)}(eps)^(-(4p-N-1))) for K > 0."""
    cp = const_C_prime(p, N)
    if K <= 0.0:
        return cp
    if epsilon <= 0.0 or epsilon >= const_pi(K / (N - 1.0)):
        raise DomainError("epsilon must lie in (0, pi_{K/(N-1)}) for K > 0")
    s_eps = const_sin(K / (N - 1.0), epsilon)
    return max(cp, s_eps ** (-(4.0 * p - N - 1.0)))


def const_Lambda(K: float, N: float, epsilon: float) -> float:
    """1 for K <= 0; else 1 + max of sin_{K/(N-1)}^-(N-1) over the far half.

    The maximum runs over r in [pi_k/2, pi_k - epsilon] with k = K/(N-1);
    it is located by a grid scan refined with bounded golden-section search.
    """
    if K <= 0.0:
        return 1.0
    k = K / (N - 1.0)
    pik = const_pi(k)
    if not 0.0 < epsilon < pik / 2.0:
        raise DomainError(f"epsilon must lie in (0, {pik / 2}) for K > 0")
    lo, hi = pik / 2.0, pik - epsilon
    rs = np.linspace(lo, hi, 513)
    f = const_sin(k, rs) ** (-(N - 1.0))
    j = int(np.argmax(f))
    a = rs[max(0, j - 1)]
    b = rs[min(len(rs) - 1, j + 1)]
    best = f[j]
    if b > a:
        res = minimize_scalar(
            lambda r: -const_sin(k, r) ** (-(N - 1.0)), bounds=(a, b), method="bounded"
        )
        best = max(best, -res.fun)
    return 1.0 + float(best)


# ---------------------------------------------------------------------------
# Quadrature with inserted breakpoints
# ---------------------------------------------------------------------------


def _integrate(f, lo: float, hi: float, base: np.ndarray, extra: list[float]) -> float:
    """Trapezoid rule over base nodes clipped to [lo, hi] plus breakpoints.

    Breakpoints of the integrand (kinks of psi and of the curvature deficit)
    are inserted as nodes so no trapezoid straddles a kink.
    """
    if hi <= lo:
        return 0.0
    nodes = base[(base > lo) & (base < hi)]
    nodes = np.unique(np.concatenate([[lo, hi], nodes, np.asarray(extra, dtype=float)]))
    nodes = nodes[(nodes >= lo) & (nodes <= hi)]
    vals = f(nodes)
    return float(np.trapezoid(vals, nodes))


# ---------------------------------------------------------------------------
# Checkers
# ---------------------------------------------------------------------------


def check_pwa(ctx: ComparisonContext, r0: float, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Pointwise bound on psi^(2p-1) * omega by the deficit integral.

    Two displayed ranges: for r0 up to half the model diameter the plain
    bound, beyond it the version weighted by sin_{K/(N-1)}(r0)^(4p-N-1).
    """
    t0 = time.perf_counter()
    p, N = ctx.p, ctx.N
    L = ctx.profile.L
    if not 0.0 <= r0 <= L:
        raise DomainError(f"r0={r0} outside [0, {L}]")
    if r0 >= ctx.pi_scaled:
        raise DomainError(f"r0={r0} is at or beyond the first zero {ctx.pi_scaled}")
    half = ctx.pi_model / 2.0
    if r0 <= half:
        branch = "primary"
        weight = 1.0
    elif r0 < ctx.pi_model:
        branch = "weighted"
        weight = const_sin(ctx.k_model, r0) ** (4.0 * p - N - 1.0)
    else:
        raise DomainError(f"r0={r0} is at or beyond the model diameter {ctx.pi_model}")
    lhs = weight * float(ctx.psi_at(r0)) ** (2.0 * p - 1.0) * float(ctx.omega_at(r0))
    integrand = lambda r: ctx.deficit_at(r) * ctx.omega_at(r)
    rhs = const_C_prime(p, N) * _integrate(
        integrand, 0.0, r0, ctx.profile.grid, ctx.deficit_kinks(0.0, r0)
    )
    pt = CheckPoint(point={"r0": r0, "branch": branch}, lhs=lhs, rhs=rhs)
    return VerificationReport.from_points(
        name="pointwise-psi-bound",
        params={"K": ctx.K, "N": N, "p": p, "branch": branch},
        grid=[r0],
        points=[pt],
        tol=tol,
        runtime=time.perf_counter() - t0,
    )


def check_integrated_bound(
    ctx: ComparisonContext, theta: float, tol: float = DEFAULT_TOL
) -> VerificationReport:
    """Integral form: int psi^(2p-1) omega <= C * theta * int deficit^p omega."""
    t0 = time.perf_counter()
    p, N = ctx.p, ctx.N
    hi_adm = min(ctx.profile.L, ctx.pi_scaled)
    if ctx.K > 0.0:
        hi_adm = min(hi_adm, ctx.pi_model - ctx.epsilon)
    if not 0.0 < theta < hi_adm:
        raise DomainError(f"theta={theta} outside the admissible range (0, {hi_adm})")
    psi_pow = lambda r: ctx.psi_at(r) ** (2.0 * p - 1.0) * ctx.omega_at(r)
    lhs = _integrate(psi_pow, 0.0, theta, ctx.profile.grid, ctx.psi_kinks(0.0, theta))
    deficit = lambda r: ctx.deficit_at(r) * ctx.omega_at(r)
    rhs = (
        const_C(p, N, ctx.K, ctx.epsilon)
        * theta
        * _integrate(deficit, 0.0, theta, ctx.profile.grid, ctx.deficit_kinks(0.0, theta))
    )
    pt = CheckPoint(point={"theta": theta}, lhs=lhs, rhs=rhs)
    return VerificationReport.from_points(
        name="integrated-psi-bound",
        params={"K": ctx.K, "N": N, "p": p, "epsilon": ctx.epsilon},
        grid=[theta],
        points=[pt],
        tol=tol,
        runtime=time.perf_counter() - t0,
    )


def _tau_pair(ctx: ComparisonContext, t: float, theta: float):
    """(tau_K, tau_kappa) at (t, theta); tau_kappa may be infinite."""
    tau_K = tau_const(ctx.K, ctx.N, t, theta)
    tau_k = tau_from_sigma(ctx.sol_scaled.sigma(t, theta), ctx.N, t)
    return tau_K, tau_k


def _theta_range_check(ctx: ComparisonContext, theta: float) -> None:
    hi = ctx.profile.L if ctx.K <= 0.0 else min(ctx.profile.L, ctx.pi_model - ctx.epsilon)
    if not 0.0 < theta < hi:
        raise DomainError(f"theta={theta} outside the admissible range (0, {hi})")


def check_lemma_B(
    ctx: ComparisonContext, t: float, theta: float, tol: float = DEFAULT_TOL
) -> VerificationReport:
    """tau_K - tau_kappa <= Lambda^(1/N) (t theta int_t^1 psi(s theta) sigma^(N-1) ds)^(1/N)."""
    t0 = time.perf_counter()
    _theta_range_check(ctx, theta)
    N = ctx.N
    tau_K, tau_k = _tau_pair(ctx, t, theta)
    lam = const_Lambda(ctx.K, N, ctx.epsilon)
    if tau_k.is_infinite:
        pt = CheckPoint(point={"t": t, "theta": theta}, lhs=-math.inf, rhs=0.0)
        notes = ["tau_kappa infinite: inequality holds trivially"]
    else:
        s_theta = ctx.sol_scaled.s(theta)
        integrand = lambda r: ctx.psi_at(r) * (ctx.sol_scaled.s(r) / s_theta) ** (N - 1.0)
        integral_r = _integrate(
            integrand, t * theta, theta, ctx.profile.grid, ctx.psi_kinks(0.0, theta)
        )
        rhs = lam ** (1.0 / N) * max(0.0, t * integral_r) ** (1.0 / N)
        pt = CheckPoint(point={"t": t, "theta": theta}, lhs=tau_K.value - tau_k.value, rhs=rhs)
        notes = []
    return VerificationReport.from_points(
        name="distortion-bound-psi-form",
        params={"K": ctx.K, "N": N, "p": ctx.p, "epsilon": ctx.epsilon, "t": t, "theta": theta},
        grid=[(t, theta)],
        points=[pt],
        tol=tol,
        runtime=time.perf_counter() - t0,
        notes=notes,
    )


def check_dist_coeff_bound(
    ctx: ComparisonContext, t: float, theta: float, tol: float = DEFAULT_TOL
) -> VerificationReport:
    """Full perturbation bound on tau_K - tau_kappa via the deficit integral.

    rhs = Lambda^(1/N) (C t theta^(2p) J1)^(1/(N(2p-1))) * J2^((2p-2)/(N(2p-1)))
    with J1 = int_0^1 deficit(s theta)^p sigma^(s)(theta)^(N-1) ds and
    J2 = int_t^1 tau_kappa^(s)(theta)^N ds.
    """
    t0 = time.perf_counter()
    _theta_range_check(ctx, theta)
    p, N = ctx.p, ctx.N
    tau_K, tau_k = _tau_pair(ctx, t, theta)
    if tau_k.is_infinite:
        pt = CheckPoint(point={"t": t, "theta": theta}, lhs=-math.inf, rhs=0.0)
        notes = ["tau_kappa infinite: inequality holds trivially"]
    else:
        lam = const_Lambda(ctx.K, N, ctx.epsilon)
        C = const_C(p, N, ctx.K, ctx.epsilon)
        s_theta = ctx.sol_scaled.s(theta)
        sig_pow = lambda r: (ctx.sol_scaled.s(r) / s_theta) ** (N - 1.0)
        j1_r = _integrate(
            lambda r: ctx.deficit_at(r) * sig_pow(r),
            0.0,
            theta,
            ctx.profile.grid,
            ctx.deficit_kinks(0.0, theta),
        )
        j1 = j1_r / theta
        j2_r = _integrate(
            lambda r: (r / theta) * sig_pow(r), t * theta, theta, ctx.profile.grid, []
        )
        j2 = j2_r / theta
        rhs = (
            lam ** (1.0 / N)
            * (C * t * theta ** (2.0 * p) * j1) ** (1.0 / (N * (2.0 * p - 1.0)))
            * j2 ** ((2.0 * p - 2.0) / (N * (2.0 * p - 1.0)))
        )
        pt = CheckPoint(point={"t": t, "theta": theta}, lhs=tau_K.value - tau_k.value, rhs=rhs)
        notes = []
    return VerificationReport.from_points(
        name="distortion-bound-deficit-form",
        params={"K": ctx.K, "N": N, "p": p, "epsilon": ctx.epsilon, "t": t, "theta": theta},
        grid=[(t, theta)],
        points=[pt],
        tol=tol,
        runtime=time.perf_counter() - t0,
        notes=notes,
    )


def riccati_residual(ctx: ComparisonContext, trim: float = 0.02, nodes: int = 1024) -> float:
    """Worst scaled residual of g'' + (g')^2/(N-1) + kappa = 0 on the
    trimmed interval, with g = log omega.

    g' comes from the dense solution; g'' is recovered by 4th-order central
    differences, so the residual measures the solution against the relation
    rather than restating the construction.  Derivatives of g blow up like
    powers of 1/r at the interval ends (g' ~ (N-1)/r near 0), so the
    difference step shrinks proportionally to the distance from the ends
    and the residual is normalized by the size of its terms.
    """
    hi = min(ctx.profile.L, ctx.pi_scaled)
    g = ctx.profile.grid
    mids = 0.5 * (g[:-1] + g[1:])
    mids = mids[(mids > trim * hi) & (mids < (1.0 - trim) * hi)]
    rs = mids[:: max(1, mids.size // nodes)]
    # stencils centered at cell midpoints with half-width <= h/2 stay inside
    # one cell, where the coefficient is linear and the solution smooth
    delta = np.minimum(np.minimum(rs, hi - rs) / 64.0, ctx.profile.step / 4.0)
    offsets = np.array([-2.0, -1.0, 1.0, 2.0])
    pts = rs[None, :] + offsets[:, None] * delta[None, :]
    gp = ctx.g_prime(pts.ravel()).reshape(4, -1)
    gpp = (gp[0] - 8.0 * gp[1] + 8.0 * gp[2] - gp[3]) / (12.0 * delta)
    sq = ctx.g_prime(rs) ** 2 / (ctx.N - 1.0)
    kap = ctx.profile(rs)
    res = np.abs(gpp + sq + kap) / (1.0 + np.abs(sq) + np.abs(kap))
    return float(res.max())
