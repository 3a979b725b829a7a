"""Batch front-end: load space/profile JSON, dispatch checkers, emit reports.

Exit codes: 0 when every check passes, 1 when at least one inequality
fails, 2 for input or parameter errors (with a diagnostic naming the
offending field).  Reports are written as JSON and CSV into the output
directory; writes are atomic (temp file + rename).  The environment
variable CDKIT_TOL overrides the default tolerance of every check.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import cd_verify, mm_core, transport
from .comparison_ode import CurvatureProfile, sigma, solve_generalized_sin, tau
from .errors import CdkitError
from .report import VerificationReport, write_atomic, write_report_csv, write_report_json

__all__ = ["main", "run"]


def _env_tol(args) -> float | None:
    if getattr(args, "tol", None) is not None:
        return args.tol
    env = os.environ.get("CDKIT_TOL")
    return float(env) if env else None


def _load_json(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise CdkitError(f"input file not found: {path}")
    except json.JSONDecodeError as e:
        raise CdkitError(f"malformed JSON in {path}: {e}")


def _load_space(path: str):
    d = _load_json(path)
    if "dist" in d:
        return mm_core.FiniteMmSpace.from_json_dict(d)
    if "density" in d:
        return mm_core.OneDimMmSpace.from_json_dict(d)
    raise CdkitError(f"{path}: neither a finite space (dist) nor an interval space (density)")


def _load_profile(path: str) -> CurvatureProfile:
    d = _load_json(path)
    if "samples" not in d:
        raise CdkitError(f"{path}: profile JSON needs field 'samples'")
    return CurvatureProfile.from_json_dict(d)


def _need_onedim(space, flag: str) -> mm_core.OneDimMmSpace:
    if not isinstance(space, mm_core.OneDimMmSpace):
        raise CdkitError(f"{flag}: this check needs an interval space (density field)")
    return space


def _default_measures(space: mm_core.OneDimMmSpace, c0: float | None, c1: float | None):
    """Bump measures centered at fractions c0, c1 of the interval."""
    c0 = 1.0 / 3.0 if c0 is None else c0
    c1 = 2.0 / 3.0 if c1 is None else c1
    width = space.L / 10.0

    def bump(c):
        center = c * space.L
        return transport.DiscreteMeasure.from_density(
            space, lambda x: np.exp(-0.5 * ((x - center) / width) ** 2) * (np.abs(x - center) < 3 * width)
        )

    return bump(c0), bump(c1)


def _parse_fraction_range(text: str, flag: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise CdkitError(f"{flag}: expected lo:hi fractions, got {text!r}")
    if not 0.0 <= lo < hi <= 1.0:
        raise CdkitError(f"{flag}: fractions must satisfy 0 <= lo < hi <= 1")
    return lo, hi


def _cells_from_range(space: mm_core.OneDimMmSpace, rng: tuple[float, float]) -> list[int]:
    lo = int(math.floor(rng[0] * space.cells))
    hi = max(lo + 1, int(math.ceil(rng[1] * space.cells)))
    return list(range(lo, min(hi, space.cells)))


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _emit(report: VerificationReport, out: str) -> None:
    os.makedirs(out, exist_ok=True)
    write_report_json(report, os.path.join(out, f"{report.name}.json"))
    write_report_csv(report, os.path.join(out, f"{report.name}.csv"))
    print(report.summary())


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def _cmd_distortion(args) -> int:
    profile = _load_profile(args.kappa)
    if args.coefficient == "sigma":
        val = sigma(profile, args.t, args.theta)
    else:
        val = tau(profile, args.N, args.t, args.theta)
    print("inf" if val.is_infinite else f"{val.value:.12g}")
    return 0


def _cmd_excess(args) -> int:
    space = _load_space(args.space)
    if args.R is not None:
        val = mm_core.excess_k_pointed(space, args.p, args.K, args.R)
    else:
        val = mm_core.excess_k(space, args.p, args.K)
    print(f"{val:.12g}")
    return 0


def _cmd_verify_cd(args) -> int:
    space = _need_onedim(_load_space(args.space), "--space")
    mu0, mu1 = _default_measures(space, args.mu0_center, args.mu1_center)
    rep = cd_verify.check_cd_inequality(
        space,
        mu0,
        mu1,
        t_grid=_floats(args.t_grid),
        N_grid=_floats(args.N_grid) if args.N_grid else None,
        tol=_env_tol(args),
    )
    _emit(rep, args.out)
    return 0 if rep.passed else 1


def _cmd_verify_resulta(args) -> int:
    space = _need_onedim(_load_space(args.space), "--space")
    if space.base is None:
        space = space.with_base(space.L / 2.0)
    space = mm_core.normalize_pointed(space)
    mu0, mu1 = _default_measures(space, args.mu0_center, args.mu1_center)
    rep = cd_verify.check_resultA(
        space, args.K, args.p, args.R, args.eps, mu0, mu1,
        t_grid=_floats(args.t_grid), tol=_env_tol(args),
    )
    _emit(rep, args.out)
    return 0 if rep.passed else 1


def _cmd_verify_bm(args) -> int:
    space = mm_core.normalize(_need_onedim(_load_space(args.space), "--space"))
    A0 = _cells_from_range(space, _parse_fraction_range(args.a0, "--a0"))
    A1 = _cells_from_range(space, _parse_fraction_range(args.a1, "--a1"))
    rep = cd_verify.check_brunn_minkowski(
        space, A0, A1, t_grid=_floats(args.t_grid), p=args.p, tol=_env_tol(args)
    )
    _emit(rep, args.out)
    return 0 if rep.passed else 1


def _cmd_verify_bg(args) -> int:
    space = _need_onedim(_load_space(args.space), "--space")
    if space.base is None:
        space = space.with_base(space.L / 2.0)
    space = mm_core.normalize_pointed(space)
    rep = cd_verify.check_bishop_gromov(
        space,
        args.K,
        args.N if args.N is not None else space.N,
        args.p,
        args.D,
        r_grid=_floats(args.r_grid),
        R_grid=_floats(args.R_grid),
        tol=_env_tol(args),
    )
    _emit(rep, args.out)
    return 0 if rep.passed else 1


def _cmd_verify_mcp(args) -> int:
    space = _need_onedim(_load_space(args.space), "--space")
    if args.p is not None:
        if space.base is None:
            space = space.with_base(space.L / 2.0)
        space = mm_core.normalize_pointed(space)
    A = _cells_from_range(space, _parse_fraction_range(args.a, "--a"))
    rep = cd_verify.check_mcp(
        space,
        args.x0,
        A,
        args.K,
        args.N if args.N is not None else space.N,
        t_grid=_floats(args.t_grid),
        p=args.p,
        eps=args.eps,
        R=args.R,
        tol=_env_tol(args),
    )
    _emit(rep, args.out)
    return 0 if rep.passed else 1


def _cmd_converge(args) -> int:
    table = cd_verify.convergence_experiment(
        K=args.K,
        N=args.N,
        p=args.p,
        i_max=args.imax,
        h=args.h,
        n_sub=args.n_sub,
        eps_target=args.eps_target,
    )
    os.makedirs(args.out, exist_ok=True)
    table.to_csv(os.path.join(args.out, "convergence.csv"))
    write_atomic(os.path.join(args.out, "convergence.json"), json.dumps(table.to_json_dict(), indent=2))
    status = "PASS" if table.passed else "FAIL"
    print(
        f"[{status}] convergence: final_distance={table.flags['final_distance']:.3e} "
        f"(target {args.eps_target}), monotone from i={table.flags['distance_monotone_from']}"
    )
    return 0 if table.passed else 1


def _cmd_dist(args) -> int:
    X = _load_space(args.space_x)
    Y = _load_space(args.space_y)
    if isinstance(X, mm_core.OneDimMmSpace):
        Xq = X.to_finite(args.n_sub)
        Yq = Y.to_finite(args.n_sub) if isinstance(Y, mm_core.OneDimMmSpace) else Y
    else:
        Xq, Yq = X, Y
    if args.cross is not None:
        cross = np.asarray(_load_json(args.cross)["cross"], dtype=float)
    elif isinstance(X, mm_core.OneDimMmSpace) and isinstance(Y, mm_core.OneDimMmSpace):
        cum_x = np.concatenate([[0.0], np.cumsum(0.5 * (X.density[:-1] + X.density[1:]) * X.h)])
        cum_y = np.concatenate([[0.0], np.cumsum(0.5 * (Y.density[:-1] + Y.density[1:]) * Y.h)])
        qx = np.interp((np.arange(args.n_sub) + 0.5) / args.n_sub * cum_x[-1], cum_x, X.grid)
        qy = np.interp((np.arange(args.n_sub) + 0.5) / args.n_sub * cum_y[-1], cum_y, Y.grid)
        cross = np.abs(qx[:, None] - qy[None, :])
    else:
        raise CdkitError("--cross: finite spaces need an explicit gluing (cross-distance matrix)")
    gw = transport.gw_surrogate(Xq, Yq)
    sd = transport.sturm_D_upper(Xq, Yq, cross)
    print(f"gw_surrogate={gw:.12g}")
    print(f"sturm_D_upper={sd:.12g}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="cdkit",
        description="Verify curvature-dimension inequalities with integral curvature excess terms.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="out", help="output directory for reports")
        p.add_argument("--tol", type=float, default=None, help="pass tolerance override")
        p.add_argument("--seed", type=int, default=0, help="seed recorded for reproducibility")

    p = sub.add_parser("distortion", help="evaluate a distortion coefficient")
    p.add_argument("--kappa", required=True, help="curvature profile JSON")
    p.add_argument("--N", type=float, default=2.0)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--coefficient", choices=["tau", "sigma"], default="tau")
    p.set_defaults(func=_cmd_distortion)

    p = sub.add_parser("excess", help="integral curvature excess of a space")
    p.add_argument("--space", required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--R", type=float, default=None, help="pointed excess radius (needs base)")
    p.set_defaults(func=_cmd_excess)

    p = sub.add_parser("verify-cd", help="curvature-dimension inequality on an interval space")
    p.add_argument("--space", required=True)
    p.add_argument("--t-grid", default="0.25,0.5,0.75")
    p.add_argument("--N-grid", default=None)
    p.add_argument("--mu0-center", type=float, default=None, help="fraction of L")
    p.add_argument("--mu1-center", type=float, default=None, help="fraction of L")
    common(p)
    p.set_defaults(func=_cmd_verify_cd)

    p = sub.add_parser("verify-resulta", help="displacement convexity with excess error term")
    p.add_argument("--space", required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--R", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--t-grid", default="0.25,0.5,0.75")
    p.add_argument("--mu0-center", type=float, default=None)
    p.add_argument("--mu1-center", type=float, default=None)
    common(p)
    p.set_defaults(func=_cmd_verify_resulta)

    p = sub.add_parser("verify-bm", help="interpolated-set inequality with excess defect")
    p.add_argument("--space", required=True)
    p.add_argument("--a0", default="0.05:0.25", help="cell range as fractions lo:hi")
    p.add_argument("--a1", default="0.6:0.9")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--t-grid", default="0.25,0.5,0.75")
    common(p)
    p.set_defaults(func=_cmd_verify_bm)

    p = sub.add_parser("verify-bg", help="ball-volume ratio comparison")
    p.add_argument("--space", required=True)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--N", type=float, default=None)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--D", type=float, required=True)
    p.add_argument("--r-grid", default="0.3,0.6,0.9")
    p.add_argument("--R-grid", default="2.0,2.5")
    common(p)
    p.set_defaults(func=_cmd_verify_bg)

    p = sub.add_parser("verify-mcp", help="measure contraction toward a point")
    p.add_argument("--space", required=True)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--a", default="0.5:0.9", help="target cell range as fractions lo:hi")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--N", type=float, default=None)
    p.add_argument("--t-grid", default="0.25,0.5,0.75,1.0")
    p.add_argument("--p", type=float, default=None, help="enable the entropy form")
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--R", type=float, default=None)
    common(p)
    p.set_defaults(func=_cmd_verify_mcp)

    p = sub.add_parser("converge", help="cusp-sequence convergence experiment")
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--N", type=float, default=3.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--imax", type=int, default=20)
    p.add_argument("--h", type=float, default=1e-3)
    p.add_argument("--n-sub", type=int, default=60)
    p.add_argument("--eps-target", type=float, default=0.05)
    common(p)
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("dist", help="distance surrogates between two spaces")
    p.add_argument("--space-x", required=True)
    p.add_argument("--space-y", required=True)
    p.add_argument("--cross", default=None, help="JSON with field 'cross' (gluing distances)")
    p.add_argument("--n-sub", type=int, default=60)
    p.set_defaults(func=_cmd_dist)

    return ap


def run(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except CdkitError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
