"""Command-line front end.

Subcommands evaluate the analytic coverage model (optionally
cross-checked by Monte Carlo) and stream CSV rows to stdout or --out;
human-readable report lines go to stderr, and --plot renders a matplotlib
figure of the same rows next to the delimited output.

Exit codes: 0 success, 1 validation failure, 2 config error, 3 numerics
error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np

from .analytic import (NumericsError, coverage_probability, p_los_serving,
                       sigmoid_p_los_serving)
from .config import (ConfigError, ScenarioConfig, config_from_dict,
                     db_to_linear, linear_to_db)
from .montecarlo import LOS_MODES, McConfig, estimate
from .specfun import Hyp2f1Error, QuadratureError

SWEEP_AXES = ("gamma", "lambda", "omega", "theta_db")

CSV_HEADER = ["axis_name", "axis_value", "gamma_m", "lambda_per_km2",
              "omega_rad", "theta_db", "p_cov_analytic", "p_assoc",
              "p_los_serving", "p_cov_mc", "mc_ci95", "trials", "seed",
              "los_mode", "error"]

LOS_CURVE_HEADER = ["axis_name", "axis_value", "gamma_m", "lambda_per_km2",
                    "omega_rad", "theta_db", "p_los_serving",
                    "p_los_serving_mc", "mc_ci95", "sigmoid_p_los", "trials",
                    "seed", "los_mode", "error"]

VALIDATE_HEADER = ["gamma_m", "lambda_per_km2", "theta_db", "p_cov_analytic",
                   "p_cov_mc", "mc_ci95", "abs_diff", "tol", "status",
                   "low_power"]


@dataclass(frozen=True)
class SweepSpec:
    """One sweep request: an axis, its values, and the fixed scenario.

    `base_fields` holds ScenarioConfig constructor values for everything
    except the swept axis (whose entry is replaced per point).
    """

    axis: str                      # gamma | lambda | omega | theta_db
    values: tuple                  # axis values in CLI units
    base_fields: dict
    with_mc: bool = False
    trials: int = 200_000
    seed: int = 1234
    los_mode: str = "bernoulli"

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise ConfigError(f"axis must be one of {SWEEP_AXES}")
        if not self.values:
            raise ConfigError("empty sweep value list")
        if not all(math.isfinite(v) for v in self.values):
            raise ConfigError("sweep values must be finite")


@dataclass
class SweepRow:
    axis_name: str
    axis_value: float
    gamma_m: Optional[float] = None
    lambda_per_km2: Optional[float] = None
    omega_rad: Optional[float] = None
    theta_db: Optional[float] = None
    p_cov_analytic: Optional[float] = None
    p_assoc: Optional[float] = None
    p_los_serving: Optional[float] = None
    p_cov_mc: Optional[float] = None
    mc_ci95: Optional[float] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    los_mode: Optional[str] = None
    error: Optional[str] = None


@dataclass
class LosCurveRow:
    axis_name: str
    axis_value: float
    gamma_m: Optional[float] = None
    lambda_per_km2: Optional[float] = None
    omega_rad: Optional[float] = None
    theta_db: Optional[float] = None
    p_los_serving: Optional[float] = None
    p_los_serving_mc: Optional[float] = None
    mc_ci95: Optional[float] = None
    sigmoid_p_los: Optional[float] = None
    trials: Optional[int] = None
    seed: Optional[int] = None
    los_mode: Optional[str] = None
    error: Optional[str] = None


@dataclass
class ValidationRow:
    gamma_m: float
    lambda_per_km2: float
    theta_db: float
    p_cov_analytic: float
    p_cov_mc: float
    mc_ci95: float
    abs_diff: float
    tol: float
    status: str
    low_power: bool


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(int(v))
    return str(v)


def write_rows(rows, header, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(getattr(row, f.name)) for f in fields(row)])


def point_seed(master: int, index: int) -> int:
    """Per-point MC seed; index 0 reproduces single-point runs exactly."""
    return int(np.random.SeedSequence([master, index]).generate_state(1)[0])


def _resolve_fields(args) -> dict:
    """Merge config file and CLI flags into ScenarioConfig field values."""
    doc = {}
    if args.config:
        with open(args.config) as fh:
            text = fh.read()
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON config: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config document must be a JSON object")

    overrides = {}
    if getattr(args, "gamma", None) is not None:
        overrides["gamma"] = args.gamma
    if getattr(args, "lambda_per_km2", None) is not None:
        overrides["lam"] = args.lambda_per_km2 / 1e6
    if getattr(args, "theta_db", None) is not None:
        overrides["theta"] = db_to_linear(args.theta_db)
    if getattr(args, "omega_rad", None) is not None:
        overrides["omega"] = args.omega_rad
    if getattr(args, "omega_deg", None) is not None:
        overrides["omega"] = math.radians(args.omega_deg)

    # collect whatever the document provides, without requiring
    # gamma/lambda/theta yet; each command enforces what it needs
    fields_out = {}
    probe = dict(doc)
    probe.setdefault("gamma_m", 1.0)
    probe.setdefault("lambda_per_km2", 1.0)
    probe.setdefault("theta_db", 0.0)
    cfg = config_from_dict(probe, **overrides)
    for name in ("omega", "p", "alpha_los", "alpha_nlos", "m_los", "m_nlos",
                 "sigma2", "beta", "delta", "kappa", "numerics"):
        fields_out[name] = getattr(cfg, name)
    if "gamma_m" in doc or "gamma" in overrides:
        fields_out["gamma"] = cfg.gamma
    if "lambda_per_km2" in doc or "lam" in overrides:
        fields_out["lam"] = cfg.lam
    if "theta_db" in doc or "theta" in overrides:
        fields_out["theta"] = cfg.theta
    return fields_out


def _require(fields_map: dict, names) -> None:
    missing = [n for n in names if n not in fields_map]
    if missing:
        flags = {"gamma": "--gamma", "lam": "--lambda-per-km2",
                 "theta": "--theta-db"}
        raise ConfigError("missing required parameter(s): "
                          + ", ".join(flags.get(n, n) for n in missing))


def evaluate_point(cfg: ScenarioConfig, axis_name: str, axis_value: float,
                   with_mc: bool, trials: int, seed: int, los_mode: str,
                   index: int) -> SweepRow:
    """One sweep point: analytic coverage, optionally an MC estimate."""
    row = SweepRow(axis_name=axis_name, axis_value=axis_value,
                   gamma_m=cfg.gamma, lambda_per_km2=cfg.lam * 1e6,
                   omega_rad=cfg.omega, theta_db=linear_to_db(cfg.theta))
    try:
        res = coverage_probability(cfg)
        row.p_cov_analytic = res.p_cov
        row.p_assoc = res.p_assoc
        row.p_los_serving = res.p_los_serving
        if with_mc:
            mc = McConfig(trials=trials, seed=point_seed(seed, index),
                          los_mode=los_mode)
            est = estimate(cfg, mc)
            row.p_cov_mc = est.p_cov_hat
            row.mc_ci95 = est.ci95_halfwidth
            row.trials = est.trials
            row.seed = est.seed
            row.los_mode = est.los_mode
    except (NumericsError, QuadratureError, Hyp2f1Error) as exc:
        row.error = f"{type(exc).__name__}: {exc}"
    return row


def sweep_rows(spec: SweepSpec, workers: int = 1) -> list[SweepRow]:
    """Evaluate every axis value, in order, optionally in parallel."""
    configs = []
    for v in spec.values:
        f = dict(spec.base_fields)
        if spec.axis == "lambda":
            f["lam"] = v / 1e6
        elif spec.axis == "theta_db":
            f["theta"] = db_to_linear(v)
        else:
            f[spec.axis] = v
        configs.append(ScenarioConfig(**f))

    def work(iv):
        i, (v, cfg) = iv
        return evaluate_point(cfg, spec.axis, v, spec.with_mc, spec.trials,
                              spec.seed, spec.los_mode, index=i)

    items = list(enumerate(zip(spec.values, configs)))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(work, items))
    return [work(iv) for iv in items]


@dataclass
class OptimalHeightResult:
    gamma_star: float
    p_cov_star: float
    evaluations: int
    warning: Optional[str] = None


def optimal_height(evaluate, lo: float, hi: float, coarse: int = 13,
                   refine_iters: int = 25,
                   mode_tol: float = 1e-3) -> OptimalHeightResult:
    """Grid scan plus golden-section refinement of max_h evaluate(h).

    Multiple coarse-grid local maxima within mode_tol of each other make
    strict unimodality unreliable (coverage curves carry small ripples),
    so the search falls back to a 4x finer grid and reports a warning.
    An endpoint maximum is reported with a warning instead of refined.
    """
    xs = np.linspace(lo, hi, coarse)
    vs = [evaluate(float(x)) for x in xs]
    evals = len(xs)
    best = int(np.argmax(vs))

    # a secondary local maximum counts when it rises above the valley
    # separating it from the global maximum by more than mode_tol
    local_max = [i for i in range(1, coarse - 1)
                 if vs[i] >= vs[i - 1] and vs[i] >= vs[i + 1]]
    rivals = []
    for i in local_max:
        if i == best:
            continue
        a, b = sorted((i, best))
        prominence = vs[i] - min(vs[a:b + 1])
        if prominence > mode_tol:
            rivals.append(i)
    if rivals:
        fine = np.linspace(lo, hi, 4 * coarse)
        fv = [evaluate(float(x)) for x in fine]
        evals += len(fine)
        k = int(np.argmax(fv))
        return OptimalHeightResult(float(fine[k]), fv[k], evals,
                                   warning="non-unimodal coverage curve; "
                                           "fine-grid maximum reported")

    if best in (0, coarse - 1):
        side = "lower" if best == 0 else "upper"
        return OptimalHeightResult(float(xs[best]), vs[best], evals,
                                   warning=f"maximum at {side} range "
                                           "endpoint")

    a, b = float(xs[best - 1]), float(xs[best + 1])
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = evaluate(c), evaluate(d)
    evals += 2
    for _ in range(refine_iters):
        if b - a < 1e-6 * max(1.0, abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = evaluate(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = evaluate(d)
        evals += 1
    x_star, v_star = (c, fc) if fc >= fd else (d, fd)
    return OptimalHeightResult(float(x_star), float(v_star), evals)


def validate_points(base_fields: dict, gammas, lams_per_km2, thetas_db,
                    trials: int, seed: int, abs_tol: float, los_mode: str,
                    analytic_bias: float = 0.0):
    """Analytic-vs-MC cross-check on a parameter grid.

    A point passes when |analytic - mc| <= max(abs_tol, 3*ci95); when the
    CI term dominates the comparison has little power and the row is
    flagged.  `analytic_bias` is a testing hook that offsets the analytic
    value to exercise the failure path.
    """
    rows = []
    all_pass = True
    index = 0
    for g in gammas:
        for l_km2 in lams_per_km2:
            for th_db in thetas_db:
                cfg = ScenarioConfig(**{**base_fields, "gamma": g,
                                        "lam": l_km2 / 1e6,
                                        "theta": db_to_linear(th_db)})
                ana = coverage_probability(cfg).p_cov + analytic_bias
                est = estimate(cfg, McConfig(trials=trials,
                                             seed=point_seed(seed, index),
                                             los_mode=los_mode))
                tol = max(abs_tol, 3.0 * est.ci95_halfwidth)
                diff = abs(ana - est.p_cov_hat)
                ok = diff <= tol
                all_pass &= ok
                rows.append(ValidationRow(
                    gamma_m=g, lambda_per_km2=l_km2, theta_db=th_db,
                    p_cov_analytic=ana, p_cov_mc=est.p_cov_hat,
                    mc_ci95=est.ci95_halfwidth, abs_diff=diff, tol=tol,
                    status="PASS" if ok else "FAIL",
                    low_power=3.0 * est.ci95_halfwidth > abs_tol))
                index += 1
    return rows, all_pass


def los_curve_rows(base_fields: dict, gammas, with_mc: bool, trials: int,
                   seed: int, los_mode: str,
                   sigmoid_ab=None) -> list[LosCurveRow]:
    rows = []
    for i, g in enumerate(gammas):
        cfg = ScenarioConfig(**{**base_fields, "gamma": g})
        row = LosCurveRow(axis_name="gamma", axis_value=g, gamma_m=g,
                          lambda_per_km2=cfg.lam * 1e6, omega_rad=cfg.omega,
                          theta_db=linear_to_db(cfg.theta))
        try:
            row.p_los_serving = p_los_serving(cfg)
            if sigmoid_ab is not None:
                row.sigmoid_p_los = sigmoid_p_los_serving(cfg, *sigmoid_ab)
            if with_mc:
                mc = McConfig(trials=trials, seed=point_seed(seed, i),
                              los_mode=los_mode)
                est = estimate(cfg, mc)
                row.p_los_serving_mc = est.p_los_serving_hat
                n_assoc = max(round(est.p_assoc_hat * est.trials), 1)
                p = est.p_los_serving_hat
                row.mc_ci95 = 1.96 * math.sqrt(max(p * (1 - p), 0.0)
                                               / n_assoc)
                row.trials = est.trials
                row.seed = est.seed
                row.los_mode = est.los_mode
        except (NumericsError, QuadratureError, Hyp2f1Error,
                ValueError) as exc:
            row.error = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


# --- argument parsing --------------------------------------------------------


def _add_base_flags(p):
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--gamma", type=float, help="UAV height, m")
    p.add_argument("--lambda-per-km2", type=float, dest="lambda_per_km2",
                   help="UAV density, per km^2")
    p.add_argument("--theta-db", type=float, dest="theta_db",
                   help="SINR threshold, dB")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--omega-rad", type=float, dest="omega_rad",
                   help="antenna beamwidth, rad")
    g.add_argument("--omega-deg", type=float, dest="omega_deg",
                   help="antenna beamwidth, degrees")
    p.add_argument("--out", help="write CSV here instead of stdout")


def _add_mc_flags(p):
    p.add_argument("--mc", action="store_true",
                   help="add a Monte Carlo estimate to each row")
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--los-mode", choices=LOS_MODES, default="bernoulli",
                   dest="los_mode")


def _parse_values(args) -> list[float]:
    if args.values is not None:
        vals = [float(v) for v in args.values.split(",") if v.strip()]
    else:
        lo, hi, n = args.linspace
        vals = [float(x) for x in np.linspace(lo, hi, int(n))]
    if not vals:
        raise ConfigError("empty sweep value list")
    if not all(math.isfinite(v) for v in vals):
        raise ConfigError("sweep values must be finite")
    return vals


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="uavcov",
        description="Coverage probability of a low-altitude UAV network "
                    "over an urban building grid.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coverage", help="evaluate one parameter point")
    _add_base_flags(p)
    _add_mc_flags(p)

    p = sub.add_parser("sweep", help="sweep one axis, one CSV row per value")
    _add_base_flags(p)
    _add_mc_flags(p)
    p.add_argument("--axis", choices=SWEEP_AXES, required=True)
    vg = p.add_mutually_exclusive_group(required=True)
    vg.add_argument("--values", help="comma-separated axis values")
    vg.add_argument("--linspace", nargs=3, type=float,
                    metavar=("LO", "HI", "N"))
    p.add_argument("--workers", type=int, default=1,
                   help="parallel evaluation of sweep points")
    p.add_argument("--plot", help="render the sweep to this image file")

    p = sub.add_parser("optimal-height",
                       help="height maximizing coverage probability")
    _add_base_flags(p)
    p.add_argument("--gamma-min", type=float, required=True)
    p.add_argument("--gamma-max", type=float, required=True)
    p.add_argument("--coarse", type=int, default=13,
                   help="coarse grid size (evaluation budget)")
    p.add_argument("--refine-iters", type=int, default=25)

    p = sub.add_parser("validate", help="analytic vs Monte Carlo cross-check")
    _add_base_flags(p)
    p.add_argument("--gammas", default="40,100,200")
    p.add_argument("--lambdas-per-km2", default="25,100",
                   dest="lambdas_per_km2")
    p.add_argument("--thetas-db", default="-5,5", dest="thetas_db")
    p.add_argument("--trials", type=int, default=200_000)
    p.add_argument("--seed", type=int, default=1234)
    p.add_argument("--los-mode", choices=LOS_MODES, default="bernoulli",
                   dest="los_mode")
    p.add_argument("--abs-tol", type=float, default=0.015)
    p.add_argument("--analytic-bias", type=float, default=0.0,
                   help="testing hook: offset the analytic value")

    p = sub.add_parser("los-curve",
                       help="serving-link LOS probability vs height")
    _add_base_flags(p)
    _add_mc_flags(p)
    vg = p.add_mutually_exclusive_group(required=True)
    vg.add_argument("--values", help="comma-separated heights, m")
    vg.add_argument("--linspace", nargs=3, type=float,
                    metavar=("LO", "HI", "N"))
    p.add_argument("--sigmoid-a", type=float, dest="sigmoid_a")
    p.add_argument("--sigmoid-b", type=float, dest="sigmoid_b")
    p.add_argument("--plot", help="render the curve to this image file")

    return ap


def _emit(rows, header, args, plot_fn=None) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            write_rows(rows, header, fh)
        print(f"wrote {len(rows)} row(s) to {args.out}", file=sys.stderr)
    else:
        write_rows(rows, header, sys.stdout)
    plot = getattr(args, "plot", None)
    if plot and plot_fn is not None:
        plot_fn(rows, plot)
        print(f"wrote figure to {plot}", file=sys.stderr)


def _cmd_coverage(args) -> int:
    f = _resolve_fields(args)
    _require(f, ("gamma", "lam", "theta"))
    cfg = ScenarioConfig(**f)
    row = evaluate_point(cfg, "gamma", cfg.gamma, args.mc, args.trials,
                         args.seed, args.los_mode, index=0)
    if row.error is not None:
        raise NumericsError(row.error)
    _emit([row], CSV_HEADER, args)
    return 0


def _cmd_sweep(args) -> int:
    from .plotting import save_sweep_figure

    f = _resolve_fields(args)
    values = _parse_values(args)
    needed = {"gamma": ("lam", "theta"), "lambda": ("gamma", "theta"),
              "omega": ("gamma", "lam", "theta"),
              "theta_db": ("gamma", "lam")}[args.axis]
    _require(f, needed)
    f.setdefault("gamma", 1.0)   # axis field is replaced per point
    f.setdefault("lam", 0.0)
    f.setdefault("theta", 1.0)
    spec = SweepSpec(axis=args.axis, values=tuple(values), base_fields=f,
                     with_mc=args.mc, trials=args.trials, seed=args.seed,
                     los_mode=args.los_mode)
    rows = sweep_rows(spec, workers=max(args.workers, 1))
    _emit(rows, CSV_HEADER, args, plot_fn=save_sweep_figure)
    n_err = sum(1 for r in rows if r.error is not None)
    if n_err:
        print(f"{n_err} of {len(rows)} points failed numerically",
              file=sys.stderr)
    return 0


def _cmd_optimal_height(args) -> int:
    f = _resolve_fields(args)
    _require(f, ("lam", "theta"))
    if not 0 < args.gamma_min < args.gamma_max:
        raise ConfigError("need 0 < --gamma-min < --gamma-max")

    def evaluate(g: float) -> float:
        return coverage_probability(ScenarioConfig(**{**f, "gamma": g})).p_cov

    res = optimal_height(evaluate, args.gamma_min, args.gamma_max,
                         coarse=args.coarse,
                         refine_iters=args.refine_iters)
    out = sys.stdout
    if args.out:
        out = open(args.out, "w")
    try:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["gamma_star_m", "p_cov", "evaluations", "warning"])
        w.writerow([_cell(res.gamma_star), _cell(res.p_cov_star),
                    _cell(res.evaluations), _cell(res.warning)])
    finally:
        if args.out:
            out.close()
    if res.warning:
        print(f"warning: {res.warning}", file=sys.stderr)
    print(f"gamma* = {res.gamma_star:.3f} m, p_cov = {res.p_cov_star:.6f} "
          f"({res.evaluations} evaluations)", file=sys.stderr)
    return 0


def _cmd_validate(args) -> int:
    f = _resolve_fields(args)
    gammas = [float(v) for v in args.gammas.split(",")]
    lams = [float(v) for v in args.lambdas_per_km2.split(",")]
    thetas = [float(v) for v in args.thetas_db.split(",")]
    rows, all_pass = validate_points(f, gammas, lams, thetas, args.trials,
                                     args.seed, args.abs_tol, args.los_mode,
                                     analytic_bias=args.analytic_bias)
    _emit(rows, VALIDATE_HEADER, args)
    n_fail = sum(1 for r in rows if r.status == "FAIL")
    n_low = sum(1 for r in rows if r.low_power)
    print(f"validate: {len(rows) - n_fail}/{len(rows)} points PASS"
          + (f", {n_low} low-power comparison(s)" if n_low else ""),
          file=sys.stderr)
    return 0 if all_pass else 1


def _cmd_los_curve(args) -> int:
    from .plotting import save_los_curve_figure

    f = _resolve_fields(args)
    _require(f, ("lam",))
    f.setdefault("theta", 1.0)  # unused by the LOS-serving probability
    values = _parse_values(args)
    sig = None
    if (args.sigmoid_a is None) != (args.sigmoid_b is None):
        raise ConfigError("--sigmoid-a and --sigmoid-b go together")
    if args.sigmoid_a is not None:
        sig = (args.sigmoid_a, args.sigmoid_b)
    rows = los_curve_rows(f, values, args.mc, args.trials, args.seed,
                          args.los_mode, sigmoid_ab=sig)
    _emit(rows, LOS_CURVE_HEADER, args, plot_fn=save_los_curve_figure)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"coverage": _cmd_coverage, "sweep": _cmd_sweep,
                "optimal-height": _cmd_optimal_height,
                "validate": _cmd_validate, "los-curve": _cmd_los_curve}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericsError, QuadratureError, Hyp2f1Error) as exc:
        print(f"numerics error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
