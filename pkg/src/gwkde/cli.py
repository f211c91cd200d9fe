"""Command-line entry point: ``gwkde fit | simulate | validate``.

Exit codes: 0 ok, 1 validation checks failed, 2 bad input or usage,
3 degenerate sample, 4 singular bandwidth formula, 5 oracle failure.
"""

import argparse
import json
import logging
from pathlib import Path
import sys

from . import experiments as exp
from .asymptotics import gamma_reference
from .bandwidth import (SingularBandwidthError, fit_reference, select_bandwidths,
                        solve_c2)
from .distributions import PARAMETERS, Distribution, DistributionError
from .estimator import (DegenerateSampleError, Sample, SampleError,
                        default_grid, estimate_grid, junction_jump)
from .kernels import ConfigError, InvalidShapeError
from .oracles import OracleError

EXIT_OK, EXIT_CHECKS, EXIT_INPUT, EXIT_DEGENERATE, EXIT_SINGULAR, EXIT_ORACLE = 0, 1, 2, 3, 4, 5

log = logging.getLogger("gwkde")


class UsageError(Exception):
    pass


def _dumps(payload):
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def parse_key_values(path):
    """Read ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _int_list(text):
    try:
        return tuple(int(v) for v in str(text).split(",") if v.strip())
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


# -- fit ----------------------------------------------------------------------

def cmd_fit(args):
    sample = Sample.from_file(args.input)
    sol = select_bandwidths(sample, a=args.a, c1=args.c1)
    for w in sol.warnings:
        log.warning(w)
    cfg = sol.config()
    points = default_grid(sample, points=args.grid_points, spacing=args.spacing)
    grid = estimate_grid(points, sample, cfg, on_invalid="zero")
    if grid.invalid_points:
        log.warning("%d of %d grid points have a non-positive kernel shape "
                    "(bandwidth too large there) and were set to 0",
                    grid.invalid_points, grid.points.size)
    bw = sol.to_dict()
    bw["input"] = str(args.input)
    try:
        bw["junction_jump"] = junction_jump(sample, cfg, cfg.a / 100.0)
    except InvalidShapeError:
        bw["junction_jump"] = None
        log.warning("junction jump undefined: kernel shape not positive at the junction")
    bw["grid"] = {"points": args.grid_points, "spacing": args.spacing,
                  "invalid_points": grid.invalid_points,
                  "skipped_zero_observations": grid.skipped_zeros}
    if args.seed_echo is not None:
        bw["seed"] = args.seed_echo
    if args.out is None:
        payload = dict(bw, density={"x": grid.points.tolist(),
                                    "density": grid.values.tolist()})
        _emit(_dumps(payload), None)
    else:
        prefix = Path(args.out)
        grid.to_csv(f"{prefix}.density.csv")
        _emit(_dumps(bw), f"{prefix}.bandwidth.json")
        log.info("wrote %s.density.csv and %s.bandwidth.json", prefix, prefix)
    return EXIT_OK


# -- simulate -----------------------------------------------------------------

SIMULATE_DEFAULTS = {"dist": "weibull", "n": "100,500,1000,2000", "reps": "500",
                     "seed": "42", "grid_min": "0.01", "grid_max": None,
                     "grid_points": "512", "spacing": "log", "a": "median",
                     "c1": "-1.0"}


def _resolve_simulate(args):
    settings = dict(SIMULATE_DEFAULTS)
    if args.config:
        settings.update(parse_key_values(args.config))
    given = {k: v for k, v in vars(args).items() if v is not None}
    for key in list(SIMULATE_DEFAULTS) + [p for ps in PARAMETERS.values() for p in ps]:
        if key in given:
            settings[key] = str(given[key])
    name = settings["dist"]
    if name not in PARAMETERS:
        raise UsageError(f"unknown distribution {name!r}; choose from "
                         f"{', '.join(sorted(PARAMETERS))}")
    params = {k: float(settings[k]) for k in PARAMETERS[name] if settings.get(k) is not None}
    dist = Distribution.create(name, **params)
    grid = exp.GridSpec(
        min=float(settings["grid_min"]),
        max=None if settings["grid_max"] in (None, "", "auto") else float(settings["grid_max"]),
        points=int(settings["grid_points"]), spacing=settings["spacing"])
    a = settings["a"]
    a_policy = "median" if a == "median" else float(a)
    return exp.ExperimentConfig(distribution=dist, sample_sizes=_int_list(settings["n"]),
                                replications=int(settings["reps"]),
                                seed=int(settings["seed"]), grid=grid,
                                a_policy=a_policy, c1=float(settings["c1"]))


def cmd_simulate(args):
    try:
        cfg = _resolve_simulate(args)
    except (ValueError, DistributionError, exp.ExperimentConfigError) as exc:
        raise UsageError(str(exc)) from None
    report = exp.run_mise_experiment(cfg, workers=args.workers,
                                     progress=lambda s: log.info(s))
    _emit(_dumps(report), args.out)
    return EXIT_OK


# -- validate -----------------------------------------------------------------

DEFAULT_X = (0.3, 0.7, 1.0, 1.5, 3.0)
DEFAULT_H = (0.1, 0.05, 0.025, 0.0125)
# gamma reference matched to the sample {1, 2, 3}
DEFAULT_REF = (6.0, 1.0 / 3.0)


def cmd_validate(args):
    a, c1 = args.a, args.c1
    f = gamma_reference(args.rho, args.kappa)
    matching = {"check": "c2_matching"}
    c2 = args.c2
    try:
        warns = []
        c2_raw = solve_c2(a, c1, f, warns)
        matching.update(c2=c2_raw, warnings=warns)
    except SingularBandwidthError as exc:
        matching.update(skipped=f"{exc.factor}: {exc}")
        log.warning("c2 matching skipped: %s", exc)
        c2_raw = None
    if c2 is None:
        c2 = c2_raw if c2_raw is not None and c2_raw < 0 else c1
    matching["c2_used"] = c2
    x_grid = [m * a for m in DEFAULT_X]
    report = exp.run_asymptotics_validation(f, a, c1, c2, x_grid, list(DEFAULT_H),
                                            threshold=args.threshold)
    report["matching"] = matching
    report["reference"] = {"rho": args.rho, "kappa": args.kappa}
    _emit(_dumps(report), args.out)
    errors = sum(s["errors"] for s in report["summary"].values())
    for name, s in report["summary"].items():
        log.info("%-24s pass %s/%s%s", name, s["passed"], s["cells"],
                 "" if s["holds"] else "  (does not hold)")
    if errors:
        return EXIT_ORACLE
    failed = any(r["pass"] is False for r in report["records"])
    return EXIT_CHECKS if failed else EXIT_OK


# -- parser -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    p = _Parser(prog="gwkde", description="Gamma-Weibull kernel density estimation")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="estimate a density from a data file")
    fit.add_argument("input", help="one nonnegative number per line")
    fit.add_argument("--a", type=float, default=None, help="split point (default: median)")
    fit.add_argument("--c1", type=float, default=-1.0)
    fit.add_argument("--grid-points", type=int, default=512)
    fit.add_argument("--spacing", choices=("linear", "log"), default="linear")
    fit.add_argument("--out", help="output prefix; writes PREFIX.density.csv and "
                     "PREFIX.bandwidth.json (default: JSON to stdout)")
    fit.add_argument("--seed-echo", type=int, default=None,
                     help="record this seed in the output for provenance")

    sim = sub.add_parser("simulate", help="Monte Carlo MISE experiment")
    sim.add_argument("--config", help="key=value file; flags override it")
    sim.add_argument("--dist", choices=sorted(PARAMETERS))
    for key in sorted({k for ps in PARAMETERS.values() for k in ps}):
        sim.add_argument(f"--{key}", type=float)
    sim.add_argument("--n", help="comma-separated sample sizes")
    sim.add_argument("--reps", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--grid-min", type=float)
    sim.add_argument("--grid-max", type=float)
    sim.add_argument("--grid-points", type=int)
    sim.add_argument("--spacing", choices=("linear", "log"))
    sim.add_argument("--a", help="split point or 'median'")
    sim.add_argument("--c1", type=float)
    sim.add_argument("--workers", type=int, default=1)
    sim.add_argument("--out")

    val = sub.add_parser("validate", help="check the expansions against quadrature")
    val.add_argument("--a", type=float, default=1.0)
    val.add_argument("--c1", type=float, default=-1.0)
    val.add_argument("--c2", type=float, default=None,
                     help="tail constant (default: matching condition, or c1 if it is not negative)")
    val.add_argument("--rho", type=float, default=DEFAULT_REF[0])
    val.add_argument("--kappa", type=float, default=DEFAULT_REF[1])
    val.add_argument("--threshold", type=float, default=exp.RATIO_THRESHOLD)
    val.add_argument("--out")
    return p


COMMANDS = {"fit": cmd_fit, "simulate": cmd_simulate, "validate": cmd_validate}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"gwkde: usage error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="gwkde: %(message)s", stream=sys.stderr, force=True)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        log.error("usage error: %s", exc)
        return EXIT_INPUT
    except DegenerateSampleError as exc:
        log.error("degenerate sample: %s", exc)
        return EXIT_DEGENERATE
    except (SampleError, OSError) as exc:
        log.error("input error: %s", exc)
        return EXIT_INPUT
    except SingularBandwidthError as exc:
        log.error("singular bandwidth (%s): %s", exc.factor, exc)
        return EXIT_SINGULAR
    except ConfigError as exc:
        log.error("invalid estimator configuration: %s", exc)
        return EXIT_SINGULAR
    except OracleError as exc:
        log.error("oracle failure: %s", exc)
        return EXIT_ORACLE
    except exp.ExperimentAborted as exc:
        log.error("experiment aborted: %s", exc)
        return EXIT_SINGULAR


if __name__ == "__main__":
    sys.exit(main())
