"""Command-line front end: ``hopred solve|reduce|mfpt|continuous|verify|sweep``.

Exit statuses: 0 success, 1 verification failure, 2 input error,
3 infeasible reduction, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import math
import sys
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from .continuous import (
    DiscretizationBridge,
    QuadratureConfig,
    continuous_period_mfpt,
    continuous_reduce_one_state,
    continuous_velocity,
    effective_diffusion,
)
from .errors import (
    HopredError,
    ModelError,
    NumericalError,
    ParseError,
    ReductionError,
    SchemaError,
    SimulationError,
)
from .first_passage import IntervalProblem, mfpt_closed_form, mfpt_linear_solve
from .io import load_model
from .models import ContinuousModel, HoppingModel
from .reduction import reduce_one_state_vd, reduce_one_state_vt, reduce_two_state
from .simulation import SimConfig, default_horizon, simulate_first_passage, simulate_transport
from .steady_state import compute_weights, transport_stats

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_INPUT = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4

UNITS = {"V": "length/time", "D": "length^2/time", "T": "time", "rate": "1/time", "1": "1"}


class InputError(HopredError):
    """Bad command-line input that is not a model-file problem."""


def fmt(x) -> str:
    """Display form: six decimals, or six significant digits in exponent form."""
    if x is None:
        return "n/a"
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    if x == 0 or 1e-4 <= abs(x) < 1e7:
        return f"{x:.6f}"
    return f"{x:.6e}"


def full(x) -> str:
    return "" if x is None else "%.17g" % float(x)


class Report:
    """Collects table lines and CSV rows for one command."""

    def __init__(self):
        self.lines = []
        self.rows = []

    def text(self, line=""):
        self.lines.append(line)

    def value(self, name, x, units, label=None):
        self.lines.append(f"  {label or name} = {fmt(x)}  [{units}]")
        self.rows.append((name, full(x), units))

    def emit(self, out):
        out.write("\n".join(self.lines) + "\n")


def write_csv(path, rows, header=("quantity", "value", "units")):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_manifest(path, args, config):
    manifest = {
        "command": args.command,
        "input": args.model,
        "config": config,
        "version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(str(path) + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _load(path, kind):
    try:
        model = load_model(path)
    except FileNotFoundError:
        raise InputError(f"model file not found: {path}")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}")
    want = {"discrete": HoppingModel, "continuous": ContinuousModel,
            "any": (HoppingModel, ContinuousModel)}[kind]
    if not isinstance(model, want):
        raise InputError(f"this command needs a {kind} model file")
    return model


# -- commands ---------------------------------------------------------------

def cmd_solve(args):
    model = _load(args.model, "discrete")
    rep = compute_weights(model)
    stats = transport_stats(model, rep)
    out = Report()
    out.text(f"Periodic hopping model, N = {model.period_count}, L = {fmt(model.step_length)}")
    out.text("Stationary occupation probabilities:")
    for j, p in enumerate(rep.probabilities):
        out.value(f"p_{j}", p, "1")
    out.text("Transport statistics:")
    out.value("V", stats.velocity, UNITS["V"])
    out.value("D", stats.diffusion, UNITS["D"])
    out.value("T", stats.period_mfpt, UNITS["T"])
    out.value("gamma", stats.gamma, "1")
    out.value("randomness", stats.randomness, "1")
    if rep.log_space:
        out.text("(sums evaluated in log space)")
    return out, {}


def _parse_factorization(spec):
    if spec in ("symmetric", "symmetric-backward"):
        return "symmetric", None
    if spec.startswith("free:"):
        try:
            t = float(spec[5:])
        except ValueError:
            raise InputError(f"bad --factorization value {spec!r}; expected free:<number>")
        return "free", t
    raise InputError(f"bad --factorization value {spec!r}; expected symmetric or free:<t>")


def cmd_reduce(args):
    model = _load(args.model, "discrete")
    policy, t = _parse_factorization(args.factorization)
    if args.target == "vt":
        report = reduce_one_state_vt(model)
    elif args.target == "vd":
        report = reduce_one_state_vd(model)
    else:
        report = reduce_two_state(model, policy, t)
    out = Report()
    red = report.reduced
    out.text(f"Reduction target {args.target} of an N = {model.period_count} model")
    out.text("Reduced rates:")
    if args.target in ("vt", "vd"):
        out.value("u_r", red.forward_rate, UNITS["rate"])
        out.value("w_r", red.backward_rate, UNITS["rate"])
    else:
        agg = report.aggregates
        out.value("u_r0", red.u_r0, UNITS["rate"])
        out.value("u_r1", red.u_r1, UNITS["rate"])
        out.value("w_r0", red.w_r0, UNITS["rate"])
        out.value("w_r1", red.w_r1, UNITS["rate"])
        out.text(f"Aggregates (factorization {policy}):")
        out.value("u", agg.u, "1/time^2")
        out.value("w", agg.w, "1/time^2")
        out.value("sigma", agg.sigma, UNITS["rate"])
    out.text("Preserved statistics (relative error after re-evaluation):")
    for name, value in report.preserved.items():
        out.lines.append(f"  {name} = {fmt(value)}  [{UNITS[name]}]"
                         f"  rel.err {report.preservation_error[name]:.1e}")
        out.rows.append((name, full(value), UNITS[name]))
    if report.discarded:
        out.text("Discarded statistics (original vs reduced):")
        for name, (orig, reduced) in report.discarded.items():
            out.lines.append(f"  {name} = {fmt(orig)} vs {fmt(reduced)}  [{UNITS[name]}]")
            out.rows.append((f"{name}_original", full(orig), UNITS[name]))
            out.rows.append((f"{name}_reduced", full(reduced), UNITS[name]))
    return out, {"target": args.target, "factorization": args.factorization}


def cmd_mfpt(args):
    model = _load(args.model, "discrete")
    out = Report()
    if args.interval is None:
        stats = transport_stats(model)
        out.text(f"Mean time to complete one cycle from state 0, N = {model.period_count}")
        out.value("T", stats.period_mfpt, UNITS["T"])
        return out, {}
    M, K = args.interval
    if M < 0 or K < 0:
        raise InputError("--interval needs M >= 0 and K >= 0")
    N = model.period_count
    idx = np.arange(-M, K + 1) % N
    start = 0 if args.start is None else args.start
    problem = IntervalProblem(M, K, model.u[idx], model.w[idx], start)
    problem.validate()
    closed = mfpt_closed_form(problem)
    solve = mfpt_linear_solve(problem)
    c, s = closed.interior, solve.interior
    dev = np.abs(c - s) / np.maximum(np.abs(c), np.abs(s))
    worst = float(np.max(dev))
    out.text(f"Absorbing interval: interior states {-M} .. {K}, absorbers at {-(M + 1)} and {K + 1}")
    out.text(f"  {'n':>5}  {'closed form':>14}  {'linear solve':>14}  {'rel.dev':>9}")
    for n, a, b, d in zip(problem.states, c, s, dev):
        out.text(f"  {int(n):>5}  {fmt(a):>14}  {fmt(b):>14}  {d:9.1e}")
        out.rows.append((f"T_{int(n)}", full(a), UNITS["T"]))
    out.value(f"T_{start}", closed.at(start), UNITS["T"], label=f"T({start})")
    out.lines.append(f"  max relative deviation = {worst:.3e}")
    out.rows.append(("max_relative_deviation", full(worst), "1"))
    if worst > args.tol:
        raise NumericalError(f"closed form and linear solve differ by {worst:.3e} > {args.tol:g}")
    return out, {"interval": [M, K], "start": start, "tol": args.tol}


def _quad_configs(args):
    quad = QuadratureConfig() if args.tol is None else QuadratureConfig(rtol=args.tol)
    bridge = DiscretizationBridge() if args.tol is None else DiscretizationBridge(rtol=args.tol)
    return quad, bridge


def cmd_continuous(args):
    model = _load(args.model, "continuous")
    quad, bridge = _quad_configs(args)
    out = Report()
    out.text(f"Tilted periodic potential ({model.potential.family}), beta F L = {fmt(model.bias)}")
    q = args.quantity
    if q == "v":
        res = continuous_velocity(model, quad)
        out.value("V", res.value, UNITS["V"])
        out.value("V_error", res.error, UNITS["V"], label="error estimate")
    elif q == "t":
        res = continuous_period_mfpt(model, quad)
        out.value("T", res.value, UNITS["T"])
        out.value("T_error", res.error, UNITS["T"], label="error estimate")
    elif q == "rates":
        red = continuous_reduce_one_state(model, quad)
        out.value("u_r", red.forward_rate, UNITS["rate"])
        out.value("w_r", red.backward_rate, UNITS["rate"])
        out.value("ratio", red.forward_rate / red.backward_rate, "1", label="u_r/w_r")
    else:
        res = effective_diffusion(model, bridge)
        out.value("D_eff", res.value, UNITS["D"])
        out.value("D_eff_error", res.error, UNITS["D"], label="error estimate")
        out.text("  levels N = " + ", ".join(str(n) for n in res.levels))
    return out, {"quantity": q, "quadrature": asdict(quad), "bridge": asdict(bridge)}


def cmd_verify(args):
    model = _load(args.model, "discrete")
    horizon = default_horizon(model) if args.horizon is None else args.horizon
    config = SimConfig(trajectory_count=args.trajectories, horizon=horizon, rng_seed=args.seed)
    stats = transport_stats(model)
    V, D = simulate_transport(model, config)
    T = simulate_first_passage(model, config)
    factor = 1.0 + args.perturb_closed_form
    out = Report()
    out.text(f"Monte Carlo check, seed {config.rng_seed}, {config.trajectory_count} trajectories, "
             f"horizon {fmt(horizon)} (time), burn-in {fmt(config.burn_in_value)}")
    out.text(f"  {'quantity':<8}  {'closed form':>14}  {'estimate':>14}  {'std.err':>12}"
             f"  {'z':>7}  result")
    ok = True
    for name, exact, est in (("V", stats.velocity, V), ("D", stats.diffusion, D),
                             ("T", stats.period_mfpt, T)):
        exact = exact * factor
        passed = est.within(exact, 4.0)
        ok &= passed
        z = (est.estimate - exact) / est.stderr if est.stderr > 0 else 0.0
        out.text(f"  {name:<8}  {fmt(exact):>14}  {fmt(est.estimate):>14}  {fmt(est.stderr):>12}"
                 f"  {z:7.2f}  {'PASS' if passed else 'FAIL'}")
        out.rows.append((f"{name}_closed_form", full(exact), UNITS[name]))
        out.rows.append((f"{name}_estimate", full(est.estimate), UNITS[name]))
        out.rows.append((f"{name}_stderr", full(est.stderr), UNITS[name]))
    out.status = EXIT_OK if ok else EXIT_VERIFY_FAILED
    cfg = asdict(config)
    cfg.pop("threads")
    return out, {"simulation": cfg}


DISCRETE_SWEEP = ("force", "scale")
CONTINUOUS_SWEEP = ("tilt_force", "amplitude", "beta", "bare_diffusion")


def _parse_values(spec):
    try:
        if ":" in spec:
            a, b, n = spec.split(":")
            return np.linspace(float(a), float(b), int(n))
        return np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise InputError(f"bad --values {spec!r}; expected start:stop:count or a comma list")


def _sweep_discrete(model, param, x):
    if param == "scale":
        if x <= 0:
            raise InputError("scale values must be positive")
        return HoppingModel(model.u * x, model.w * x, model.step_length)
    # shift the log cycle affinity by -x, spread evenly over the N steps
    f = math.exp(x / (2.0 * model.period_count))
    return HoppingModel(model.u * f, model.w / f, model.step_length)


def _sweep_continuous(model, param, x):
    if param == "amplitude":
        pot = model.potential
        if pot.family == "samples":
            raise InputError("amplitude sweeps need an analytic potential family")
        return replace(model, potential=replace(pot, amplitude=x))
    return replace(model, **{param: x})


def cmd_sweep(args):
    model = _load(args.model, "any")
    values = _parse_values(args.values)
    discrete = isinstance(model, HoppingModel)
    param = args.param or ("force" if discrete else "tilt_force")
    allowed = DISCRETE_SWEEP if discrete else CONTINUOUS_SWEEP
    if param not in allowed:
        raise InputError(f"--param must be one of {', '.join(allowed)} for this model")
    quad, bridge = _quad_configs(args)
    q = args.quantity
    names = {"v": ("V",), "t": ("T",), "deff": ("D",), "rates": ("u_r", "w_r")}[q]
    rows = []
    for x in values:
        if discrete:
            m = _sweep_discrete(model, param, float(x))
            s = transport_stats(m)
            if q == "rates":
                r = reduce_one_state_vt(m).reduced
                ys = (r.forward_rate, r.backward_rate)
            else:
                ys = ({"v": s.velocity, "t": s.period_mfpt, "deff": s.diffusion}[q],)
        else:
            m = _sweep_continuous(model, param, float(x))
            if q == "v":
                ys = (continuous_velocity(m, quad).value,)
            elif q == "t":
                ys = (continuous_period_mfpt(m, quad).value,)
            elif q == "rates":
                r = continuous_reduce_one_state(m, quad)
                ys = (r.forward_rate, r.backward_rate)
            else:
                ys = (effective_diffusion(m, bridge).value,)
        rows.append((float(x),) + tuple(float(y) for y in ys))
    out = Report()
    out.text(f"Sweep of {param} over {len(values)} values")
    out.text("  " + "  ".join(f"{h:>14}" for h in (param,) + names))
    for row in rows:
        out.text("  " + "  ".join(f"{fmt(v):>14}" for v in row))
        for name, y in zip(names, row[1:]):
            out.rows.append((f"{name}@{param}={full(row[0])}", full(y),
                             UNITS.get(name, UNITS["rate"])))
    if args.emit_plot_data:
        write_csv(args.emit_plot_data, [[full(v) for v in row] for row in rows],
                  header=("x",) + tuple(f"y_{n}" for n in names) if len(names) > 1 else ("x", "y"))
        out.plot_written = True
    return out, {"param": param, "values": [float(v) for v in values], "quantity": q}


COMMANDS = {
    "solve": cmd_solve,
    "reduce": cmd_reduce,
    "mfpt": cmd_mfpt,
    "continuous": cmd_continuous,
    "verify": cmd_verify,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hopred",
        description="Transport statistics and model reduction for periodic hopping models.")
    parser.add_argument("--version", action="version", version=f"hopred {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("model", help="model file (JSON)")
        p.add_argument("--csv", metavar="PATH", help="also write results as CSV")
        return p

    add("solve", "stationary distribution, V, D, T, gamma and randomness")

    p = add("reduce", "reduce to a one- or two-state model")
    p.add_argument("--target", choices=("vt", "vd", "vtd"), default="vt")
    p.add_argument("--factorization", default="symmetric", metavar="symmetric|free:<t>")

    p = add("mfpt", "mean first-passage times")
    p.add_argument("--interval", nargs=2, type=int, metavar=("M", "K"))
    p.add_argument("--start", type=int, metavar="n")
    p.add_argument("--tol", type=float, default=1e-10, metavar="REL",
                   help="maximum allowed closed-form vs linear-solve deviation")

    p = add("continuous", "tilted periodic potential: V, T(0), reduced rates or D_eff")
    p.add_argument("--quantity", choices=("v", "t", "rates", "deff"), default="v")
    p.add_argument("--tol", type=float, metavar="REL", help="relative quadrature/bridge tolerance")

    p = add("verify", "compare closed forms against Monte Carlo estimates")
    p.add_argument("--seed", type=int, default=42, metavar="U64")
    p.add_argument("--trajectories", type=int, default=10_000, metavar="N")
    p.add_argument("--horizon", type=float, metavar="T",
                   help="trajectory length in time units (default: 100 N / min_j(u_j + w_j))")
    p.add_argument("--perturb-closed-form", type=float, default=0.0, help=argparse.SUPPRESS)

    p = add("sweep", "evaluate a quantity over a range of one parameter")
    p.add_argument("--param", help="force|scale (discrete) or tilt_force|amplitude|beta|"
                                   "bare_diffusion (continuous)")
    p.add_argument("--values", default="0:5:11", metavar="START:STOP:COUNT")
    p.add_argument("--quantity", choices=("v", "t", "rates", "deff"), default="v")
    p.add_argument("--tol", type=float, metavar="REL")
    p.add_argument("--emit-plot-data", metavar="PATH", help="write x/y columns to PATH")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out, config = COMMANDS[args.command](args)
        out.emit(sys.stdout)
        if args.csv:
            write_csv(args.csv, out.rows)
            write_manifest(args.csv, args, config)
        if getattr(out, "plot_written", False):
            write_manifest(args.emit_plot_data, args, config)
        return getattr(out, "status", EXIT_OK)
    except (ModelError, ParseError, SchemaError, InputError, SimulationError) as exc:
        print(f"hopred: input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ReductionError as exc:
        print(f"hopred: infeasible reduction: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NumericalError as exc:
        print(f"hopred: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
