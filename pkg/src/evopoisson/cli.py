"""Command line front end: ad-hoc solves, parameter sweeps, and the bundled
figure experiments (numbered presets 2-6).

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import itertools
import os
import sys
from dataclasses import replace
from fractions import Fraction

import numpy as np

from .control import ControlMode, run_two_timescale
from .dynamics import (StepFamily, StepSchedule, discrete_replicator,
                       integrate_replicator)
from .equilibrium import solve_equilibrium
from .errors import (EvoPoissonError, NumericalError, ParameterError,
                     ResourceLimitError)
from .model import PopulationModel, SafeSetConvention, model_from_json
from .output import format_value, write_csv, write_series
from .payoff import PayoffEngine

_SCHEDULES = {
    "inv_n": StepFamily.INV_N,
    "inv_n_log_n": StepFamily.INV_N_LOG_N,
    "inv_n_sq": StepFamily.INV_N_SQ,
    "constant": StepFamily.CONSTANT,
}


def _preset_low_spread(lam=10.0, price=4.0, r1=0.1,
                       convention=None) -> PopulationModel:
    # two types with spreading rates 0.05 and 0.2
    return PopulationModel(lam=lam, type_dist=(r1, 1.0 - r1),
                           contamination_rate=5, recovery_rates=(100, 25),
                           infection_cost=5.0, protection_cost=price,
                           convention=convention)


def _preset_pricing(lam=10.0, price=4.0, convention=None) -> PopulationModel:
    # two types with spreading rates 0.5 and 0.98
    return PopulationModel(lam=lam, type_dist=(0.3, 0.7),
                           contamination_rate=1,
                           recovery_rates=(2, Fraction(50, 49)),
                           infection_cost=10.0, protection_cost=price,
                           convention=convention)


def _preset_learning(lam=10.0, price=4.0, convention=None) -> PopulationModel:
    # two types with spreading rates 0.5 and 50/51
    return PopulationModel(lam=lam, type_dist=(0.3, 0.7),
                           contamination_rate=5,
                           recovery_rates=(10, Fraction(51, 10)),
                           infection_cost=10.0, protection_cost=price,
                           convention=convention)


def _load_model(args, default=None) -> PopulationModel:
    model = default
    if args.config:
        with open(args.config) as fh:
            model = model_from_json(fh.read())
    if model is None:
        raise ParameterError("this command needs --config MODEL.json")
    if args.convention:
        model = replace(model,
                        convention=SafeSetConvention(args.convention))
    return model


def _out_dir(args) -> str:
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_eq(args) -> int:
    engine = PayoffEngine(_load_model(args))
    res = solve_equilibrium(engine)
    print(f"p_star        {format_value(res.p_star)}")
    print(f"protection    {format_value(1.0 - res.p_star)}")
    print(f"kind          {res.kind.value}")
    print(f"residual      {format_value(res.residual)}")
    print(f"iterations    {res.iterations}")
    print(f"convention    {res.convention.value}")
    if args.out:
        write_csv(args.out,
                  ["p_star", "protection_rate", "kind", "residual",
                   "iterations", "convention"],
                  [(res.p_star, 1.0 - res.p_star, res.kind.value,
                    res.residual, res.iterations, res.convention.value)])
    return 0


def _parse_sweep_spec(spec: str):
    try:
        name, rng = spec.split("=", 1)
        lo, hi, count = rng.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError as exc:
        raise ParameterError(
            f"sweep spec must look like PARAM=LO:HI:N, got {spec!r}") from exc
    if count < 1 or hi < lo:
        raise ParameterError(f"empty sweep grid in {spec!r}")
    return name, np.linspace(lo, hi, count)


def _apply_param(model: PopulationModel, name: str,
                 value: float) -> PopulationModel:
    if name == "lambda":
        return replace(model, lam=value)
    if name == "C":
        return model.with_cost(value)
    if name == "r":
        if model.num_types != 2:
            raise ParameterError("sweeping r needs a two-type model")
        return replace(model, type_dist=(value, 1.0 - value))
    if name.startswith("tau"):
        idx = int(name[3:]) - 1
        if not 0 <= idx < model.num_types:
            raise ParameterError(f"no type for sweep parameter {name!r}")
        tau = Fraction(repr(float(value)))
        if tau <= 0:
            raise ParameterError(f"tau must be > 0, got {value}")
        rates = list(model.recovery_rates)
        rates[idx] = model.contamination_rate / tau
        return replace(model, recovery_rates=tuple(rates))
    raise ParameterError(f"unknown sweep parameter {name!r} "
                         f"(use lambda, C, r, or tauN)")


def cmd_sweep(args) -> int:
    model = _load_model(args)
    specs = [_parse_sweep_spec(s) for s in args.sweep]
    if not 1 <= len(specs) <= 2:
        raise ParameterError("give one or two --sweep specs")
    names = [s[0] for s in specs]
    grids = [s[1] for s in specs]
    rows = []
    for combo in itertools.product(*grids):
        cell = model
        for name, value in zip(names, combo):
            cell = _apply_param(cell, name, float(value))
        res = solve_equilibrium(PayoffEngine(cell))
        rev = cell.lam * (1.0 - res.p_star) * cell.protection_cost
        rows.append(tuple(float(v) for v in combo)
                    + (res.p_star, 1.0 - res.p_star, rev))
    header = names + ["p_star", "protection_rate", "revenue[cost]"]
    out = args.out or "sweep.csv"
    write_series(out, header, rows, args.format, x_col=len(names) - 1,
                 y_col=len(names) + 1, title="sweep")
    return 0


def cmd_replicator(args) -> int:
    engine = PayoffEngine(_load_model(args))
    if args.mode == "ode":
        traj = integrate_replicator(engine, args.p0, dt=args.dt,
                                    t_max=args.t_max, epsilon=args.eps,
                                    tol=args.tol)
    else:
        sched = StepSchedule(_SCHEDULES[args.schedule], h=args.h)
        traj = discrete_replicator(engine, args.p0, sched,
                                   n_max=args.n_max, tol=args.tol)
    rows = list(zip(traj.times.tolist(), traj.values.tolist()))
    out = args.out or "replicator.csv"
    write_series(out, ["t_or_n", "p"], rows, args.format,
                 title="replicator path")
    return 0


def cmd_revenue(args) -> int:
    engine = PayoffEngine(_load_model(args))
    if args.n_points < 1 or args.c_hi < args.c_lo:
        raise ParameterError("empty revenue grid")
    rows = []
    for c in np.linspace(args.c_lo, args.c_hi, args.n_points):
        res = solve_equilibrium(engine.with_cost(float(c)))
        rows.append((float(c), res.p_star,
                     engine.model.lam * (1.0 - res.p_star) * float(c)))
    out = args.out or "revenue.csv"
    write_series(out, ["C[cost]", "p_star", "revenue[cost]"], rows,
                 args.format, title="revenue vs price")
    return 0


def _trace_rows(state):
    cols = [state.trace_n, state.trace_price, state.trace_revenue,
            state.trace_sign, state.trace_population]
    return [tuple(float(c[i]) for c in cols)
            for i in range(len(state.trace_n))]


_TRACE_HEADER = ["n", "C_n[cost]", "R_hat[cost]", "Delta_n", "p_population"]


def cmd_spsa(args) -> int:
    engine = PayoffEngine(_load_model(args))
    sched = StepSchedule(_SCHEDULES[args.schedule_a], h=args.h)
    state = run_two_timescale(
        engine, sched, delta=args.delta, c0=args.c0, n_outer=args.n_outer,
        mode=ControlMode(args.mode), seed=args.seed, p0=args.p0)
    for note in state.notes:
        print(f"note: {note}", file=sys.stderr)
    out = args.out or "spsa_trace.csv"
    write_series(out, _TRACE_HEADER, _trace_rows(state), args.format,
                 x_col=0, y_col=1, title="price trace")
    print(f"final_price {format_value(state.price)}")
    return 0


def _figure2(args, out):
    lam_grid = np.arange(2.0, 31.0, 1.0)
    r_grid = [0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 0.9, 1.0]
    rows = []
    for lam in lam_grid:
        for r1 in r_grid:
            model = _preset_low_spread(lam=float(lam), r1=r1,
                                       convention=_conv(args))
            res = solve_equilibrium(PayoffEngine(model))
            rows.append((float(lam), r1, 1.0 - res.p_star))
    path = os.path.join(out, "figure2_protection_vs_lambda.csv")
    return [write_series(path, ["lambda", "r", "protection_rate"],
                         rows, args.format, x_col=0, y_col=2,
                         title="protection vs lambda")]


def _figure3(args, out):
    written = []
    for tau1, deltas in (("0.05", (100, 25)), ("0.1", (50, 25))):
        rows = []
        for r1 in np.linspace(0.0, 1.0, 51):
            model = PopulationModel(
                lam=30.0, type_dist=(float(r1), 1.0 - float(r1)),
                contamination_rate=5, recovery_rates=deltas,
                infection_cost=5.0, protection_cost=4.0,
                convention=_conv(args))
            res = solve_equilibrium(PayoffEngine(model))
            rows.append((float(r1), 1.0 - res.p_star))
        path = os.path.join(out, f"figure3_protection_vs_r_tau1_{tau1}.csv")
        written.append(write_series(path, ["r", "protection_rate"],
                                    rows, args.format,
                                    title=f"protection vs r (tau1={tau1})"))
    return written


def _figure4(args, out):
    written = []
    model = _load_model(args, _preset_low_spread(lam=args.lam or 10.0))
    engine = PayoffEngine(model)
    for p0 in (0.3, 0.7):
        traj = integrate_replicator(engine, p0)
        rows = list(zip(traj.times.tolist(), traj.values.tolist()))
        path = os.path.join(out, f"figure4_trajectory_p0_{p0}.csv")
        written.append(write_series(path, ["t_or_n", "p"], rows, args.format,
                                    title=f"replicator from p0={p0}"))
    return written


def _figure5(args, out):
    model = _load_model(args, _preset_pricing())
    engine = PayoffEngine(model)
    rows = []
    for c in np.linspace(0.0, model.infection_cost, 101):
        res = solve_equilibrium(engine.with_cost(float(c)))
        rows.append((float(c), res.p_star,
                     model.lam * (1.0 - res.p_star) * float(c)))
    path = os.path.join(out, "figure5_revenue_vs_price.csv")
    return [write_series(path, ["C[cost]", "p_star", "revenue[cost]"], rows,
                         args.format, x_col=0, y_col=2,
                         title="revenue vs price")]


def _figure6(args, out):
    model = _load_model(args, _preset_learning())
    engine = PayoffEngine(model)
    written = []
    for slug in ("inv_n_log_n", "inv_n", "inv_n_sq"):
        sched = StepSchedule(_SCHEDULES[slug])
        state = run_two_timescale(engine, sched, delta=args.delta,
                                  c0=args.c0 or 1.5, n_outer=args.n_outer,
                                  mode=ControlMode.NESTED, seed=args.seed)
        path = os.path.join(out, f"figure6_trace_{slug}.csv")
        written.append(write_series(path, _TRACE_HEADER, _trace_rows(state),
                                    args.format, x_col=0, y_col=1,
                                    title=f"price trace a(n)={slug}"))
    return written


def _conv(args):
    return SafeSetConvention(args.convention) if args.convention else None


_FIGURES = {2: _figure2, 3: _figure3, 4: _figure4, 5: _figure5, 6: _figure6}


def cmd_figure(args) -> int:
    out = _out_dir(args)
    written = _FIGURES[args.which](args, out)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="evopoisson",
        description="Protection-game equilibria, replicator dynamics, and "
                    "price learning for Poisson-sized interactions")
    parser.add_argument("--config", help="model JSON file")
    parser.add_argument("--out", help="output path (directory for figure)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for stochastic runs")
    parser.add_argument("--convention", choices=["literal", "exclusive"],
                        help="safe-set convention override")
    parser.add_argument("--format", choices=["csv", "svg"], default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("eq", help="solve the equilibrium for a model config")

    p = sub.add_parser("sweep", help="1-D/2-D parameter sweeps")
    p.add_argument("--sweep", action="append", required=True,
                   metavar="PARAM=LO:HI:N",
                   help="sweep spec; params: lambda, C, r, tauN")

    p = sub.add_parser("replicator", help="integrate the replicator path")
    p.add_argument("--p0", type=float, default=0.5)
    p.add_argument("--mode", choices=["ode", "discrete"], default="ode")
    p.add_argument("--schedule", choices=sorted(_SCHEDULES), default="inv_n")
    p.add_argument("--h", type=float, default=0.01,
                   help="step for the constant schedule")
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--t-max", type=float, default=400.0)
    p.add_argument("--n-max", type=int, default=1_000_000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--eps", type=float, default=1.0)

    p = sub.add_parser("revenue", help="revenue across a price grid")
    p.add_argument("--c-lo", type=float, default=0.0)
    p.add_argument("--c-hi", type=float, default=None,
                   help="defaults to the infection cost K")
    p.add_argument("--n-points", type=int, default=101)

    p = sub.add_parser("spsa", help="two-timescale price learning run")
    p.add_argument("--schedule-a", choices=sorted(_SCHEDULES),
                   default="inv_n_log_n")
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--mode", choices=["coupled", "nested"], default="nested")
    p.add_argument("--n-outer", type=int, default=300)
    p.add_argument("--c0", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--p0", type=float, default=0.5)

    p = sub.add_parser("figure", help="run a bundled experiment preset")
    p.add_argument("which", type=int, choices=sorted(_FIGURES))
    p.add_argument("--lam", type=float, default=None,
                   help="override the preset interaction size")
    p.add_argument("--n-outer", type=int, default=300)
    p.add_argument("--c0", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "eq": cmd_eq,
        "sweep": cmd_sweep,
        "replicator": cmd_replicator,
        "revenue": cmd_revenue,
        "spsa": cmd_spsa,
        "figure": cmd_figure,
    }
    try:
        if args.command == "revenue" and args.c_hi is None:
            args.c_hi = _load_model(args).infection_cost
        return handlers[args.command](args)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, ResourceLimitError, EvoPoissonError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
