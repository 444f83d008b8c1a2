import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from pydantic import ValidationError

from cascade_lab.cascade import (
    CascadeReport,
    DenseOrbit,
    cascade_diagnostics,
    run_cascade,
    trajectory_table,
)
from cascade_lab.errors import CascadeLabError, SearchFailed
from cascade_lab.frames import cancellation_experiment
from cascade_lab.galerkin import (
    GalerkinTrajectory,
    approximation_experiment,
    generation_sobolev,
    lift_toy_orbit,
    reduction_error,
    sobolev_norm,
)
from cascade_lab.integrator import integrate
from cascade_lab.lattice import (
    LambdaSet,
    build_lambda,
    growth_bound,
    sobolev_sums,
    verify_lambda,
)
from cascade_lab.normal_form import random_state, remainder_scaling
from cascade_lab.params import (
    CascadeParams,
    ExactOrbit,
    IntegratorConfig,
    LambdaBuildParams,
    LiftConfig,
    OrbitKind,
    ToyParams,
)
from cascade_lab.reports import (
    PlotSpec,
    RunSummary,
    write_csv,
    write_json,
    write_table,
    write_text,
)
from cascade_lab.settings import Settings, load_settings
from cascade_lab.sweep import run_sweep
from cascade_lab.toy import (
    ToyState,
    exact_orbit_point,
    saddle_index,
    toy_field,
    toy_hamiltonian,
    toy_mass,
)

logger = logging.getLogger(__name__)

T = TypeVar("T")

# Acceptance windows of the normal-form scaling fit
DISPLACEMENT_ORDER = (3.0, 0.1)
FIELD_REMAINDER_ORDER = (5.0, 0.2)

# Options whose values may start with a minus sign
SPAN_FLAGS = ("--t",)


def _pick(value: Optional[T], default: T) -> T:
    return default if value is None else value


def _span(text: str) -> Tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected START:END, got {text!r}") from e
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"empty time span {text!r}")
    return lo, hi


def _join_span_flags(argv: Sequence[str]) -> List[str]:
    """Rewrite ``--t -3:3`` as ``--t=-3:3`` so argparse accepts the value."""
    out: List[str] = []
    tokens = list(argv)
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in SPAN_FLAGS and i + 1 < len(tokens):
            out.append(f"{tok}={tokens[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def _drift(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=np.float64)
    scale = abs(values[0]) if abs(values[0]) > 0 else 1.0
    return float(np.max(np.abs(values - values[0])) / scale)


def _report(summary: RunSummary, out: Path, stem: str) -> int:
    write_json(out / f"{stem}.json", summary)
    for name, value in summary.values.items():
        print(f"{name:<28} = {value:.6g}")
    for name, ok in summary.flags.items():
        print(f"{name:<28} : {'pass' if ok else 'FAIL'}")
    return 0 if summary.passed else 1


def _integrator(settings: Settings) -> IntegratorConfig:
    return IntegratorConfig.from_settings(settings.integrator)


def _toy_params(
    args: argparse.Namespace, settings: Settings, n: Optional[int] = None
) -> ToyParams:
    return ToyParams(
        N=_pick(n, _pick(args.N, settings.toy.n)),
        delta=_pick(args.delta, settings.toy.delta),
        sigma=_pick(args.sigma, settings.toy.sigma),
        nu=_pick(args.nu, settings.toy.nu),
    )


def _load_lambda(path: Optional[Path], settings: Settings, n: int) -> LambdaSet:
    if path is not None:
        return LambdaSet.from_json(path.read_text(encoding="utf-8"))
    lat = settings.lattice
    logger.info(f"No Lambda file given, building one with {n} generations")
    return build_lambda(
        LambdaBuildParams(
            N=n,
            gen_size=lat.gen_size,
            radius=lat.radius,
            seed=lat.seed,
            max_attempts=lat.max_attempts,
            spread=lat.spread,
            growth_s=lat.growth_s,
        )
    )


def _heteroclinic_start(n: int, j: int, t: float) -> np.ndarray:
    orbit = ExactOrbit(kind=OrbitKind.HETEROCLINIC_PLUS, j=j, n=n)
    return np.asarray(exact_orbit_point(orbit, t))


# toy


def cmd_toy_run(args: argparse.Namespace, settings: Settings, out: Path) -> int:
    if args.state is not None:
        state = ToyState.from_json(args.state.read_text(encoding="utf-8"))
        b0, t0 = np.asarray(state), state.time
    else:
        n = _pick(args.N, settings.toy.n)
        b0, t0 = _heteroclinic_start(n, args.j, args.start), 0.0
    run = integrate(toy_field, b0, t0, t0 + args.t1, _integrator(settings))
    table = trajectory_table(run, args.samples)
    n = b0.size
    header = ["t"] + [f"|b_{k}|" for k in range(1, n + 1)] + ["h", "M"]
    write_table(
        out,
        "toy_run",
        table,
        header,
        PlotSpec("t", "|b_k|", columns=range(2, n + 2), title="Toy model modes"),
    )
    final = run.final
    summary = RunSummary(
        command="toy run",
        values={
            "h_drift": _drift(table[:, -2]),
            "m_drift": _drift(table[:, -1]),
            "final_saddle": float(saddle_index(final)),
        },
    )
    write_text(out / "toy_final_state.json", ToyState(final, t0 + args.t1).to_json())
    return _report(summary, out, "toy_run")


def cmd_toy_hetero(args: argparse.Namespace, settings: Settings, out: Path) -> int:
    n = _pick(args.N, settings.toy.n)
    kind = OrbitKind.HETEROCLINIC_MINUS if args.minus else OrbitKind.HETEROCLINIC_PLUS
    orbit = ExactOrbit(kind=kind, j=args.j, n=n, phase=settings.toy.phase)
    lo, hi = args.t
    start = np.asarray(exact_orbit_point(orbit, lo))
    run = integrate(toy_field, start, lo, hi, _integrator(settings))
    times, states = run.sample(args.samples)
    exact = np.array([np.asarray(exact_orbit_point(orbit, t)) for t in times])
    deviation = np.linalg.norm(states - exact, axis=1)
    j = args.j
    rows = np.column_stack(
        [
            times,
            np.abs(exact[:, j - 1]),
            np.abs(states[:, j - 1]),
            np.abs(exact[:, j]),
            np.abs(states[:, j]),
            deviation,
        ]
    )
    header = [
        "t",
        f"exact |b_{j}|",
        f"integrated |b_{j}|",
        f"exact |b_{j + 1}|",
        f"integrated |b_{j + 1}|",
        "l2 deviation",
    ]
    write_table(
        out,
        "toy_hetero",
        rows,
        header,
        PlotSpec("t", "|b|", columns=(2, 3, 4, 5), title="Heteroclinic connection"),
    )
    worst = float(deviation.max())
    summary = RunSummary(
        command="toy hetero",
        values={
            "max_deviation": worst,
            "h_drift": _drift(np.asarray(toy_hamiltonian(states))),
            "m_drift": _drift(np.asarray(toy_mass(states))),
        },
        flags={"matches_closed_form": worst < args.tolerance},
    )
    return _report(summary, out, "toy_hetero")


# lambda


def _sums_table(lam: LambdaSet, s: float, out: Path) -> RunSummary:
    sums, ratio = sobolev_sums(lam, s)
    rows = np.column_stack([np.arange(1, lam.n + 1), sums])
    write_table(
        out,
        "lambda_sums",
        rows,
        ["generation", "S_j"],
        PlotSpec("generation j", "S_j", logscale="y", title=f"Sobolev sums, s={s:g}"),
    )
    summary = RunSummary(command="lambda sums", values={"s": s})
    if ratio is not None:
        bound = growth_bound(s, lam.n)
        summary.values.update({"ratio": ratio, "growth_bound": bound})
        summary.flags["growth_bound_met"] = ratio >= bound
    else:
        logger.warning(f"Lambda has {lam.n} generations, no S_(N-1)/S_3 ratio")
    return summary


def cmd_lambda_build(args: argparse.Namespace, settings: Settings, out: Path) -> int:
    lat = settings.lattice
    params = LambdaBuildParams(
        N=_pick(args.N, lat.n),
        gen_size=_pick(args.gen_size, lat.gen_size),
        radius=_pick(args.radius, lat.radius),
        seed=_pick(args.seed, lat.seed),
        max_attempts=lat.max_attempts,
        spread=lat.spread,
        growth_s=_pick(args.growth_s, lat.growth_s),
    )
    lam = build_lambda(params)
    write_text(out / "lambda.json", lam.to_json())
    verdict = verify_lambda(lam)
    write_json(out / "lambda_verdict.json", verdict)
    summary = _sums_table(lam, _pick(args.s, lat.s), out)
    summary.command = "lambda build"
    summary.flags["verified"] = verdict.ok
    return _report(summary, out, "lambda_build")


def cmd_lambda_verify(args: argparse.Namespace, settings: Settings, out: Path) -> int:
    lam = LambdaSet.from_json(args.file.read_text(encoding="utf-8"))
    verdict = verify_lambda(lam, closure_radius=args.closure_radius)
    write_json(out / "lambda_verdict.json", verdict)
    for name, ok in verdict.conditions.items():
        print(f"{name:<28} : {'pass' if ok else 'FAIL'}")
    if not verdict.ok:
        logger.error(f"Lambda in {args.file} failed verification")
        return 1
    return 0


def cmd_lambda_sums(args: argparse.Namespace, settings: Settings, out: Path) -> int:
    lam = LambdaSet.from_json(args.file.read_text(encoding="utf-8"))
    summary = _sums_table(lam, _pick(args.s, settings.lattice.s), out)
    return _report(summary, out, "lambda_sums")


# cascade


def cmd_cascade_search(args: argparse.Namespace, settings: Settings, out: Path) -> int:
    params = CascadeParams(
        toy=_toy_params(args, settings), **settings.cascade.model_dump()
    )
    try:
        run = run_cascade(params, _integrator(settings))
    except SearchFailed as e:
        if isinstance(e.report, CascadeReport):
            write_json(out / "cascade_report.json", e.report)
        raise
    write_text(out / "cascade_initial_state.json", run.initial.to_json())
    write_json(out / "cascade_report.json", run.report)
    _cascade_tables(run.orbit, params.toy.N, args.samples, out)
    return _cascade_verdict(run.report)


def cmd_cascade_report(args: argparse.Namespace, settings: Settings, out: Path) -> int:
    state = ToyState.from_json(args.state.read_text(encoding="utf-8"))
    params = CascadeParams(
        toy=_toy_params(args, settings, n=state.n),
        **settings.cascade.model_dump(),
    )
    cfg = _integrator(settings)
    long_cfg = cfg.model_copy(update={"max_time": max(cfg.max_time, args.t1)})
    run = integrate(toy_field, state, state.time, state.time + args.t1, long_cfg)
    report = cascade_diagnostics(run, params, last_saddle=args.last)
    write_json(out / "cascade_report.json", report)
    _cascade_tables(run, state.n, args.samples, out)
    return _cascade_verdict(report)


def _cascade_tables(orbit: DenseOrbit, n: int, samples: int, out: Path) -> None:
    header = ["t"] + [f"|b_{k}|" for k in range(1, n + 1)] + ["h", "M"]
    write_table(
        out,
        "cascade_trajectory",
        trajectory_table(orbit, samples),
        header,
        PlotSpec(
            "t", "|b_k|", columns=range(2, n + 2), logscale="y", title="Cascade"
        ),
    )


def _cascade_verdict(report: CascadeReport) -> int:
    times = ", ".join(f"{t:.4f}" for t in report.transition_times)
    print(f"transition times  : {times}")
    print(f"total time T0     : {report.total_time:.6g}")
    print(f"h drift, M drift  : {report.h_drift:.3e}, {report.m_drift:.3e}")
    for verdict in report.success:
        state = "pass" if verdict.success else "FAIL"
        peak = verdict.off_corridor_max
        print(f"saddle {verdict.saddle:<3} off-corridor max {peak:.3e} : {state}")
    if not report.ok:
        logger.error("Orbit leaves the cascade corridor")
        return 1
    return 0


def cmd_cascade_cancellation(
    args: argparse.Namespace, settings: Settings, out: Path
) -> int:
    sigma = _pick(args.sigma, settings.toy.sigma)
    deltas = sorted(_pick(args.deltas, settings.sweep.deltas), reverse=True)
    cfg = _integrator(settings)
    results = [
        cancellation_experiment(d, sigma, cfg, C=args.C, n=args.N) for d in deltas
    ]
    rows = np.array(
        [
            [r.delta, r.x_star, r.transit, r.exit_p1, r.baseline_p1, r.ratio]
            for r in results
        ]
    )
    write_table(
        out,
        "cancellation",
        rows,
        ["delta", "x_star", "transit", "exit_p1", "baseline_p1", "ratio"],
        PlotSpec("delta", "exit ratio", columns=(6,), logscale="x"),
    )
    ratios = [r.ratio for r in results]
    summary = RunSummary(
        command="cascade cancellation",
        values={"smallest_delta_ratio": ratios[-1]},
        flags={
            "monotone": all(b < a for a, b in zip(ratios, ratios[1:])),
            "below_half": ratios[-1] < 0.5,
        },
    )
    return _report(summary, out, "cancellation")


# galerkin


def _lifted_start(lam: LambdaSet, args: argparse.Namespace) -> np.ndarray:
    if args.state is not None:
        state = ToyState.from_json(args.state.read_text(encoding="utf-8"))
        return np.asarray(state)
    return _heteroclinic_start(lam.n, args.j, args.start)


def cmd_galerkin_compare(
    args: argparse.Namespace, settings: Settings, out: Path
) -> int:
    gal = settings.galerkin
    lam = _load_lambda(args.lambda_file, settings, gal.n)
    b0 = _lifted_start(lam, args)
    lambdas = _pick(args.lambdas, gal.lambdas)
    window = _pick(args.window, gal.window)
    cfg = _integrator(settings)
    results = approximation_experiment(
        lambdas, lam, b0, window, cfg, samples=gal.samples, flow=args.flow
    )
    grid = np.linspace(0.0, window, gal.samples)
    rows = np.column_stack([grid] + [r.series for r in results])
    header = ["t / lambda^2"] + [f"lambda={r.lam:g}" for r in results]
    write_table(
        out,
        "galerkin_compare",
        rows,
        header,
        PlotSpec("t / lambda^2", "l1 deviation", logscale="y"),
    )
    check = reduction_error(lam, b0, window, cfg, samples=gal.samples)
    peaks = [r.max_error for r in results]
    summary = RunSummary(
        command="galerkin compare",
        values={
            **{f"max_error_lambda_{r.lam:g}": r.max_error for r in results},
            **{f"leaked_mass_lambda_{r.lam:g}": r.leaked_mass for r in results},
            "generation_spread": check.spread,
            "toy_deviation": check.deviation,
        },
        flags={"decreasing_in_lambda": all(b < a for a, b in zip(peaks, peaks[1:]))},
    )
    return _report(summary, out, "galerkin_compare")


def cmd_galerkin_norms(args: argparse.Namespace, settings: Settings, out: Path) -> int:
    gal = settings.galerkin
    lam = _load_lambda(args.lambda_file, settings, gal.n)
    b0 = _lifted_start(lam, args)
    s = _pick(args.s, gal.s)
    window = _pick(args.window, gal.window)
    toy = integrate(toy_field, b0, 0.0, window, _integrator(settings))
    lifted: GalerkinTrajectory = lift_toy_orbit(
        toy, lam, LiftConfig(lam=args.lam), samples=gal.samples
    )
    rows = []
    for k, t in enumerate(lifted.times):
        state = lifted.state(k)
        rows.append(
            [t, sobolev_norm(state, s), *generation_sobolev(state, lam, s)]
        )
    table = np.array(rows)
    header = ["t", f"H^{s:g} norm"] + [f"gen {j}" for j in range(1, lam.n + 1)]
    write_table(
        out,
        "galerkin_norms",
        table,
        header,
        PlotSpec("t", "weighted energy", logscale="y"),
    )
    summary = RunSummary(
        command="galerkin norms",
        values={
            "initial_norm": float(table[0, 1]),
            "final_norm": float(table[-1, 1]),
            "growth": float(table[-1, 1] / table[0, 1]),
        },
    )
    return _report(summary, out, "galerkin_norms")


# normal form


def cmd_nf_check(args: argparse.Namespace, settings: Settings, out: Path) -> int:
    nf = settings.normal_form
    shape = random_state(
        _pick(args.support_size, nf.support_size), _pick(args.seed, nf.seed)
    )
    amplitudes = _pick(args.amplitudes, nf.amplitudes)
    result = remainder_scaling(amplitudes, shape, _integrator(settings))
    rows = np.column_stack(
        [
            result.amplitudes,
            result.displacement,
            result.remainder,
            result.field_remainder,
            result.leakage,
        ]
    )
    write_table(
        out,
        "normal_form",
        rows,
        ["amplitude", "displacement", "remainder", "field_remainder", "leakage"],
        PlotSpec("amplitude", "size", columns=(2, 4), logscale="xy"),
    )
    d_order, d_tol = DISPLACEMENT_ORDER
    f_order, f_tol = FIELD_REMAINDER_ORDER
    summary = RunSummary(
        command="nf check",
        values={
            "displacement_slope": result.displacement_slope,
            "remainder_slope": result.remainder_slope,
            "field_remainder_slope": result.field_remainder_slope,
        },
        flags={
            "displacement_cubic": abs(result.displacement_slope - d_order) <= d_tol,
            "field_remainder_quintic": abs(result.field_remainder_slope - f_order)
            <= f_tol,
        },
    )
    return _report(summary, out, "normal_form")


# sweep


def cmd_sweep(args: argparse.Namespace, settings: Settings, out: Path) -> int:
    result = run_sweep(
        settings,
        deltas=args.deltas,
        ns=args.ns,
        threads=args.threads,
        with_time_law=args.time_law,
    )
    write_json(out / "sweep.json", result)
    nan = float("nan")
    rows = np.array(
        [
            [
                c.n,
                c.delta,
                float(c.ok),
                _pick(c.total_time, nan),
                _pick(c.h_drift, nan),
                _pick(c.m_drift, nan),
            ]
            for c in result.cells
        ]
    )
    write_csv(
        out / "sweep.csv",
        rows,
        ["N", "delta", "ok", "total_time", "h_drift", "m_drift"],
    )
    for cell in result.cells:
        state = "ok" if cell.ok else (cell.error or "corridor violated")
        print(f"N={cell.n:<3} delta={cell.delta:<8g} {state}")
    if result.time_law_slope is not None:
        print(
            f"time law slope {result.time_law_slope:.4g}, "
            f"ratio spread {result.time_law_spread}"
        )
    return 0 if all(c.ok for c in result.cells) else 1


# parser


def _toy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--N", type=int, help="Number of generations")
    parser.add_argument("--delta", type=float, help="Closeness parameter")
    parser.add_argument("--sigma", type=float, help="Section offset")
    parser.add_argument("--nu", type=float, help="Exponent of delta thresholds")


def _lift_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--lambda-file", type=Path, help="Lambda JSON (built from settings if absent)"
    )
    parser.add_argument("--state", type=Path, help="Toy initial state JSON")
    parser.add_argument("--j", type=int, default=2, help="Heteroclinic to start on")
    parser.add_argument(
        "--start", type=float, default=-1.0, help="Time on the heteroclinic"
    )
    parser.add_argument("--window", type=float, help="Toy-time window")


Handler = Callable[[argparse.Namespace, Settings, Path], int]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cascade-lab",
        description="Numerical laboratory for the NLS energy cascade",
    )
    parser.add_argument("--config", type=Path, help="Experiment config file")
    parser.add_argument("--out", type=Path, help="Artifact directory")
    parser.add_argument(
        "--verbose", "-v", action="store_true", help="Log at DEBUG level"
    )
    commands = parser.add_subparsers(dest="command", required=True)

    toy = commands.add_parser("toy", help="Toy model runs").add_subparsers(
        dest="action", required=True
    )
    p = toy.add_parser("run", help="Integrate the toy model")
    p.add_argument("--N", type=int, help="Number of modes")
    p.add_argument("--state", type=Path, help="Initial state JSON")
    p.add_argument("--j", type=int, default=2, help="Heteroclinic to start on")
    p.add_argument("--start", type=float, default=3.0, help="Time on it")
    p.add_argument("--t1", type=float, default=10.0, help="Integration time")
    p.add_argument("--samples", type=int, default=2048)
    p.set_defaults(handler=cmd_toy_run)

    p = toy.add_parser("hetero", help="Integrated vs closed-form heteroclinic")
    p.add_argument("--N", type=int, help="Number of modes")
    p.add_argument("--j", type=int, default=3, help="Generation of the connection")
    p.add_argument("--t", type=_span, default=(-3.0, 3.0), help="START:END")
    p.add_argument("--minus", action="store_true", help="Use gamma_j^-")
    p.add_argument("--samples", type=int, default=601)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.set_defaults(handler=cmd_toy_hetero)

    lam = commands.add_parser("lambda", help="The resonant set").add_subparsers(
        dest="action", required=True
    )
    p = lam.add_parser("build", help="Construct and verify a Lambda")
    p.add_argument("--N", type=int, help="Number of generations")
    p.add_argument("--gen-size", type=int, help="Points per generation")
    p.add_argument("--radius", type=int, help="Bound on |n|")
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--growth-s", type=float, help="Only accept sets meeting the growth bound"
    )
    p.add_argument("--s", type=float, help="Sobolev exponent of the sums")
    p.set_defaults(handler=cmd_lambda_build)

    p = lam.add_parser("verify", help="Verify a Lambda JSON file")
    p.add_argument("file", type=Path)
    p.add_argument("--closure-radius", type=float)
    p.set_defaults(handler=cmd_lambda_verify)

    p = lam.add_parser("sums", help="Sobolev sums of a Lambda JSON file")
    p.add_argument("file", type=Path)
    p.add_argument("--s", type=float, help="Sobolev exponent")
    p.set_defaults(handler=cmd_lambda_sums)

    cascade = commands.add_parser("cascade", help="Cascade orbits").add_subparsers(
        dest="action", required=True
    )
    p = cascade.add_parser("search", help="Shoot an orbit from T_3 to T_(N-1)")
    _toy_flags(p)
    p.add_argument("--samples", type=int, default=4096)
    p.set_defaults(handler=cmd_cascade_search)

    p = cascade.add_parser("report", help="Diagnostics of a stored initial state")
    p.add_argument("--state", type=Path, required=True)
    p.add_argument("--t1", type=float, required=True, help="Integration time")
    p.add_argument(
        "--last", type=int, help="Saddle the orbit should end at, N-1 by default"
    )
    _toy_flags(p)
    p.add_argument("--samples", type=int, default=4096)
    p.set_defaults(handler=cmd_cascade_report)

    p = cascade.add_parser("cancellation", help="Exit p1 with and without x*")
    p.add_argument("--deltas", type=float, nargs="+")
    p.add_argument("--sigma", type=float)
    p.add_argument("--C", type=float, default=1e-3, help="Offset constant")
    p.add_argument("--N", type=int, default=5, help="Number of modes")
    p.set_defaults(handler=cmd_cascade_cancellation)

    galerkin = commands.add_parser(
        "galerkin", help="Fourier-side experiments"
    ).add_subparsers(dest="action", required=True)
    p = galerkin.add_parser("compare", help="Fourier-side flow vs lifted toy orbit")
    _lift_flags(p)
    p.add_argument("--lambdas", type=float, nargs="+")
    p.add_argument(
        "--flow", choices=["resonant", "truncation", "full"], default="resonant"
    )
    p.set_defaults(handler=cmd_galerkin_compare)

    p = galerkin.add_parser("norms", help="Sobolev norms along a lifted orbit")
    _lift_flags(p)
    p.add_argument("--lam", type=float, default=1.0, help="Rescaling parameter")
    p.add_argument("--s", type=float, help="Sobolev exponent")
    p.set_defaults(handler=cmd_galerkin_norms)

    nf = commands.add_parser("nf", help="Normal form checks").add_subparsers(
        dest="action", required=True
    )
    p = nf.add_parser("check", help="Scaling of the normal-form change")
    p.add_argument("--amplitudes", type=float, nargs="+")
    p.add_argument("--support-size", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_nf_check)

    p = commands.add_parser("sweep", help="Cascade searches on a (delta, N) grid")
    p.add_argument("--deltas", type=float, nargs="+")
    p.add_argument("--ns", type=int, nargs="+")
    p.add_argument("--threads", type=int, help="Worker processes")
    p.add_argument("--time-law", action="store_true", help="Fit T0 vs N ln(1/delta)")
    p.set_defaults(handler=cmd_sweep)
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    tokens = sys.argv[1:] if argv is None else argv
    return build_parser().parse_args(_join_span_flags(tokens))


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    try:
        settings = load_settings(args.config)
    except ValidationError as e:
        print(f"Invalid configuration: {e}", file=sys.stderr)
        return 2
    level = "DEBUG" if args.verbose else settings.log_level
    logging.basicConfig(
        level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s"
    )
    out: Path = _pick(args.out, settings.output_dir)
    handler: Handler = args.handler
    try:
        return handler(args, settings, out)
    except ValidationError as e:
        logger.error(f"Invalid parameters: {e}")
        return 2
    except CascadeLabError as e:
        logger.error(f"{args.command} failed: {e}")
        return 1
    except OSError as e:
        logger.error(f"{args.command}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
