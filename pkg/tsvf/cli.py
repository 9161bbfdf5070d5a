# tsvf/cli.py
import argparse
import json
import logging
import os
import sys

from tsvf.config import Config
from tsvf.errors import ConfigError, NullEnsembleError, OrthogonalSelectionError, ProblemFileError, TsvfError
from tsvf.measure import (
    PointerConfig,
    bump_masses,
    is_strong_regime,
    monte_carlo_abl,
    weak_measure_pointer,
    write_pointer_csv,
)
from tsvf.problem import dump_problem, load_problem, problem_from_scenario, save_problem
from tsvf.scenarios import SCENARIOS, build_scenario, run_scenario, to_plain
from tsvf.tsv import (
    abl_at_time,
    abl_probabilities,
    abl_probabilities_generalized,
    same_outcome_probability,
    two_time_distribution,
    weak_value_any,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2
EXIT_NULL_ENSEMBLE = 3
EXIT_NO_SAMPLES = 4


def _setup_logging():
    log_level = os.getenv("LOG_LEVEL", "INFO").upper()
    logging.basicConfig(
        level=getattr(logging, log_level, logging.INFO),
        format="%(asctime)s %(levelname)s %(message)s",
        stream=sys.stderr,
    )


def _num(x: float) -> str:
    # tabelweergave: 12 decimalen, geen -0.0
    return repr(round(float(x), 12) + 0.0)


def _label(o: float) -> str:
    return f"{round(float(o), 9) + 0.0:g}"


def _complex_text(z: complex) -> str:
    sign = "-" if round(z.imag, 12) < 0 else "+"
    return f"{_num(z.real)} {sign} {_num(abs(z.imag))}i"


def _emit(args, lines, doc):
    if args.format == "json":
        print(json.dumps(to_plain(doc), indent=2))
    else:
        for line in lines:
            print(line)


def cmd_run(args, cfg) -> int:
    names = list(SCENARIOS) if args.scenario == "all" else [args.scenario]
    if names[0] not in SCENARIOS:
        print(f"unknown scenario {args.scenario!r}; known: {', '.join(SCENARIOS)}, all", file=sys.stderr)
        return EXIT_USAGE

    reports = [run_scenario(build_scenario(name, cfg)) for name in names]
    passed = all(r.passed for r in reports)

    lines = []
    for report in reports:
        lines.append(f"scenario {report.scenario}: {'PASS' if report.passed else 'FAIL'}")
        for r in report.results:
            lines.append(
                f"  {'ok  ' if r.passed else 'FAIL'} [{r.provenance.value:<9}] {r.description}"
                f" | expected {to_plain(r.expected)} actual {to_plain(r.actual)}"
            )
    _emit(args, lines, {"passed": passed, "reports": [r.as_dict() for r in reports]})
    return EXIT_OK if passed else EXIT_FAILED


def cmd_abl(args, cfg) -> int:
    problem = load_problem(args.file)
    obs = problem.observable(args.observable, cfg.degeneracy_tol)
    if args.time is not None:
        if problem.mode != "pair" or problem.schedule is None:
            raise ProblemFileError("--time needs a pre/post problem with a hamiltonian")
        dist = abl_at_time(problem.pre, problem.post, problem.schedule, args.time, obs)
    elif problem.mode == "kernel":
        return _kernel_abl(args, cfg, problem, obs)
    elif problem.mode == "generalized":
        dist = abl_probabilities_generalized(problem.generalized, obs)
    else:
        dist = abl_probabilities(problem.selection(), obs)
    if args.observable_b is not None:
        raise ProblemFileError("--observable-b only applies to a two-time kernel problem")

    lines = [f"{_label(o)}: {_num(p)}" for o, p in dist.entries]
    _emit(args, lines, {"observable": args.observable, "time": args.time, "distribution": dist.entries})
    return EXIT_OK


def _kernel_abl(args, cfg, problem, obs_a) -> int:
    name_b = args.observable_b or args.observable
    obs_b = problem.observable(name_b, cfg.degeneracy_tol)
    table = two_time_distribution(problem.kernel, obs_a, obs_b)
    same = same_outcome_probability(problem.kernel, obs_a, obs_b)

    lines = [f"{_label(a)}, {_label(b)}: {_num(p)}" for (a, b), p in table.items()]
    lines.append(f"same outcome: {_num(same)}")
    _emit(args, lines, {
        "observable": args.observable,
        "observable_b": name_b,
        "joint": [[a, b, p] for (a, b), p in table.items()],
        "same_outcome": same,
    })
    return EXIT_OK


def cmd_weak(args, cfg) -> int:
    problem = load_problem(args.file)
    op = problem.observable(args.observable, cfg.degeneracy_tol).op
    w = weak_value_any(problem.selection(), op, cfg.orthogonality_tol)
    _emit(args, [_complex_text(w)], {"observable": args.observable, "weak_value": w})
    return EXIT_OK


def cmd_verify(args, cfg) -> int:
    problem = load_problem(args.file)
    if problem.mode != "pair":
        raise ProblemFileError("verify needs a pre/post problem")
    obs = problem.observable(args.observable, cfg.degeneracy_tol)
    samples = args.samples if args.samples is not None else cfg.mc_samples
    seed = args.seed if args.seed is not None else cfg.mc_seed
    workers = args.workers if args.workers is not None else cfg.mc_workers
    if samples < 1:
        raise ProblemFileError("--samples must be >= 1")
    if workers < 1:
        raise ProblemFileError("--workers must be >= 1")

    report = monte_carlo_abl(problem.pre, problem.post, obs, samples, seed, workers)
    if report.samples_postselected == 0:
        print(f"no post-selected samples out of {samples}", file=sys.stderr)
        return EXIT_NO_SAMPLES

    dist = abl_probabilities(problem.selection(), obs)
    z = report.z_scores(dist)
    rows = []
    lines = [f"post-selected {report.samples_postselected} of {report.samples_total} (seed {seed}, workers {workers})",
             f"{'outcome':>10} {'abl':>14} {'frequency':>14} {'std err':>12} {'z':>8}"]
    for o in dist.outcomes:
        f = report.frequency(o)
        se = report.standard_errors[o]
        rows.append({"outcome": o, "abl": dist.probability(o), "frequency": f, "standard_error": se, "z": z[o]})
        lines.append(f"{_label(o):>10} {dist.probability(o):>14.10f} {f:>14.10f} {se:>12.3e} {z[o]:>8.3f}")

    ok = all(abs(v) <= cfg.z_threshold for v in z.values())
    _emit(args, lines, {
        "samples_total": report.samples_total,
        "samples_postselected": report.samples_postselected,
        "seed": seed,
        "workers": workers,
        "outcomes": rows,
        "passed": ok,
    })
    return EXIT_OK if ok else EXIT_FAILED


def cmd_pointer(args, cfg) -> int:
    problem = load_problem(args.file)
    obs = problem.observable(args.observable, cfg.degeneracy_tol)
    selection = problem.selection()
    g = args.g if args.g is not None else cfg.pointer_g
    sigma = args.sigma if args.sigma is not None else cfg.pointer_sigma

    if args.points is not None or args.half_range is not None:
        auto = PointerConfig.auto(g, sigma, obs.eigenvalues, cfg.half_range_factor, cfg.min_points, cfg.points_per_sigma)
        pcfg = PointerConfig(
            g=g,
            sigma=sigma,
            half_range=args.half_range if args.half_range is not None else auto.half_range,
            points=args.points if args.points is not None else auto.points,
        )
    else:
        pcfg = PointerConfig.auto(g, sigma, obs.eigenvalues, cfg.half_range_factor, cfg.min_points, cfg.points_per_sigma)

    result = weak_measure_pointer(selection, obs, pcfg)
    if args.out:
        write_pointer_csv(result, args.out)
        log.info("pointer density written to %s (%d points)", args.out, pcfg.points)

    w = weak_value_any(selection, obs.op, cfg.orthogonality_tol)
    doc = {
        "g": g,
        "sigma": sigma,
        "points": pcfg.points,
        "half_range": pcfg.half_range,
        "mean_shift": result.mean_shift,
        "mean_shift_over_g": result.mean_shift / g,
        "weak_value_real": w.real,
        "postselection_rate": result.postselection_rate,
    }
    lines = [
        f"mean_shift         {result.mean_shift!r}",
        f"mean_shift / g     {result.mean_shift / g!r}",
        f"Re(O_w)            {w.real!r}",
        f"postselection rate {result.postselection_rate!r}",
    ]
    if len(obs.eigenvalues) > 1 and is_strong_regime(pcfg, obs):
        masses = bump_masses(result, obs)
        dist = (
            abl_probabilities_generalized(selection, obs)
            if problem.mode == "generalized"
            else abl_probabilities(selection, obs)
        )
        lines.append("strong regime: bump masses vs ABL")
        for o, m in masses.items():
            lines.append(f"  {_label(o)}: mass {m:.12f}  abl {dist.probability(o):.12f}")
        doc["strong_regime"] = {
            "bump_masses": masses,
            "abl": dist.as_dict(),
            "max_difference": max(abs(m - dist.probability(o)) for o, m in masses.items()),
        }
    _emit(args, lines, doc)
    return EXIT_OK


def cmd_export(args, cfg) -> int:
    if args.scenario not in SCENARIOS:
        print(f"unknown scenario {args.scenario!r}; known: {', '.join(SCENARIOS)}", file=sys.stderr)
        return EXIT_USAGE
    problem = problem_from_scenario(build_scenario(args.scenario, cfg), args.outcome - 1)
    if args.out:
        save_problem(problem, args.out)
        log.info("scenario %s written to %s", args.scenario, args.out)
    else:
        print(json.dumps(dump_problem(problem), indent=1))
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tsvf", description="Pre- and post-selected quantum systems.")
    parser.add_argument("--config", help="YAML config (default: $TSVF_CONFIG or config/config.yaml)")

    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("table", "json"), default=None)

    problem = argparse.ArgumentParser(add_help=False)
    problem.add_argument("--file", required=True, help="problem file (JSON)")
    problem.add_argument("--observable", required=True, help="observable name in the problem file")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[fmt], help="run a scenario and its checks")
    p.add_argument("scenario", help=f"one of {', '.join(SCENARIOS)}, or all")
    p.set_defaults(handler=cmd_run)

    p = sub.add_parser("abl", parents=[fmt, problem], help="ABL probabilities")
    p.add_argument("--time", type=float, default=None)
    p.add_argument("--observable-b", default=None, help="particle B observable of a kernel problem (default: --observable)")
    p.set_defaults(handler=cmd_abl)

    p = sub.add_parser("weak", parents=[fmt, problem], help="weak value")
    p.set_defaults(handler=cmd_weak)

    p = sub.add_parser("verify", parents=[fmt, problem], help="Monte Carlo vs ABL")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("pointer", parents=[fmt, problem], help="Gaussian pointer simulation")
    p.add_argument("--g", type=float, default=None)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--half-range", type=float, default=None)
    p.add_argument("--out", default=None, help="CSV path (position, density)")
    p.set_defaults(handler=cmd_pointer)

    p = sub.add_parser("export-scenario", help="write a scenario as a problem file")
    p.add_argument("scenario")
    p.add_argument("--outcome", type=int, default=1, help="post-selection outcome (mean-king)")
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_export)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _setup_logging()

    try:
        cfg = Config.load(args.config)
    except ConfigError as exc:
        print(f"config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if getattr(args, "format", None) is None:
        args.format = cfg.output_format

    try:
        return args.handler(args, cfg)
    except (NullEnsembleError, OrthogonalSelectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NULL_ENSEMBLE
    except TsvfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
