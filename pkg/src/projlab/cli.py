"""Command line front end: ``projlab {validate,angles,criteria,run} scenario.json``.

Exit codes: 0 success / all hypotheses pass, 1 runtime or input error,
2 a hypothesis or envelope check fails, 3 divergence.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .angle import angle_table, friedrichs_table
from .criteria import evaluate_criteria, random_params
from .engine import make_schedule, product_envelope, run_averaged, run_product
from .errors import (
    CompatibilityError,
    ConsistencyError,
    DivergenceError,
    InapplicableError,
    NonConvergenceError,
    ProjlabError,
)
from .normed_space import operator_norm_upper
from .scenario import load_scenario

EXIT_OK, EXIT_ERROR, EXIT_FAIL, EXIT_DIVERGED = 0, 1, 2, 3


def _out_dir(args, scenario) -> Path:
    out = Path(args.out or scenario.output.get("dir") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _beta(scenario, family) -> float:
    bound = family.norm_bound
    if scenario.beta is None:
        return bound
    if scenario.beta < bound * (1 - 1e-12):
        raise ProjlabError(f"beta = {scenario.beta} is below the certified projector norm bound {bound:.12g}")
    return scenario.beta


def _report(scenario, family):
    table = angle_table(family)
    sch = scenario.schedule
    return evaluate_criteria(
        table,
        _beta(scenario, family),
        scenario.requested_criteria(),
        alphas=scenario.alphas,
        weakly_consistent=family.consistency is not None,
        q=scenario.q,
        m=sch.get("m"),
        mu=sch.get("mu"),
        lam=scenario.lam,
    )


def cmd_validate(args) -> int:
    scenario = load_scenario(args.scenario)
    family = scenario.build_family(pairs=False)
    make_schedule(scenario.schedule_spec(), family.n)
    print(f"ok: {family.n} projectors in dim {family.space.dim}, schedule {scenario.schedule['kind']}")
    return EXIT_OK


def cmd_angles(args) -> int:
    scenario = load_scenario(args.scenario)
    family = scenario.build_family()
    table = angle_table(family)
    fried = None
    if family.space.is_hilbert and all(np.allclose(P.matrix, P.matrix.T, atol=1e-12) for P in family.projectors):
        fried = friedrichs_table(family)
    path = _out_dir(args, scenario) / "angles.csv"
    table.write_csv(path, fried)
    for j, k, lo, up, ex in table.rows():
        print(f"({j + 1},{k + 1}) cos in [{lo:.10g}, {up:.10g}]{'' if ex else ' (bounds)'}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_criteria(args) -> int:
    scenario = load_scenario(args.scenario)
    family = scenario.build_family()
    rep = _report(scenario, family)
    out = _out_dir(args, scenario)
    rep.write_json(out / "criteria.json")
    rep.write_csv(out / "criteria.csv")
    for name, h in rep.hypotheses.items():
        nums = " ".join(f"{k}={v:.6g}" for k, v in (("rate", h.rate), ("C", h.C), ("gamma", h.gamma)) if v is not None)
        print(f"{name},{'pass' if h.passed else 'fail'}{': ' + h.reason if h.reason else ''} {nums}".rstrip())
    return EXIT_OK if rep.all_passed else EXIT_FAIL


def _run_once(scenario, seed=None):
    family = scenario.build_family()
    spec = scenario.schedule_spec(seed=seed)
    schedule = make_schedule(spec, family.n)
    if schedule.kind == "averaged":
        return run_averaged(family, spec.steps, alphas=scenario.alphas, beta=_beta(scenario, family))
    if family.limit is None:
        raise ConsistencyError("family is not certified weakly consistent; product limit unknown")
    beta = _beta(scenario, family)
    kind = schedule.kind
    lam = None
    envelope = None
    rep = evaluate_criteria(angle_table(family), beta, [kind], weakly_consistent=True, q=scenario.q,
                            m=schedule.m, mu=None if schedule.mu is None else list(schedule.mu), lam=scenario.lam)
    hyp = rep.hypotheses[kind]
    if kind == "random":
        rp = random_params(beta, family.n, schedule.mu, scenario.lam)
        lam, q = rp.lam, rp.q
    else:
        q = scenario.q
    if hyp.passed:
        nIP = operator_norm_upper(np.eye(family.space.dim) - family.limit.entries, family.space)
        try:
            envelope = product_envelope(schedule, beta, q, lam, nIP)
        except InapplicableError:
            envelope = None
    trace = run_product(family, schedule, envelope, lam=lam)
    trace.info.update(criterion=kind, passed=hyp.passed, reason=hyp.reason, q=q, lam=lam, seed=schedule.seed)
    return trace


def _sweep_worker(job):
    path, seed = job
    return seed, _run_once(load_scenario(path), seed)


def _summary(trace, label=""):
    parts = [f"final deviation {trace.final_deviation:.6g}", f"violations {trace.violations}"]
    if trace.kind == "random":
        parts.append(f"k_tau {trace.k_tau if trace.k_tau is not None else 'not reached'}")
    if trace.info.get("passed") is False:
        parts.append(f"no envelope ({trace.info.get('reason')})")
    print(f"{label}{trace.kind}: " + ", ".join(parts))


def cmd_run(args) -> int:
    scenario = load_scenario(args.scenario)
    out = _out_dir(args, scenario)
    svg = args.svg or bool(scenario.output.get("svg"))
    if args.seeds:
        seeds = [int(s) for s in args.seeds.split(",")]
        jobs = [(args.scenario, s) for s in seeds]
        if args.jobs > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(_sweep_worker, jobs))
        else:
            results = [_sweep_worker(j) for j in jobs]
        results.sort(key=lambda t: seeds.index(t[0]))
        total = 0
        for seed, trace in results:
            trace.write_csv(out / f"trace_seed{seed}.csv")
            if svg:
                trace.write_svg(out / f"trace_seed{seed}.svg")
            _summary(trace, f"seed {seed}: ")
            total += trace.violations
        return EXIT_FAIL if total else EXIT_OK
    trace = _run_once(scenario)
    trace.write_csv(out / "trace.csv")
    if svg:
        trace.write_svg(out / "trace.svg")
    _summary(trace)
    return EXIT_FAIL if trace.violations else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="projlab", description="Angle criteria for products of projections")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func, helptext in (
        ("validate", cmd_validate, "check a scenario file"),
        ("angles", cmd_angles, "write the pair cosine table"),
        ("criteria", cmd_criteria, "evaluate the convergence criteria"),
        ("run", cmd_run, "run the schedule and compare with the envelope"),
    ):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("scenario")
        p.add_argument("--out", default=None, help="output directory")
        p.set_defaults(func=func)
        if name == "run":
            p.add_argument("--svg", action="store_true", help="also write an SVG chart")
            p.add_argument("--seeds", default=None, help="comma-separated seeds for a sweep")
            p.add_argument("--jobs", type=int, default=1, help="worker processes for seed sweeps")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CompatibilityError, ConsistencyError) as exc:
        print(f"fail: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (DivergenceError, NonConvergenceError) as exc:
        print(f"diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except ProjlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # noqa: BLE001 - any other failure is a runtime error
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
