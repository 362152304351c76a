"""Command-line entry point: ``coplan {plan,simulate,sweep,baseline} SCENARIO``.

Exit codes: 0 success, 2 usage, 3 infeasible plan, 4 configuration error.
"""
import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

from .agents import PipelineSpec, evaluate_assignment, initiator_run, place_pipeline
from .errors import ConfigError, PlanInfeasibleError
from .planner import augment_with_transfer, pareto_sweep, plan, plan_even_split
from .scenario import load_scenario

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_CONFIG = 4

log = logging.getLogger("coplan")


def fmt(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def parse_gamma(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "infinity", "time-only", "timeonly"):
        return math.inf
    try:
        v = float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid gamma {text!r}") from None
    if not v >= 0:
        raise argparse.ArgumentTypeError("gamma must be >= 0")
    return v


def parse_gammas(text: str):
    return [parse_gamma(g) for g in text.split(",") if g.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="coplan", description="Plan and simulate collaborative offloading.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("scenario", help="scenario JSON file")
        sp.add_argument("--out-dir", default=".", help="directory for output files (default: .)")
        sp.add_argument("--no-transfer", action="store_true", help="ignore transfer costs when planning")

    sp = sub.add_parser("plan", help="compute the allocation plan, write plan.csv")
    common(sp)
    sp.add_argument("--gamma", type=parse_gamma, help="override the task's gamma (inf = time only)")

    sp = sub.add_parser("simulate", help="replay the scenario, write trace.csv and report.json")
    common(sp)
    sp.add_argument("--seed", type=int, help="override the scenario seed")
    sp.add_argument("--gamma", type=parse_gamma, help="override the task's gamma")

    sp = sub.add_parser("sweep", help="trace the energy/time tradeoff, write pareto.csv")
    common(sp)
    sp.add_argument("--gammas", type=parse_gammas, required=True, help="comma-separated, e.g. 0,0.1,1,inf")

    sp = sub.add_parser("baseline", help="compare the optimal plan with an even split")
    common(sp)
    sp.add_argument("--gamma", type=parse_gamma, help="override the task's gamma")
    return p


def _prepare(args):
    sc = load_scenario(args.scenario)
    if getattr(args, "gamma", None) is not None and sc.task is not None:
        sc = replace(sc, task=replace(sc.task, gamma=args.gamma))
    if getattr(args, "seed", None) is not None:
        sc = replace(sc, seed=args.seed)
    if args.no_transfer:
        sc = replace(sc, options=replace(sc.options, use_transfer_augmentation=False))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return sc, out


def _planning_fleet(sc):
    fleet = list(sc.devices)
    if sc.options.use_transfer_augmentation and len(fleet) > 1:
        return augment_with_transfer(fleet, sc.links)
    return fleet


def _require_task(sc, parallel=False):
    if sc.task is None:
        raise ConfigError("scenario has no task")
    if parallel and isinstance(sc.task, PipelineSpec):
        raise ConfigError("this command needs a divisible (parallel) task")


def cmd_plan(args) -> int:
    sc, out = _prepare(args)
    _require_task(sc)
    if isinstance(sc.task, PipelineSpec):
        pipe = sc.task
        if pipe.placement is not None:
            pl = evaluate_assignment(pipe, sc.devices, sc.links, pipe.placement)
        else:
            pl = place_pipeline(pipe, sc.devices, sc.links)
        print("stage            device")
        for name, dev in zip(pl.stage_names, pl.assignment):
            print(f"{name:<16} {dev}")
        print(f"expected_time={fmt(pl.expected_time)} expected_energy={fmt(pl.expected_energy)} "
              f"objective={fmt(pl.objective)}")
        with open(out / "plan.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["stage", "device"])
            w.writerows(zip(pl.stage_names, pl.assignment))
        return EXIT_OK

    p = plan(sc.task, _planning_fleet(sc))
    _print_plan(p, sc)
    _write_plan_csv(p, sc, out / "plan.csv")
    return EXIT_OK


def _print_plan(p, sc):
    kinds = {d.id: d.kind.value for d in sc.devices}
    print(f"{'device':<10} {'kind':<9} {'x_mb':>12} {'y_mb':>12} {'load_mb':>12}")
    for dev, x, y in zip(p.device_ids, p.shares, p.sensitive_shares):
        print(f"{dev:<10} {kinds[dev]:<9} {fmt(float(x)):>12} {fmt(float(y)):>12} {fmt(float(x + y)):>12}")
    print("x=(" + ", ".join(fmt(float(v)) for v in p.shares) + ")")
    if p.sensitive_shares.any():
        print("y=(" + ", ".join(fmt(float(v)) for v in p.sensitive_shares) + ")")
    print(f"t={fmt(p.completion_time)} energy={fmt(p.energy)} payment={fmt(p.payment)} "
          f"objective={fmt(p.scalarized_objective)} gamma={fmt(p.gamma)}")
    for v in p.violations:
        print(f"violation: {v}")


def _write_plan_csv(p, sc, path):
    devs = {d.id: d for d in sc.devices}
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["device", "kind", "x_mb", "y_mb", "load_mb", "busy_s", "energy_j", "payment"])
        for dev, x, y in zip(p.device_ids, p.shares, p.sensitive_shares):
            d = devs[dev]
            load = float(x + y)
            w.writerow([dev, d.kind.value, fmt(float(x)), fmt(float(y)), fmt(load), fmt(d.f * load),
                        fmt(d.mobile_e * load), fmt(d.c * load)])


def cmd_simulate(args) -> int:
    sc, out = _prepare(args)
    rep = initiator_run(sc)
    rep.trace.write_csv(out / "trace.csv")
    with open(out / "report.json", "w") as fh:
        json.dump(rep.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if rep.status != "ok":
        print(f"infeasible: binding constraint class {rep.binding}", file=sys.stderr)
        return EXIT_INFEASIBLE
    print(f"completion_time={fmt(rep.completion_time)} mobile_energy={fmt(rep.mobile_total_energy)} "
          f"initiator_energy={fmt(rep.initiator_energy)} payment={fmt(rep.total_payment)}")
    if rep.gains is not None:
        g = rep.gains
        print(f"gain_time={fmt(g.gain_time)} gain_energy={fmt(g.gain_energy)} combined_gain={fmt(g.combined_gain)}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    sc, out = _prepare(args)
    _require_task(sc, parallel=True)
    rows = pareto_sweep(sc.task, _planning_fleet(sc), args.gammas)
    with open(out / "pareto.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma", "t", "energy", "payment", "objective"])
        for g, p in rows:
            w.writerow([fmt(g), fmt(p.completion_time), fmt(p.energy), fmt(p.payment), fmt(p.scalarized_objective)])
    for g, p in rows:
        print(f"gamma={fmt(g)} t={fmt(p.completion_time)} energy={fmt(p.energy)} payment={fmt(p.payment)}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    sc, out = _prepare(args)
    _require_task(sc, parallel=True)
    fleet = _planning_fleet(sc)
    even = plan_even_split(sc.task, fleet)
    rows = [("even_split", even)]
    try:
        rows.insert(0, ("optimal", plan(sc.task, fleet)))
    except PlanInfeasibleError as exc:
        print(f"optimal plan infeasible ({exc.binding}); reporting the even split only", file=sys.stderr)
    with open(out / "baseline.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["strategy", "t", "energy", "payment", "objective", "violations"])
        for name, p in rows:
            w.writerow([name, fmt(p.completion_time), fmt(p.energy), fmt(p.payment),
                        fmt(p.scalarized_objective), ";".join(p.violations)])
    for name, p in rows:
        print(f"{name:<11} t={fmt(p.completion_time)} energy={fmt(p.energy)} payment={fmt(p.payment)}"
              + (f" violations={';'.join(p.violations)}" if p.violations else ""))
    return EXIT_OK


COMMANDS = {"plan": cmd_plan, "simulate": cmd_simulate, "sweep": cmd_sweep, "baseline": cmd_baseline}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except PlanInfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
