"""Command-line front end.

Commands: synth (find stateful priorities and emit the rewritten network),
check (bounded reachability with witness), transform (apply a priorities
file), simulate (random or exhaustive bounded traces), export (DOT or the
SMT-LIB2 unfolding).

Exit codes: 0 success, 1 synthesis finished without a usable result
(circularity, exhausted bound, initial state is the error), 2 usage, IO, or
solver failure.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .model import Network, StateFormula, state_satisfies
from .parser import (
    ParseError,
    format_expr,
    format_value,
    parse_network,
    parse_query,
    print_network,
)
from .encoder import Encoder, emit_script, step_name
from .semantics import (
    DomainBounds,
    bfs_reach,
    format_trace_line,
    initial_state,
    is_deadlock,
    successors,
)
from .solver import SolverConfig, SolverUnavailable, find_solver, solve
from .synthesis import (
    SynthesisError,
    load_priorities,
    reachability_bound,
    report_to_json,
    synthesize,
)
from .transform import TransformError, transform_network


@dataclass
class RunConfig:
    model: Path
    query: Optional[Path] = None
    max_steps: int = 15
    solver: Optional[str] = None
    solver_args: tuple[str, ...] = ()
    timeout: float = 60.0
    bounds: Optional[tuple[int, int]] = None
    out: Path = Path(".")
    seed: Optional[int] = None
    keep_scripts: Optional[str] = None


class CliError(Exception):
    def __init__(self, message: str, code: int = 2):
        super().__init__(message)
        self.code = code


def _load_model(cfg: RunConfig) -> Network:
    try:
        return parse_network(cfg.model.read_text(), file=str(cfg.model))
    except OSError as exc:
        raise CliError(f"cannot read model: {exc}")
    except ParseError as exc:
        raise CliError(f"model error: {exc}")


def _load_query(cfg: RunConfig, net: Network) -> StateFormula:
    if cfg.query is None:
        raise CliError("a --query file is required for this command")
    try:
        return parse_query(cfg.query.read_text(), net=net, file=str(cfg.query))
    except OSError as exc:
        raise CliError(f"cannot read query: {exc}")
    except ParseError as exc:
        raise CliError(f"query error: {exc}")


def _solver_config(cfg: RunConfig) -> SolverConfig:
    binary = cfg.solver or find_solver()
    if binary is None:
        raise CliError(
            "no SMT solver found: install z3, set $PRIOSYNTH_SOLVER, "
            "or run `npm install` under tools/"
        )
    return SolverConfig(
        binary=binary,
        args=cfg.solver_args,
        timeout=cfg.timeout,
        keep_scripts=cfg.keep_scripts,
    )


def _domain_bounds(cfg: RunConfig) -> Optional[DomainBounds]:
    if cfg.bounds is None:
        return None
    return DomainBounds.uniform(*cfg.bounds)


# ---------------------------------------------------------------------------
# synth


def cmd_synth(cfg: RunConfig) -> int:
    net = _load_model(cfg)
    f = _load_query(cfg, net)
    solver = _solver_config(cfg)
    try:
        report = synthesize(net, f, cfg.max_steps, solver=solver)
    except (SynthesisError, SolverUnavailable) as exc:
        raise CliError(f"synthesis failed: {exc}")

    print(f"outcome: {report.outcome}")
    print(f"solver calls: {report.stats.solver_calls} "
          f"(sat {report.stats.sat}, unsat {report.stats.unsat})")
    for sp in sorted(
        report.stateful,
        key=lambda s: (s.pre.snapshot(), s.prio.blockee, s.prio.blocker),
    ):
        print(f"  priority: block '{sp.prio.blockee}' in favour of "
              f"'{sp.prio.blocker}' at {sp.pre.describe()}")
    if report.circular_pair is not None:
        a, b = report.circular_pair
        print(f"  circular pair: ({a.prio.blockee},{a.prio.blocker}) vs "
              f"({b.prio.blockee},{b.prio.blocker}) at {a.pre.describe()}",
              file=sys.stderr)

    cfg.out.mkdir(parents=True, exist_ok=True)
    stem = cfg.model.stem
    report_path = cfg.out / f"{stem}.report.json"
    with open(report_path, "w") as fh:
        json.dump(report_to_json(report, net), fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"report written to {report_path}")

    if report.outcome == "priorities-found":
        outcome = transform_network(net, report.stateful)
        net_path = cfg.out / f"{stem}.rho.net"
        net_path.write_text(print_network(outcome.transformed))
        print(f"transformed network written to {net_path}")
        bound = reachability_bound(net, f, report, bounds=_domain_bounds(cfg))
        if bound is None:
            print("state-count bound: unknown (domain-bounded)")
        else:
            print(f"state-count bound for the transformed network: {bound}")
        return 0
    if report.outcome == "error-unreachable":
        print(f"error unreachable up to bound {cfg.max_steps}")
        return 0
    return 1


# ---------------------------------------------------------------------------
# check


def _witness_from_model(net: Network, values, depth: int) -> list[str]:
    """Per-step trace lines from a BMC model, skipping idle (stutter) steps."""
    lines = []
    prev = None
    idx = 0
    for i in range(depth + 1):
        locs = []
        for a in net.automata:
            code = values.get(step_name(a.name, i))
            locs.append(a.locations[code] if isinstance(code, int) else "?")
        vals = ",".join(
            f"{v.name}={format_value(values.get(step_name(v.name, i), 0))}"
            for v in net.variables
        )
        fired = [a for a in net.actions if values.get(step_name(a, i - 1)) is True]
        action = fired[0] if i > 0 and fired else None
        snap = (tuple(locs), vals)
        if i > 0 and action is None and snap == prev:
            continue  # idle step
        label = action if action else "<init>"
        lines.append(f"step {idx}: {label} -> ({', '.join(locs)}) {{{vals}}}")
        idx += 1
        prev = snap
    return lines


def cmd_check(cfg: RunConfig) -> int:
    net = _load_model(cfg)
    f = _load_query(cfg, net)
    solver = _solver_config(cfg)
    if state_satisfies(initial_state(net), f, net):
        print("reachable at depth 0")
        print(format_trace_line(0, None, initial_state(net), net))
        return 0
    enc = Encoder(net, cfg.max_steps)
    base = enc.unfolding()
    for d in range(1, cfg.max_steps + 1):
        script = emit_script(base.with_extra(enc.formula_at(f.literals, d)))
        verdict = solve(script, solver)
        if verdict.status == "unsat":
            print(f"depth {d}: unsat")
            continue
        if verdict.status != "sat":
            raise CliError(f"solver returned {verdict.status}")
        print(f"reachable at depth {d}")
        for line in _witness_from_model(net, verdict.model.values, d):
            print(line)
        return 0
    print(f"unreachable up to depth {cfg.max_steps}")
    return 0


# ---------------------------------------------------------------------------
# transform


def cmd_transform(cfg: RunConfig, priorities: Path) -> int:
    net = _load_model(cfg)
    try:
        sp = load_priorities(str(priorities), net)
    except OSError as exc:
        raise CliError(f"cannot read priorities: {exc}")
    except (SynthesisError, json.JSONDecodeError) as exc:
        raise CliError(f"priorities file rejected: {exc}")
    try:
        outcome = transform_network(net, sp)
    except TransformError as exc:
        raise CliError(f"transform failed: {exc}")

    cfg.out.mkdir(parents=True, exist_ok=True)
    stem = cfg.model.stem
    net_path = cfg.out / f"{stem}.rho.net"
    net_path.write_text(print_network(outcome.transformed))
    print(f"transformed network written to {net_path}")
    if not sp:
        print("no priorities: network copied unchanged")
        return 0
    edits_path = cfg.out / f"{stem}.edits.txt"
    with open(edits_path, "w") as fh:
        for edit in outcome.guard_edits:
            fh.write(
                f"{edit.automaton} edge {edit.edge_index}: "
                f"{format_expr(edit.old_guard)} => {format_expr(edit.new_guard)} "
                f"(rules {','.join(map(str, edit.cases))})\n"
            )
    print(f"{len(outcome.guard_edits)} guard edits written to {edits_path}")
    return 0


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(cfg: RunConfig, depth: int, exhaustive: bool) -> int:
    net = _load_model(cfg)
    f = None
    if cfg.query is not None:
        f = _load_query(cfg, net)
    bounds = _domain_bounds(cfg) or DomainBounds()
    hits = 0
    deadlocks = 0
    if exhaustive:
        reach = bfs_reach(net, depth, bounds)
        for s in sorted(reach.states, key=lambda s: (reach.depth[s], s.locs, s.vals)):
            flags = []
            if f is not None and state_satisfies(s, f, net):
                flags.append("ERROR")
                hits += 1
            if is_deadlock(net, s):
                flags.append("DEADLOCK")
                deadlocks += 1
            suffix = f"  [{' '.join(flags)}]" if flags else ""
            print(format_trace_line(reach.depth[s], None, s, net) + suffix)
        print(f"{len(reach.states)} states within depth {depth}; "
              f"{hits} error hits, {deadlocks} deadlocks"
              + (f"; {reach.pruned} pruned by bounds" if reach.pruned else ""))
    else:
        rng = random.Random(cfg.seed)
        print(f"seed: {cfg.seed}")
        s = initial_state(net)
        print(format_trace_line(0, None, s, net))
        for i in range(1, depth + 1):
            nxt = [t for t in successors(net, s) if bounds.admits(net, t.target)]
            if not nxt:
                print(f"step {i}: deadlock")
                deadlocks += 1
                break
            t = rng.choice(nxt)
            s = t.target
            suffix = ""
            if f is not None and state_satisfies(s, f, net):
                suffix = "  [ERROR]"
                hits += 1
            print(format_trace_line(i, t.action, s, net) + suffix)
        print(f"{hits} error hits, {deadlocks} deadlocks")
    return 0


# ---------------------------------------------------------------------------
# export


def _dot(net: Network) -> str:
    lines = []
    for a in net.automata:
        lines.append(f"digraph {a.name} {{")
        lines.append("  rankdir=LR;")
        for loc in a.locations:
            shape = "doublecircle" if loc == a.initial else "circle"
            lines.append(f'  "{loc}" [shape={shape}];')
        for e in a.edges:
            label = e.action
            guard = format_expr(e.guard)
            if guard != "true":
                label += f" [{guard}]"
            if e.updates:
                ups = ", ".join(
                    f"{u.target} := {format_expr(u.expr)}" for u in e.updates
                )
                label += f" / {ups}"
            lines.append(f'  "{e.source}" -> "{e.target}" [label="{label}"];')
        lines.append("}")
    return "\n".join(lines) + "\n"


def cmd_export(cfg: RunConfig, fmt: str, target: Optional[Path]) -> int:
    net = _load_model(cfg)
    if fmt == "dot":
        text = _dot(net)
    elif fmt == "smt2":
        text = emit_script(Encoder(net, cfg.max_steps).unfolding())
    else:
        raise CliError(f"unknown export format '{fmt}'")
    if target is None:
        sys.stdout.write(text)
    else:
        target.write_text(text)
        print(f"written to {target}")
    return 0


# ---------------------------------------------------------------------------
# argument plumbing


def _parse_bounds(text: str) -> tuple[int, int]:
    try:
        lo, hi = text.split(":")
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError("bounds must look like lo:hi")
    if lo_i > hi_i:
        raise argparse.ArgumentTypeError("bounds lower end exceeds upper end")
    return lo_i, hi_i


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--model", required=True, type=Path, help="network file")
    parser.add_argument("--query", type=Path, help="reachability query file")
    parser.add_argument("--max", type=int, default=15, dest="max_steps",
                        help="unfolding bound (default 15)")
    parser.add_argument("--solver", help="SMT solver binary")
    parser.add_argument("--solver-arg", action="append", default=[],
                        help="extra solver argument (repeatable)")
    parser.add_argument("--timeout", type=float, default=60.0,
                        help="per-call solver timeout in seconds")
    parser.add_argument("--bounds", type=_parse_bounds,
                        help="variable domain bounds lo:hi for oracle runs")
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="output directory")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--keep-scripts",
                        help="directory to keep every emitted solver script")


def _runconfig(ns: argparse.Namespace) -> RunConfig:
    if ns.max_steps < 1:
        raise CliError("--max must be at least 1")
    return RunConfig(
        model=ns.model,
        query=ns.query,
        max_steps=ns.max_steps,
        solver=ns.solver,
        solver_args=tuple(ns.solver_arg),
        timeout=ns.timeout,
        bounds=ns.bounds,
        out=ns.out,
        seed=ns.seed,
        keep_scripts=ns.keep_scripts,
    )


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="priosynth",
        description="Synthesize stateful priorities that steer a network of "
        "automata away from an error state.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize priorities and rewrite the network")
    _common(p)

    p = sub.add_parser("check", help="bounded reachability check with witness")
    _common(p)

    p = sub.add_parser("transform", help="apply a priorities file to a network")
    _common(p)
    p.add_argument("--priorities", required=True, type=Path,
                   help="structured report from `synth`")

    p = sub.add_parser("simulate", help="random or exhaustive bounded traces")
    _common(p)
    p.add_argument("--depth", type=int, default=10, help="trace depth")
    p.add_argument("--exhaustive", action="store_true",
                   help="enumerate all states instead of one random trace")

    p = sub.add_parser("export", help="emit DOT graphs or the solver script")
    _common(p)
    p.add_argument("--format", required=True, choices=["dot", "smt2"])
    p.add_argument("--target", type=Path, help="output file (default stdout)")

    ns = parser.parse_args(argv)
    try:
        cfg = _runconfig(ns)
        if ns.command == "synth":
            return cmd_synth(cfg)
        if ns.command == "check":
            return cmd_check(cfg)
        if ns.command == "transform":
            return cmd_transform(cfg, ns.priorities)
        if ns.command == "simulate":
            return cmd_simulate(cfg, ns.depth, ns.exhaustive)
        if ns.command == "export":
            return cmd_export(cfg, ns.format, ns.target)
        raise CliError(f"unknown command '{ns.command}'")
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SolverUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
