"""Stateful-priority synthesis driver.

Given a network and a reachability query, repeatedly asks the solver for
reachable preError configurations (states one transition away from the error)
and, for each, for alternative actions that avoid the error.  Every
(preError, blockee, blocker) triple found becomes a stateful priority.
PreErrors that admit no priority are treated as errors themselves and
explored recursively.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .model import (
    Configuration,
    ModelError,
    Network,
    Priority,
    StateFormula,
    StatefulPriority,
    Value,
    VarType,
)
from .encoder import Encoder, UnfoldingFormula, emit_script, step_name
from .semantics import action_reaches_config, initial_state, state_of_config
from .solver import SolverConfig, create_config, solve

SCHEMA_VERSION = 1


class SynthesisError(ModelError):
    pass


@dataclass
class SynthesisStats:
    solver_calls: int = 0
    sat: int = 0
    unsat: int = 0
    max_recursion: int = 0

    def as_dict(self) -> dict:
        return {
            "solver_calls": self.solver_calls,
            "sat": self.sat,
            "unsat": self.unsat,
            "max_recursion": self.max_recursion,
        }


@dataclass
class SynthesisState:
    net: Network
    encoder: Encoder
    base: UnfoldingFormula
    solver: SolverConfig
    max_steps: int
    errors: list[Configuration] = field(default_factory=list)
    stateful: set[StatefulPriority] = field(default_factory=set)
    stats: SynthesisStats = field(default_factory=SynthesisStats)
    circular_pair: Optional[tuple[StatefulPriority, StatefulPriority]] = None
    initial_hit: bool = False
    top_preerrors: list[Configuration] = field(default_factory=list)


@dataclass
class SynthesisReport:
    outcome: str  # priorities-found | error-unreachable | initial-is-error
    #             | circularity-abort | bound-exhausted
    stateful: frozenset[StatefulPriority]
    errors: tuple[Configuration, ...]
    max_steps: int
    stats: SynthesisStats
    circular_pair: Optional[tuple[StatefulPriority, StatefulPriority]] = None


def _solve(state: SynthesisState, formula: UnfoldingFormula):
    verdict = solve(emit_script(formula), state.solver)
    state.stats.solver_calls += 1
    if verdict.status == "sat":
        state.stats.sat += 1
    elif verdict.status == "unsat":
        state.stats.unsat += 1
    else:
        raise SynthesisError(
            f"solver returned {verdict.status}: {verdict.stderr.strip()[:200]}"
        )
    return verdict


def error_config(f: StateFormula, net: Network) -> Configuration:
    """Error configuration from a conjunction of positive location literals."""
    loc: dict[str, str] = {}
    for lit in f.literals:
        if lit.negated:
            raise SynthesisError(
                "synthesis queries must use positive location literals only"
            )
        prev = loc.get(lit.automaton)
        if prev is not None and prev != lit.location:
            raise SynthesisError(
                f"query pins '{lit.automaton}' to both '{prev}' and '{lit.location}'"
            )
        loc[lit.automaton] = lit.location
    if not loc:
        raise SynthesisError("empty query")
    return Configuration.make(loc=loc)


def check_reach(
    state: SynthesisState,
    pre_errors: Iterable[Configuration],
    err: Configuration,
    step: int,
) -> set[Configuration]:
    """One reachability probe: is ``err`` reachable at step+1 through a step-
    ``step`` state distinct from everything already found?  Returns at most
    one new preError configuration."""
    enc = state.encoder
    parts = [enc.progress(step)]
    for c in list(pre_errors) + state.errors:
        parts.append(enc.avoid(step, c))
    parts.append(enc.query(step, err))
    verdict = _solve(state, state.base.with_extra(*parts))
    if verdict.status != "sat":
        return set()
    cfg = create_config(verdict.model, step, state.net, parts=("loc", "var"))
    return {cfg}


def _blocker_of(cfg: Configuration) -> str:
    fired = [a for a, v in cfg.act if v]
    if len(fired) != 1:
        raise SynthesisError(
            f"expected exactly one fired action in model, got {fired!r}"
        )
    return fired[0]


def create_prio(
    pre: Configuration,
    avoid_cfg: Configuration,
    errors: Iterable[Configuration],
    net: Network,
    blockee: str,
) -> Priority:
    """Pair an error-reaching action from ``pre`` with the error-avoiding
    action the solver picked; reflexive pairs are rejected."""
    blocker = _blocker_of(avoid_cfg)
    if blockee == blocker:
        raise SynthesisError(f"reflexive priority ({blockee}, {blocker})")
    if not action_reaches_config(net, state_of_config(pre, net), blockee, errors):
        raise SynthesisError(f"action '{blockee}' does not reach an error from {pre.describe()}")
    return Priority(blockee=blockee, blocker=blocker)


def check_circular(
    stateful: Iterable[StatefulPriority], cand: StatefulPriority
) -> bool:
    """True iff an existing priority at the same preError swaps cand's roles."""
    for sp in stateful:
        if sp.pre.snapshot() != cand.pre.snapshot():
            continue
        if (
            sp.prio.blockee == cand.prio.blocker
            or sp.prio.blocker == cand.prio.blockee
        ):
            return True
    return False


def check_prios(state: SynthesisState, pre: Configuration) -> bool:
    """Synthesize every priority available at ``pre``; False if none."""
    net = state.net
    enc = state.encoder
    step = pre.stp
    pre_state = state_of_config(pre, net)
    blockees = [
        a
        for a in net.actions
        if action_reaches_config(net, pre_state, a, state.errors)
    ]
    if not blockees:
        return False
    parts = [enc.progress(step), enc.preerror(step, pre)]
    for e in state.errors:
        parts.append(enc.error(step, e))
    formula = state.base.with_extra(*parts)
    found = False
    while True:
        verdict = _solve(state, formula)
        if verdict.status != "sat":
            return found
        avoid_cfg = create_config(verdict.model, step, net, parts=("act",))
        blocker = _blocker_of(avoid_cfg)
        for blockee in blockees:
            if blockee == blocker:
                continue
            cand = StatefulPriority(
                pre=pre, prio=Priority(blockee=blockee, blocker=blocker)
            )
            if check_circular(state.stateful, cand):
                for sp in state.stateful:
                    if sp.pre.snapshot() == cand.pre.snapshot() and (
                        sp.prio.blockee == cand.prio.blocker
                        or sp.prio.blocker == cand.prio.blockee
                    ):
                        state.circular_pair = (sp, cand)
                        break
                return False
            state.stateful.add(cand)
            found = True
        formula = formula.with_extra(f"(not {step_name(blocker, step)})")


def explore(state: SynthesisState, err: Configuration, depth: int = 0) -> None:
    """Collect all preErrors of ``err`` within the bound, then synthesize
    priorities from each; priority-less preErrors become errors themselves."""
    state.stats.max_recursion = max(state.stats.max_recursion, depth)
    init = initial_state(state.net)
    pre_errors: list[Configuration] = []
    seen: set = set()
    cnt = 0
    while cnt < state.max_steps:
        found = check_reach(state, pre_errors, err, cnt)
        if found:
            for cfg in found:
                if cfg.snapshot() not in seen:
                    seen.add(cfg.snapshot())
                    pre_errors.append(cfg)
            cnt = 0
        else:
            cnt += 1
    if depth == 0:
        state.top_preerrors = list(pre_errors)
    for pre in pre_errors:
        if check_prios(state, pre):
            continue
        if state.circular_pair is not None:
            return
        if state_of_config(pre, state.net) == init:
            state.initial_hit = True
            continue
        state.errors.append(pre)
        explore(state, pre, depth + 1)
        if state.circular_pair is not None:
            return


def synthesize(
    net: Network,
    f: StateFormula,
    max_steps: int,
    solver: Optional[SolverConfig] = None,
) -> SynthesisReport:
    """Full synthesis run; see the module docstring for the loop structure."""
    if max_steps < 1:
        raise SynthesisError("bound must be at least 1")
    if solver is None:
        solver = SolverConfig()
    err = error_config(f, net)
    encoder = Encoder(net, max_steps)
    state = SynthesisState(
        net=net,
        encoder=encoder,
        base=encoder.unfolding(),
        solver=solver,
        max_steps=max_steps,
        errors=[err],
    )
    from .model import state_satisfies

    if state_satisfies(initial_state(net), f, net):
        state.initial_hit = True
    else:
        explore(state, err)

    if state.circular_pair is not None:
        outcome = "circularity-abort"
    elif state.initial_hit:
        outcome = "initial-is-error"
    elif state.stateful:
        outcome = "priorities-found"
    elif not state.top_preerrors:
        outcome = "error-unreachable"
    else:
        outcome = "bound-exhausted"
    return SynthesisReport(
        outcome=outcome,
        stateful=frozenset(state.stateful),
        errors=tuple(state.errors),
        max_steps=max_steps,
        stats=state.stats,
        circular_pair=state.circular_pair,
    )


def reachability_bound(net, f, report: SynthesisReport, bounds=None) -> Optional[int]:
    """Upper bound on the transformed network's reachable-state count:
    |Reach(N)| minus the reachable states matching some errors member.
    None when domain pruning makes the count inexact."""
    from .semantics import bfs_reach, config_matches_state

    reach = bfs_reach(net, depth=10**6, bounds=bounds)
    if reach.pruned:
        return None
    hit = sum(
        1
        for s in reach.states
        if any(config_matches_state(c, s, net) for c in report.errors)
    )
    return len(reach.states) - hit


# ---------------------------------------------------------------------------
# Serialization (structured report + priorities file)


def _value_to_json(v: Value):
    if isinstance(v, bool) or isinstance(v, int):
        return v
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    raise SynthesisError(f"unserializable value {v!r}")


def _value_from_json(x, typ: VarType) -> Value:
    if typ is VarType.BOOL:
        if not isinstance(x, bool):
            raise SynthesisError(f"expected bool, got {x!r}")
        return x
    if typ is VarType.INT:
        if isinstance(x, bool) or not isinstance(x, int):
            raise SynthesisError(f"expected int, got {x!r}")
        return x
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, (int, float)):
        return Fraction(x)
    raise SynthesisError(f"expected rational, got {x!r}")


def priority_to_json(sp: StatefulPriority) -> dict:
    return {
        "pre": {
            "loc": {a: l for a, l in sp.pre.loc},
            "var": {v: _value_to_json(x) for v, x in sp.pre.var},
            "step": sp.pre.stp,
        },
        "blockee": sp.prio.blockee,
        "blocker": sp.prio.blocker,
    }


_REPORT_KEYS = {"schema_version", "network", "outcome", "max", "priorities", "errors", "stats"}


def report_to_json(report: SynthesisReport, net: Network) -> dict:
    priorities = sorted(
        (priority_to_json(sp) for sp in report.stateful),
        key=lambda d: (sorted(d["pre"]["loc"].items()), d["blockee"], d["blocker"]),
    )
    errors = [
        {
            "loc": {a: l for a, l in c.loc},
            "var": {v: _value_to_json(x) for v, x in c.var},
        }
        for c in report.errors
    ]
    return {
        "schema_version": SCHEMA_VERSION,
        "network": net.name,
        "outcome": report.outcome,
        "max": report.max_steps,
        "priorities": priorities,
        "errors": errors,
        "stats": report.stats.as_dict(),
    }


def priorities_from_json(data: dict, net: Network) -> frozenset[StatefulPriority]:
    """Load and validate a structured report's priorities against ``net``.
    Unknown fields and stale location/action names are rejected."""
    unknown = set(data) - _REPORT_KEYS
    if unknown:
        raise SynthesisError(f"unknown report fields: {sorted(unknown)}")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise SynthesisError(
            f"unsupported schema version {data.get('schema_version')!r}"
        )
    types = net.var_types
    out = set()
    for entry in data.get("priorities", []):
        extra = set(entry) - {"pre", "blockee", "blocker"}
        if extra:
            raise SynthesisError(f"unknown priority fields: {sorted(extra)}")
        pre = entry["pre"]
        extra = set(pre) - {"loc", "var", "step"}
        if extra:
            raise SynthesisError(f"unknown snapshot fields: {sorted(extra)}")
        loc = {}
        for a_name, l_name in pre.get("loc", {}).items():
            a = net.automaton(a_name)
            if l_name not in a.locations:
                raise SynthesisError(
                    f"unknown location '{l_name}' of '{a_name}' in priorities file"
                )
            loc[a_name] = l_name
        var = {}
        for v_name, raw in pre.get("var", {}).items():
            if v_name not in types:
                raise SynthesisError(f"unknown variable '{v_name}' in priorities file")
            var[v_name] = _value_from_json(raw, types[v_name])
        for action in (entry["blockee"], entry["blocker"]):
            if action not in net.actions:
                raise SynthesisError(f"unknown action '{action}' in priorities file")
        out.add(
            StatefulPriority(
                pre=Configuration.make(loc=loc, var=var, stp=pre.get("step") or 0),
                prio=Priority(blockee=entry["blockee"], blocker=entry["blocker"]),
            )
        )
    return frozenset(out)


def save_report(report: SynthesisReport, net: Network, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_json(report, net), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_priorities(path: str, net: Network) -> frozenset[StatefulPriority]:
    with open(path) as fh:
        return priorities_from_json(json.load(fh), net)
