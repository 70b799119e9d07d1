"""Explicit-state concrete semantics: successors, bounded BFS, oracles.

This is the ground-truth interpreter the solver path is checked against.
Domain bounds make exploration finite; pruned states are counted so exact
claims are only made on prune-free runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional

from .model import (
    Automaton,
    Configuration,
    ModelError,
    Network,
    State,
    StateFormula,
    Value,
    VarType,
    apply_updates,
    eval_expr,
    state_satisfies,
)


@dataclass(frozen=True)
class Transition:
    action: str
    participants: tuple[int, ...]
    target: State


@dataclass(frozen=True)
class DomainBounds:
    """Closed per-variable intervals for int/real variables (oracle use only)."""

    intervals: tuple[tuple[str, Value, Value], ...] = ()
    default_lo: int = -64
    default_hi: int = 64

    @staticmethod
    def uniform(lo: int, hi: int) -> "DomainBounds":
        return DomainBounds(default_lo=lo, default_hi=hi)

    def interval(self, var: str) -> tuple[Value, Value]:
        for name, lo, hi in self.intervals:
            if name == var:
                return lo, hi
        return self.default_lo, self.default_hi

    def admits(self, net: Network, s: State) -> bool:
        for decl, value in zip(net.variables, s.vals):
            if decl.type is VarType.BOOL:
                continue
            lo, hi = self.interval(decl.name)
            if not (lo <= value <= hi):
                return False
        return True


def _canon_vals(net: Network, valuation: Mapping[str, Value]) -> tuple[Value, ...]:
    out = []
    for decl in net.variables:
        v = valuation[decl.name]
        if decl.type is VarType.REAL and not isinstance(v, Fraction):
            v = Fraction(v)
        out.append(v)
    return tuple(out)


def initial_state(net: Network) -> State:
    locs = tuple(a.initial for a in net.automata)
    vals = _canon_vals(net, {v.name: v.init for v in net.variables})
    return State(locs, vals)


def _enabled_edges(a: Automaton, loc: str, action: str, valuation) -> list:
    out = []
    for e in a.edges:
        if e.source == loc and e.action == action and eval_expr(e.guard, valuation):
            out.append(e)
    return out


def successors(net: Network, s: State) -> list[Transition]:
    """All single and full-synchronization transitions enabled in ``s``.

    A shared action fires only with every alphabet-holder participating; each
    combination of enabled edges yields a distinct transition, with updates
    applied in ascending automaton index.
    """
    valuation = s.valuation(net)
    out: list[Transition] = []
    for action in net.actions:
        holders = net.action_holders(action)
        choices = [
            _enabled_edges(net.automata[i], s.locs[i], action, valuation)
            for i in holders
        ]
        if any(not c for c in choices):
            continue
        for combo in itertools.product(*choices):
            locs = list(s.locs)
            vals = dict(valuation)
            for i, e in zip(holders, combo):
                locs[i] = e.target
                vals = apply_updates(e.updates, vals)
            out.append(
                Transition(action, holders, State(tuple(locs), _canon_vals(net, vals)))
            )
    return out


def is_deadlock(net: Network, s: State) -> bool:
    return not successors(net, s)


@dataclass
class ReachResult:
    states: set[State] = field(default_factory=set)
    depth: dict[State, int] = field(default_factory=dict)
    pred: dict[State, tuple[Optional[State], Optional[str]]] = field(default_factory=dict)
    pruned: int = 0

    def witness(self, s: State) -> list[tuple[Optional[str], State]]:
        """Path from the initial state to ``s`` as (action, state) pairs."""
        path = []
        cur: Optional[State] = s
        while cur is not None:
            prev, act = self.pred[cur]
            path.append((act, cur))
            cur = prev
        path.reverse()
        return path


def bfs_reach(
    net: Network, depth: int, bounds: Optional[DomainBounds] = None
) -> ReachResult:
    """All states reachable in at most ``depth`` steps within ``bounds``."""
    if bounds is None:
        bounds = DomainBounds()
    res = ReachResult()
    init = initial_state(net)
    if not bounds.admits(net, init):
        raise ModelError("initial state outside domain bounds")
    res.states.add(init)
    res.depth[init] = 0
    res.pred[init] = (None, None)
    frontier = [init]
    for d in range(depth):
        nxt = []
        for s in frontier:
            for t in successors(net, s):
                if t.target in res.states:
                    continue
                if not bounds.admits(net, t.target):
                    res.pruned += 1
                    continue
                res.states.add(t.target)
                res.depth[t.target] = d + 1
                res.pred[t.target] = (s, t.action)
                nxt.append(t.target)
        if not nxt:
            break
        frontier = nxt
    return res


def preerrors_oracle(
    net: Network,
    f: StateFormula,
    depth: int,
    bounds: Optional[DomainBounds] = None,
) -> set[State]:
    """Reachable states with at least one transition into a state satisfying f."""
    reach = bfs_reach(net, depth, bounds)
    out = set()
    for s in reach.states:
        for t in successors(net, s):
            if state_satisfies(t.target, f, net):
                out.add(s)
                break
    return out


def action_successors(net: Network, s: State, action: str) -> list[State]:
    if action not in net.actions:
        raise ModelError(f"unknown action '{action}'")
    return [t.target for t in successors(net, s) if t.action == action]


def action_reaches_error(
    net: Network, pre: State, action: str, errors: Iterable[State]
) -> bool:
    """True iff some transition on ``action`` from ``pre`` lands in ``errors``."""
    error_set = set(errors)
    return any(t in error_set for t in action_successors(net, pre, action))


def config_matches_state(cfg: Configuration, s: State, net: Network) -> bool:
    """State agrees with every loc/var entry the configuration maps."""
    for a_name, loc in cfg.loc:
        if s.locs[net.automaton_index(a_name)] != loc:
            return False
    valuation = s.valuation(net)
    for v_name, value in cfg.var:
        if v_name not in valuation or valuation[v_name] != value:
            return False
    return True


def action_reaches_config(
    net: Network, pre: State, action: str, configs: Iterable[Configuration]
) -> bool:
    configs = list(configs)
    return any(
        any(config_matches_state(c, t, net) for c in configs)
        for t in action_successors(net, pre, action)
    )


def state_of_config(cfg: Configuration, net: Network) -> State:
    """Concrete state denoted by a configuration with total loc/var maps."""
    loc_map = cfg.loc_map
    var_map = cfg.var_map
    locs = []
    for a in net.automata:
        if a.name not in loc_map:
            raise ModelError(f"configuration has no location for '{a.name}'")
        locs.append(loc_map[a.name])
    for v in net.variables:
        if v.name not in var_map:
            raise ModelError(f"configuration has no value for '{v.name}'")
    return State(tuple(locs), _canon_vals(net, var_map))


def check_semantical_restriction(
    net: Network,
    f: StateFormula,
    depth: int,
    bounds: Optional[DomainBounds] = None,
) -> bool:
    """No bounded-reachable preError has an action that both reaches a state
    satisfying ``f`` and a state violating it (holds up to the bound only)."""
    for pre in preerrors_oracle(net, f, depth, bounds):
        for action in net.actions:
            hits = misses = False
            for t in action_successors(net, pre, action):
                if state_satisfies(t, f, net):
                    hits = True
                else:
                    misses = True
            if hits and misses:
                return False
    return True


def check_syntactical_restriction(net: Network) -> bool:
    """Alphabets pairwise disjoint and no two distinct edges share an action."""
    for i, a in enumerate(net.automata):
        for b in net.automata[i + 1:]:
            if set(a.actions) & set(b.actions):
                return False
    seen: set[str] = set()
    for a in net.automata:
        for e in a.edges:
            if e.action in seen:
                return False
            seen.add(e.action)
    return True


def format_trace_line(step: int, action: Optional[str], s: State, net: Network) -> str:
    locs = ", ".join(s.locs)
    from .parser import format_value

    vals = ",".join(
        f"{v.name}={format_value(x)}" for v, x in zip(net.variables, s.vals)
    )
    label = action if action is not None else "<init>"
    return f"step {step}: {label} -> ({locs}) {{{vals}}}"
