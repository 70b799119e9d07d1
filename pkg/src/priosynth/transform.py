"""Network transformation: weave synthesized stateful priorities back into the
model with positional variables.

Each automaton gains an integer variable ``p_<name>`` tracking its current
location code; every edge appends ``p_<name> := <target code>`` to its update
vector.  Guards of blockee edges gain a disjunction excluding the preError
snapshot, so the blocked transition cannot fire exactly where it would reach
the error.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .model import (
    Assignment,
    Automaton,
    Binary,
    BoolLit,
    Edge,
    Expr,
    IntLit,
    ModelError,
    Network,
    State,
    StatefulPriority,
    Var,
    VarDecl,
    VarType,
    validate_network,
)


class TransformError(ModelError):
    pass


@dataclass(frozen=True)
class GuardEdit:
    automaton: str
    edge_index: int  # position within the automaton's edge tuple
    old_guard: Expr
    new_guard: Expr
    triggers: tuple[StatefulPriority, ...]
    cases: tuple[int, ...]  # one of {1, 2} per trigger; untouched edges absent


def _sp_order(sp: StatefulPriority) -> tuple:
    return (sp.pre.snapshot(), sp.prio.blockee, sp.prio.blocker)


def _exclusion_clause(sp: StatefulPriority, net: Network) -> Expr:
    """⋁ over pinned automata: p_A differs from the preError's location code."""
    parts = []
    for a_name, loc in sp.pre.loc:
        code = net.automaton(a_name).location_code(loc)
        parts.append(
            Binary("!=", Var(net.positional_name(a_name)), IntLit(code))
        )
    if not parts:
        raise TransformError("stateful priority with empty location snapshot")
    out = parts[0]
    for p in parts[1:]:
        out = Binary("||", out, p)
    return out


def _blocker_edge_exists(e: Edge, blocker: str, net: Network) -> bool:
    for a in net.automata:
        for other in a.edges:
            if (
                other.action == blocker
                and other.source == e.source
                and other.target != e.target
            ):
                return True
    return False


def _conj(g: Expr, clause: Expr) -> Expr:
    if g == BoolLit(True):
        return clause
    return Binary("&&", g, clause)


def gamma(
    g: Expr, e: Edge, sp: set[StatefulPriority] | frozenset[StatefulPriority],
    net: Network,
) -> tuple[Expr, tuple[StatefulPriority, ...], tuple[int, ...]]:
    """Rewritten guard for edge ``e`` plus the priorities that fired and the
    rule applied for each.

    A priority applies when e's action is its blockee, its snapshot pins e's
    source location, and e actually leaves that location.  Rule 1 adds the
    snapshot-exclusion disjunction; rule 2 (a same-source edge with the
    blocker action and different target exists) additionally pins
    ``p_<automaton> != source``, disabling e from that source outright.
    """
    owner = net.owner_of_location(e.source)
    triggers = []
    cases = []
    out = g
    for prio in sorted(sp, key=_sp_order):
        if prio.prio.blockee != e.action:
            continue
        pinned = prio.pre.loc_map.get(owner.name)
        if pinned != e.source or e.target == e.source:
            continue
        out = _conj(out, _exclusion_clause(prio, net))
        if _blocker_edge_exists(e, prio.prio.blocker, net):
            out = _conj(
                out,
                Binary(
                    "!=",
                    Var(net.positional_name(owner.name)),
                    IntLit(owner.location_code(e.source)),
                ),
            )
            cases.append(2)
        else:
            cases.append(1)
        triggers.append(prio)
    return out, tuple(triggers), tuple(cases)


@dataclass(frozen=True)
class TransformOutcome:
    transformed: Network
    guard_edits: tuple[GuardEdit, ...]


def transform_network(
    net: Network, sp: set[StatefulPriority] | frozenset[StatefulPriority]
) -> TransformOutcome:
    """Positional-variable weaving; identity when ``sp`` is empty."""
    if net.positional:
        raise TransformError("network already carries positional variables")
    if not sp:
        return TransformOutcome(transformed=net, guard_edits=())

    new_vars = list(net.variables)
    for a in net.automata:
        new_vars.append(
            VarDecl(
                name=net.positional_name(a.name),
                type=VarType.INT,
                init=a.location_code(a.initial),
            )
        )

    edits = []
    new_automata = []
    for a in net.automata:
        pos = net.positional_name(a.name)
        new_edges = []
        for idx, e in enumerate(a.edges):
            guard, triggers, cases = gamma(e.guard, e, sp, net)
            if triggers:
                edits.append(
                    GuardEdit(
                        automaton=a.name,
                        edge_index=idx,
                        old_guard=e.guard,
                        new_guard=guard,
                        triggers=triggers,
                        cases=cases,
                    )
                )
            updates = e.updates + (
                Assignment(target=pos, expr=IntLit(a.location_code(e.target))),
            )
            new_edges.append(replace(e, guard=guard, updates=updates))
        new_automata.append(replace(a, edges=tuple(new_edges)))

    transformed = Network(
        name=net.name,
        variables=tuple(new_vars),
        automata=tuple(new_automata),
        positional=True,
    )
    problems = validate_network(transformed)
    if problems:
        raise TransformError(
            "transformed network invalid: " + "; ".join(str(p) for p in problems)
        )
    return TransformOutcome(transformed=transformed, guard_edits=tuple(edits))


def project(s: State, net_rho: Network) -> State:
    """Drop positional variables from a transformed-network state."""
    if not net_rho.positional:
        return s
    positional = {
        net_rho.positional_name(a.name) for a in net_rho.automata
    }
    vals = tuple(
        v for decl, v in zip(net_rho.variables, s.vals)
        if decl.name not in positional
    )
    return State(s.locs, vals)
