"""Seeded random-network generator for differential testing.

Networks stay small (2-3 automata, <= 4 locations, <= 1 int variable) so the
explicit-state interpreter can serve as ground truth.  Per shared action at
most one automaton updates the variable: the solver encoding conjoins the
update expressions of all participants of a synchronization, so concurrent
writes to the same variable would not match the interpreter's sequential
update order.
"""

from __future__ import annotations

import random

from priosynth.model import (
    Assignment,
    Automaton,
    Binary,
    Configuration,
    Edge,
    IntLit,
    Literal,
    Network,
    StateFormula,
    TRUE,
    Var,
    VarDecl,
    VarType,
    validate_network,
)

VAR = "x"


def _guard(rng: random.Random):
    if rng.random() < 0.6:
        return TRUE
    op = rng.choice(["<", "<=", ">", ">=", "==", "!="])
    return Binary(op, Var(VAR), IntLit(rng.randint(-4, 4)))


def _update(rng: random.Random):
    if rng.random() < 0.5:
        return Assignment(VAR, Binary(rng.choice(["+", "-"]), Var(VAR), IntLit(rng.randint(1, 3))))
    return Assignment(VAR, IntLit(rng.randint(-3, 3)))


def random_network(rng: random.Random, name: str = "rnd") -> Network:
    n_auto = rng.randint(2, 3)
    has_var = rng.random() < 0.7
    locs = [
        [f"n{i}p{j}" for j in range(rng.randint(2, 4))] for i in range(n_auto)
    ]

    # shared actions with their holder sets; one automaton owns x per action
    shared: list[tuple[str, list[int]]] = []
    for s in range(rng.randint(0, 2)):
        holders = rng.sample(range(n_auto), rng.randint(2, n_auto))
        shared.append((f"s{s}", sorted(holders)))

    edges: list[list[Edge]] = [[] for _ in range(n_auto)]
    owner = {action: rng.choice(holders) for action, holders in shared}
    for action, holders in shared:
        for i in holders:
            src, tgt = rng.choice(locs[i]), rng.choice(locs[i])
            updates = ()
            if has_var and owner[action] == i and rng.random() < 0.5:
                updates = (_update(rng),)
            edges[i].append(Edge(src, action, _guard(rng) if has_var else TRUE, updates, tgt))

    serial = 0
    for i in range(n_auto):
        local_actions: list[str] = []
        for _ in range(rng.randint(1, 4)):
            if len(edges[i]) >= 6:
                break
            if local_actions and rng.random() < 0.3:
                action = rng.choice(local_actions)  # nondeterministic reuse
            else:
                action = f"t{serial}"
                serial += 1
                local_actions.append(action)
            src, tgt = rng.choice(locs[i]), rng.choice(locs[i])
            updates = ()
            if has_var and rng.random() < 0.4:
                updates = (_update(rng),)
            edges[i].append(Edge(src, action, _guard(rng) if has_var else TRUE, updates, tgt))

    variables = (
        (VarDecl(VAR, VarType.INT, rng.randint(-2, 2)),) if has_var else ()
    )
    net = Network(
        name=name,
        variables=variables,
        automata=tuple(
            Automaton(f"A{i}", tuple(locs[i]), locs[i][0], tuple(edges[i]))
            for i in range(n_auto)
        ),
    )
    problems = validate_network(net)
    assert not problems, problems
    return net


def random_snapshot(rng: random.Random, net: Network) -> Configuration:
    """Random partial loc/var snapshot; may or may not be reachable."""
    picked = rng.sample(range(len(net.automata)), rng.randint(1, len(net.automata)))
    loc = {
        net.automata[i].name: rng.choice(net.automata[i].locations)
        for i in picked
    }
    var = {}
    if net.variables and rng.random() < 0.5:
        var[VAR] = rng.randint(-6, 6)
    return Configuration.make(loc=loc, var=var)


def random_query(rng: random.Random, net: Network) -> StateFormula:
    """Conjunction pinning every automaton to one random location."""
    return StateFormula(
        tuple(
            Literal(a.name, rng.choice(a.locations)) for a in net.automata
        )
    )
