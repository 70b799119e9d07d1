import pytest

from priosynth.model import Configuration, State
from priosynth.semantics import (
    DomainBounds,
    action_reaches_config,
    action_successors,
    bfs_reach,
    check_semantical_restriction,
    check_syntactical_restriction,
    config_matches_state,
    initial_state,
    is_deadlock,
    preerrors_oracle,
    state_of_config,
    successors,
)

from conftest import load_net, load_query


def test_initial_state(n1):
    assert initial_state(n1) == State(("l1", "m1"), (1,))


def test_broadcast_requires_all_holders(n1):
    init = initial_state(n1)
    by_action = {}
    for t in successors(n1, init):
        by_action.setdefault(t.action, []).append(t)
    # e is shared: both automata move at once
    (e_move,) = by_action["e"]
    assert e_move.target == State(("l4", "m4"), (1,))
    assert e_move.participants == (0, 1)
    # a and d are local single-automaton moves
    assert by_action["a"][0].target == State(("l2", "m1"), (2,))
    assert by_action["d"][0].target == State(("l1", "m2"), (1,))


def test_broadcast_blocked_when_one_holder_cannot_move(n1):
    # from (l4, m1) the action e is globally blocked: A0 has no e-edge at l4
    s = State(("l4", "m1"), (1,))
    assert all(t.action != "e" for t in successors(n1, s))


def test_updates_apply_in_ascending_automaton_index():
    net = load_net("n1")
    # only one automaton writes x per action here, but the composed e-move
    # must keep x unchanged (neither e-edge updates it)
    s = initial_state(net)
    (e_move,) = [t for t in successors(net, s) if t.action == "e"]
    assert e_move.target.vals == (1,)


def test_bfs_reach_counts(n1, n2):
    assert len(bfs_reach(n1, 10).states) == 13
    assert len(bfs_reach(n2, 10).states) == 4


def test_bfs_witness_depths(n1):
    reach = bfs_reach(n1, 10)
    err = State(("l5", "m5"), (-1,))
    assert reach.depth[err] == 3
    path = reach.witness(err)
    actions = [a for a, _ in path[1:]]
    assert actions in (["e", "a", "c"], ["e", "c", "a"])


def test_bfs_pruning_is_counted(n1):
    tight = bfs_reach(n1, 10, DomainBounds.uniform(0, 1))
    assert tight.pruned > 0


def test_preerrors_oracle_n1(n1):
    f = load_query("n1-err", n1)
    assert preerrors_oracle(n1, f, 10) == {
        State(("l4", "m5"), (0,)),
        State(("l5", "m4"), (0,)),
    }


def test_preerrors_oracle_n2(n2):
    f = load_query("n2-err", n2)
    assert preerrors_oracle(n2, f, 10) == {
        State(("n1", "k2"), ()),
        State(("n2", "k1"), ()),
    }


def test_action_successors_and_reach_config(n2):
    s = State(("n2", "k1"), ())
    assert action_successors(n2, s, "b") == [State(("n2", "k2"), ())]
    err = Configuration.make(loc={"A0": "n2", "A1": "k2"})
    assert action_reaches_config(n2, s, "b", [err])
    assert action_reaches_config(n2, s, "c", [err])
    assert not action_reaches_config(n2, s, "a", [err])


def test_config_state_round_trip(n1):
    cfg = Configuration.make(loc={"A0": "l4", "A1": "m5"}, var={"x": 0})
    s = state_of_config(cfg, n1)
    assert s == State(("l4", "m5"), (0,))
    assert config_matches_state(cfg, s, n1)
    partial = Configuration.make(loc={"A0": "l4"})
    assert config_matches_state(partial, s, n1)
    assert not config_matches_state(partial, State(("l5", "m5"), (0,)), n1)


def test_deadlock_detection():
    chain = load_net("chain")
    assert is_deadlock(chain, State(("c3",), ()))
    assert not is_deadlock(chain, initial_state(chain))


def test_semantical_restriction(n1, n2):
    assert check_semantical_restriction(n2, load_query("n2-err", n2), 10)
    assert check_semantical_restriction(n1, load_query("n1-err", n1), 10)


def test_syntactical_restriction(n1, n2):
    # n1 shares e between automata; n2 reuses a/b on several edges
    assert not check_syntactical_restriction(n1)
    assert not check_syntactical_restriction(n2)
    assert check_syntactical_restriction(load_net("chain"))
