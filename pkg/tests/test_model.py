from fractions import Fraction

import pytest

from priosynth.model import (
    Assignment,
    Automaton,
    Binary,
    BoolLit,
    Configuration,
    Edge,
    IntLit,
    Literal,
    Network,
    Priority,
    RealLit,
    StateFormula,
    State,
    TRUE,
    Unary,
    Var,
    VarDecl,
    VarType,
    apply_updates,
    eval_expr,
    expr_type,
    free_vars,
    is_linear,
    state_satisfies,
    validate_network,
)


X = Var("x")
Y = Var("y")


@pytest.mark.parametrize(
    "expr,valuation,expected",
    [
        (Binary("+", X, IntLit(2)), {"x": 3}, 5),
        (Binary("*", IntLit(2), X), {"x": -4}, -8),
        (Unary("-", X), {"x": 7}, -7),
        (Binary("&&", Binary("<", X, IntLit(1)), BoolLit(True)), {"x": 0}, True),
        (Binary("!=", X, Y), {"x": 1, "y": 1}, False),
        (Binary("<=", X, RealLit(Fraction(1, 2))), {"x": Fraction(1, 4)}, True),
        (Unary("!", BoolLit(False)), {}, True),
    ],
)
def test_eval_expr(expr, valuation, expected):
    assert eval_expr(expr, valuation) == expected


def test_free_vars():
    e = Binary("+", X, Binary("*", Y, IntLit(3)))
    assert free_vars(e) == {"x", "y"}


def test_expr_type_widens_int_to_real():
    types = {"x": VarType.INT, "r": VarType.REAL}
    assert expr_type(Binary("+", X, Var("r")), types) is VarType.REAL
    assert expr_type(Binary("<", X, IntLit(0)), types) is VarType.BOOL


@pytest.mark.parametrize(
    "expr,linear",
    [
        (Binary("*", IntLit(2), X), True),
        (Binary("*", X, X), False),
        (Binary("+", X, Binary("*", IntLit(3), Y)), True),
    ],
)
def test_is_linear(expr, linear):
    assert is_linear(expr) is linear


def test_apply_updates_is_sequential():
    # later assignments must observe earlier ones
    ups = [
        Assignment("x", Binary("+", X, IntLit(1))),
        Assignment("y", X),
    ]
    assert apply_updates(ups, {"x": 0, "y": 9}) == {"x": 1, "y": 1}


def _tiny(edges, locations=("p", "q"), variables=()):
    return Network(
        name="t",
        variables=tuple(variables),
        automata=(Automaton("A", tuple(locations), locations[0], tuple(edges)),),
    )


def test_validate_accepts_minimal_network():
    net = _tiny([Edge("p", "go", TRUE, (), "q")])
    assert validate_network(net) == []


@pytest.mark.parametrize(
    "net,fragment",
    [
        (_tiny([Edge("p", "go", TRUE, (), "nowhere")]), "nowhere"),
        (_tiny([Edge("p", "go", X, (), "q")]), "unbound"),
        (
            _tiny(
                [Edge("p", "go", X, (), "q")],
                variables=[VarDecl("x", VarType.INT, 0)],
            ),
            "boolean",
        ),
        (
            _tiny(
                [Edge("p", "go", TRUE, (Assignment("x", BoolLit(True)),), "q")],
                variables=[VarDecl("x", VarType.INT, 0)],
            ),
            "x",
        ),
        (
            Network(
                name="t",
                variables=(),
                automata=(
                    Automaton("A", ("p", "q"), "p", ()),
                    Automaton("B", ("p", "r"), "p", ()),  # location clash
                ),
            ),
            "p",
        ),
    ],
)
def test_validate_rejects(net, fragment):
    problems = validate_network(net)
    assert problems, "expected diagnostics"
    assert any(fragment in str(p) for p in problems)


def test_automaton_location_codes_are_declaration_order():
    a = Automaton("A", ("p", "q", "r"), "p", ())
    assert [a.location_code(l) for l in a.locations] == [0, 1, 2]


def test_network_action_holders_and_writers(n1):
    assert n1.action_holders("e") == (0, 1)
    assert n1.action_holders("a") == (0,)
    assert n1.variable_writers("x") == (0, 1)
    assert not n1.exclusively_updated("x")


def test_state_satisfies():
    net = _tiny([Edge("p", "go", TRUE, (), "q")])
    s = State(("q",), ())
    assert state_satisfies(s, StateFormula((Literal("A", "q"),)), net)
    assert not state_satisfies(s, StateFormula((Literal("A", "q", negated=True),)), net)


def test_configuration_snapshot_ignores_actions_and_step():
    c1 = Configuration.make(loc={"A": "p"}, act={"go": True}, stp=3)
    c2 = Configuration.make(loc={"A": "p"}, act={"go": False}, stp=5)
    assert c1.snapshot() == c2.snapshot()
    assert c1 != c2
    assert "A=p" in c1.describe()


def test_priority_is_hashable_pair():
    assert Priority("a", "b") == Priority("a", "b")
    assert len({Priority("a", "b"), Priority("a", "b"), Priority("b", "a")}) == 2
