import random

import pytest

from priosynth.model import Binary, BoolLit, IntLit, Unary, Var, VarType
from priosynth.parser import (
    ParseError,
    ValidationError,
    format_expr,
    parse_network,
    parse_query,
    print_network,
    print_query,
)
from randnets import random_network

from conftest import load_net, load_query


MINI = """
network mini {
  int x = -1;
  // trailing comment
  automaton A {
    init p;
    locations p, q;
    edge p -> q on go when x < 3 do x = x + 1;
    edge q -> p on back;
  }
}
"""


def test_parse_minimal_network():
    net = parse_network(MINI)
    assert net.name == "mini"
    assert net.variables[0].init == -1
    (a,) = net.automata
    assert a.initial == "p"
    assert a.edges[0].guard == Binary("<", Var("x"), IntLit(3))
    assert a.edges[1].guard == BoolLit(True)  # omitted `when`
    assert net.actions == ("go", "back")


def test_parse_n1_shape(n1):
    assert [a.name for a in n1.automata] == ["A0", "A1"]
    assert sum(len(a.edges) for a in n1.automata) == 11
    assert n1.automaton("A0").actions == ("a", "e", "b")


@pytest.mark.parametrize(
    "source,fragment",
    [
        ("network n { }", "automaton"),
        ("network n { automaton A { init p; locations p; edge p -> q on a; } }", "q"),
        ("network n { automaton A__B { init p; locations p; } }", "__"),
        ("network n { int x = true; automaton A { init p; locations p; } }", "bool"),
        ("network n { automaton A { locations p; init p; } }", "init"),
    ],
)
def test_parse_errors(source, fragment):
    with pytest.raises(ParseError) as exc:
        parse_network(source)
    assert fragment in str(exc.value)


def test_validation_error_carries_diagnostics():
    bad = "network n { automaton A { init p; locations p, p; } }"
    with pytest.raises(ValidationError) as exc:
        parse_network(bad)
    assert exc.value.diagnostics


def test_parse_query_checks_references(n1):
    f = parse_query("EF (A0.l5 && A1.m5)", net=n1)
    assert len(f.literals) == 2
    with pytest.raises(ParseError):
        parse_query("EF (A0.nope)", net=n1)
    with pytest.raises(ParseError):
        parse_query("EF (Axx.l5)", net=n1)


def test_parse_query_negation(n1):
    f = parse_query("EF (!A0.l5 && A1.m5)", net=n1)
    assert f.literals[0].negated
    assert not f.literals[1].negated


@pytest.mark.parametrize("name", ["n1", "n2", "chain", "safe"])
def test_print_parse_round_trip(name):
    net = load_net(name)
    text = print_network(net)
    assert print_network(parse_network(text)) == text


@pytest.mark.parametrize("seed", range(25))
def test_random_network_round_trip(seed):
    net = random_network(random.Random(seed))
    text = print_network(net)
    again = parse_network(text)
    assert print_network(again) == text
    assert again == net


def test_query_round_trip(n1):
    f = load_query("n1-err", n1)
    assert parse_query(print_query(f), net=n1) == f


@pytest.mark.parametrize(
    "expr,text",
    [
        (Binary("+", Var("x"), IntLit(1)), "x + 1"),
        (Binary("*", Var("x"), Binary("+", Var("y"), IntLit(1))), "x * (y + 1)"),
        (Binary("||", Binary("&&", Var("p"), Var("q")), Var("r")), "p && q || r"),
        (Binary("&&", Var("p"), Binary("||", Var("q"), Var("r"))), "p && (q || r)"),
        (Unary("-", Binary("+", Var("x"), IntLit(1))), "-(x + 1)"),
    ],
)
def test_format_expr_minimal_parens(expr, text):
    assert format_expr(expr) == text


def test_positional_detection_round_trip(n1):
    from priosynth.transform import transform_network
    from priosynth.model import Configuration, Priority, StatefulPriority

    sp = StatefulPriority(
        pre=Configuration.make(loc={"A0": "l4", "A1": "m5"}, var={"x": 0}),
        prio=Priority("a", "d"),
    )
    rho = transform_network(n1, {sp}).transformed
    again = parse_network(print_network(rho))
    assert again.positional
