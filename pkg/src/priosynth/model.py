"""Core domain types: expressions, automata, networks, states, configurations.

All types are immutable values; integer arithmetic is arbitrary precision and
reals are exact rationals (``fractions.Fraction``), so solver models round-trip
without loss.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

Value = Union[int, Fraction, bool]


class VarType(Enum):
    INT = "int"
    REAL = "real"
    BOOL = "bool"


class ModelError(Exception):
    """Invalid model construction or use."""


class EvalError(ModelError):
    """Type mismatch or unbound variable during evaluation."""


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class RealLit:
    value: Fraction


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # '-' or '!'
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str  # + - * && || < <= == != >= >
    left: "Expr"
    right: "Expr"


Expr = Union[IntLit, RealLit, BoolLit, Var, Unary, Binary]

TRUE = BoolLit(True)

ARITH_OPS = ("+", "-", "*")
CMP_OPS = ("<", "<=", "==", "!=", ">=", ">")
BOOL_OPS = ("&&", "||")


def free_vars(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Unary):
        return free_vars(e.operand)
    if isinstance(e, Binary):
        return free_vars(e.left) | free_vars(e.right)
    return set()


def expr_type(e: Expr, types: Mapping[str, VarType]) -> VarType:
    """Infer the type of ``e``; raises EvalError on ill-typed trees."""
    if isinstance(e, IntLit):
        return VarType.INT
    if isinstance(e, RealLit):
        return VarType.REAL
    if isinstance(e, BoolLit):
        return VarType.BOOL
    if isinstance(e, Var):
        if e.name not in types:
            raise EvalError(f"unbound variable '{e.name}'")
        return types[e.name]
    if isinstance(e, Unary):
        t = expr_type(e.operand, types)
        if e.op == "-":
            if t is VarType.BOOL:
                raise EvalError("unary '-' applied to boolean operand")
            return t
        if e.op == "!":
            if t is not VarType.BOOL:
                raise EvalError("'!' applied to non-boolean operand")
            return VarType.BOOL
        raise EvalError(f"unknown unary operator '{e.op}'")
    if isinstance(e, Binary):
        lt = expr_type(e.left, types)
        rt = expr_type(e.right, types)
        if e.op in ARITH_OPS:
            if VarType.BOOL in (lt, rt):
                raise EvalError(f"'{e.op}' applied to boolean operand")
            return VarType.REAL if VarType.REAL in (lt, rt) else VarType.INT
        if e.op in CMP_OPS:
            if VarType.BOOL in (lt, rt):
                raise EvalError(f"comparison '{e.op}' over boolean operands")
            return VarType.BOOL
        if e.op in BOOL_OPS:
            if lt is not VarType.BOOL or rt is not VarType.BOOL:
                raise EvalError(f"'{e.op}' applied to non-boolean operand")
            return VarType.BOOL
        raise EvalError(f"unknown binary operator '{e.op}'")
    raise EvalError(f"not an expression: {e!r}")


def is_linear(e: Expr) -> bool:
    """True iff every multiplication has at least one constant factor."""
    if isinstance(e, (IntLit, RealLit, BoolLit, Var)):
        return True
    if isinstance(e, Unary):
        return is_linear(e.operand)
    if isinstance(e, Binary):
        if e.op == "*" and free_vars(e.left) and free_vars(e.right):
            return False
        return is_linear(e.left) and is_linear(e.right)
    return False


def eval_expr(e: Expr, valuation: Mapping[str, Value]) -> Value:
    """Evaluate ``e`` under a total valuation of its free variables."""
    if isinstance(e, (IntLit, RealLit, BoolLit)):
        return e.value
    if isinstance(e, Var):
        if e.name not in valuation:
            raise EvalError(f"unbound variable '{e.name}'")
        return valuation[e.name]
    if isinstance(e, Unary):
        v = eval_expr(e.operand, valuation)
        if e.op == "-":
            if isinstance(v, bool):
                raise EvalError("unary '-' applied to boolean value")
            return -v
        if e.op == "!":
            if not isinstance(v, bool):
                raise EvalError("'!' applied to non-boolean value")
            return not v
        raise EvalError(f"unknown unary operator '{e.op}'")
    if isinstance(e, Binary):
        if e.op in BOOL_OPS:
            lv = eval_expr(e.left, valuation)
            if not isinstance(lv, bool):
                raise EvalError(f"'{e.op}' applied to non-boolean value")
            # no short-circuit surprises: both sides are total anyway
            rv = eval_expr(e.right, valuation)
            if not isinstance(rv, bool):
                raise EvalError(f"'{e.op}' applied to non-boolean value")
            return (lv and rv) if e.op == "&&" else (lv or rv)
        lv = eval_expr(e.left, valuation)
        rv = eval_expr(e.right, valuation)
        if isinstance(lv, bool) or isinstance(rv, bool):
            raise EvalError(f"'{e.op}' applied to boolean value")
        if e.op == "+":
            return lv + rv
        if e.op == "-":
            return lv - rv
        if e.op == "*":
            return lv * rv
        if e.op == "<":
            return lv < rv
        if e.op == "<=":
            return lv <= rv
        if e.op == "==":
            return lv == rv
        if e.op == "!=":
            return lv != rv
        if e.op == ">=":
            return lv >= rv
        if e.op == ">":
            return lv > rv
        raise EvalError(f"unknown binary operator '{e.op}'")
    raise EvalError(f"not an expression: {e!r}")


# ---------------------------------------------------------------------------
# Syntactic model


@dataclass(frozen=True)
class Assignment:
    target: str
    expr: Expr


@dataclass(frozen=True)
class Edge:
    source: str
    action: str
    guard: Expr
    updates: tuple[Assignment, ...]
    target: str


@dataclass(frozen=True)
class Automaton:
    name: str
    locations: tuple[str, ...]
    initial: str
    edges: tuple[Edge, ...]

    @property
    def actions(self) -> tuple[str, ...]:
        """Alphabet: actions appearing on this automaton's edges, in order of use."""
        seen: dict[str, None] = {}
        for e in self.edges:
            seen.setdefault(e.action, None)
        return tuple(seen)

    def location_code(self, loc: str) -> int:
        """Small consecutive integer code (0-based, declaration order)."""
        try:
            return self.locations.index(loc)
        except ValueError:
            raise ModelError(f"unknown location '{loc}' in automaton '{self.name}'")


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: VarType
    init: Value


@dataclass(frozen=True)
class Network:
    name: str
    variables: tuple[VarDecl, ...]
    automata: tuple[Automaton, ...]
    positional: bool = False

    def automaton(self, name: str) -> Automaton:
        for a in self.automata:
            if a.name == name:
                return a
        raise ModelError(f"unknown automaton '{name}'")

    def automaton_index(self, name: str) -> int:
        for i, a in enumerate(self.automata):
            if a.name == name:
                return i
        raise ModelError(f"unknown automaton '{name}'")

    @property
    def actions(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for a in self.automata:
            for act in a.actions:
                seen.setdefault(act, None)
        return tuple(seen)

    @property
    def var_types(self) -> dict[str, VarType]:
        return {v.name: v.type for v in self.variables}

    def action_holders(self, action: str) -> tuple[int, ...]:
        """Indices of automata with ``action`` in their alphabet."""
        return tuple(
            i for i, a in enumerate(self.automata) if action in a.actions
        )

    def variable_writers(self, var: str) -> tuple[int, ...]:
        """Indices of automata with an edge updating ``var``."""
        out = []
        for i, a in enumerate(self.automata):
            if any(u.target == var for e in a.edges for u in e.updates):
                out.append(i)
        return tuple(out)

    def exclusively_updated(self, var: str) -> bool:
        """The omega flag: ``var`` is updated by edges of at most one automaton."""
        return len(self.variable_writers(var)) <= 1

    def owner_of_location(self, loc: str) -> Automaton:
        for a in self.automata:
            if loc in a.locations:
                return a
        raise ModelError(f"unknown location '{loc}'")

    def positional_name(self, automaton: str) -> str:
        return f"p_{automaton}"


# ---------------------------------------------------------------------------
# Semantic objects


@dataclass(frozen=True)
class State:
    """Location vector (network order) plus a total variable valuation."""

    locs: tuple[str, ...]
    vals: tuple[Value, ...]  # in network variable declaration order

    def valuation(self, net: Network) -> dict[str, Value]:
        return {v.name: x for v, x in zip(net.variables, self.vals)}


@dataclass(frozen=True)
class Literal:
    automaton: str
    location: str
    negated: bool = False


@dataclass(frozen=True)
class StateFormula:
    literals: tuple[Literal, ...]


@dataclass(frozen=True)
class Priority:
    blockee: str
    blocker: str


def _frozen_items(m: Mapping) -> tuple:
    return tuple(sorted(m.items()))


@dataclass(frozen=True)
class Configuration:
    """Solver-model snapshot: partial loc/var/act maps at one unfolding step."""

    loc: tuple[tuple[str, str], ...] = ()
    var: tuple[tuple[str, Value], ...] = ()
    act: tuple[tuple[str, bool], ...] = ()
    stp: int = 0

    @staticmethod
    def make(
        loc: Mapping[str, str] = (),
        var: Mapping[str, Value] = (),
        act: Mapping[str, bool] = (),
        stp: int = 0,
    ) -> "Configuration":
        return Configuration(
            _frozen_items(dict(loc)), _frozen_items(dict(var)),
            _frozen_items(dict(act)), stp,
        )

    @property
    def loc_map(self) -> dict[str, str]:
        return dict(self.loc)

    @property
    def var_map(self) -> dict[str, Value]:
        return dict(self.var)

    @property
    def act_map(self) -> dict[str, bool]:
        return dict(self.act)

    def snapshot(self) -> tuple:
        """loc+var content, ignoring act and step; the avoid-set identity."""
        return (self.loc, self.var)

    def describe(self) -> str:
        locs = ", ".join(f"{a}={l}" for a, l in self.loc)
        vars_ = ", ".join(f"{v}={x}" for v, x in self.var)
        parts = [p for p in (locs, vars_) if p]
        return "<" + "; ".join(parts) + f"; step {self.stp}>"


@dataclass(frozen=True)
class StatefulPriority:
    pre: Configuration
    prio: Priority


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Diagnostic:
    message: str
    subject: str = ""

    def __str__(self) -> str:
        return f"{self.subject}: {self.message}" if self.subject else self.message


def _valid_ident(name: str) -> bool:
    return bool(IDENT_RE.match(name)) and "__" not in name


def validate_network(net: Network) -> list[Diagnostic]:
    """All well-formedness diagnostics for ``net``; empty iff valid."""
    out: list[Diagnostic] = []

    def bad(msg: str, subject: str = "") -> None:
        out.append(Diagnostic(msg, subject))

    if not _valid_ident(net.name):
        bad("invalid network identifier", net.name)
    if not net.automata:
        bad("at least one automaton required", net.name)

    types = net.var_types
    seen_vars: set[str] = set()
    for v in net.variables:
        if not _valid_ident(v.name):
            bad("invalid variable identifier", v.name)
        if v.name in seen_vars:
            bad("duplicate variable identifier", v.name)
        seen_vars.add(v.name)
        if not _value_matches(v.init, v.type):
            bad(f"initial value {v.init!r} not of type {v.type.value}", v.name)

    seen_automata: set[str] = set()
    all_locations: dict[str, str] = {}  # location -> owning automaton
    for a in net.automata:
        if not _valid_ident(a.name):
            bad("invalid automaton identifier", a.name)
        if a.name in seen_automata:
            bad("duplicate automaton identifier", a.name)
        seen_automata.add(a.name)
        if a.name in seen_vars:
            bad("automaton identifier collides with a variable", a.name)

        seen_locs: set[str] = set()
        for loc in a.locations:
            if not _valid_ident(loc):
                bad("invalid location identifier", f"{a.name}.{loc}")
            if loc in seen_locs:
                bad("duplicate location identifier", f"{a.name}.{loc}")
            seen_locs.add(loc)
            if loc in all_locations:
                bad(
                    f"location shared with automaton '{all_locations[loc]}'",
                    f"{a.name}.{loc}",
                )
            else:
                all_locations[loc] = a.name
        if a.initial not in seen_locs:
            bad(f"initial location '{a.initial}' not declared", a.name)

        for e in a.edges:
            where = f"{a.name}: {e.source} -> {e.target} on {e.action}"
            if e.source not in seen_locs:
                bad(f"edge source '{e.source}' not declared", where)
            if e.target not in seen_locs:
                bad(f"edge target '{e.target}' not declared", where)
            if not _valid_ident(e.action):
                bad("invalid action identifier", where)
            try:
                if expr_type(e.guard, types) is not VarType.BOOL:
                    bad("guard is not boolean", where)
            except EvalError as exc:
                bad(f"guard: {exc}", where)
            for u in e.updates:
                if u.target not in types:
                    bad(f"update target '{u.target}' not declared", where)
                    continue
                try:
                    et = expr_type(u.expr, types)
                except EvalError as exc:
                    bad(f"update of '{u.target}': {exc}", where)
                    continue
                tt = types[u.target]
                ok = et is tt or (tt is VarType.REAL and et is VarType.INT)
                if not ok:
                    bad(
                        f"update of '{u.target}': {et.value} expression "
                        f"assigned to {tt.value} variable",
                        where,
                    )

    action_names = set(net.actions)
    for name in action_names:
        if name in seen_vars:
            bad("action identifier collides with a variable", name)
        if name in seen_automata:
            bad("action identifier collides with an automaton", name)

    if net.positional:
        for a in net.automata:
            pname = net.positional_name(a.name)
            decl = next((v for v in net.variables if v.name == pname), None)
            if decl is None:
                bad(f"positional variable '{pname}' missing", a.name)
            elif decl.type is not VarType.INT:
                bad(f"positional variable '{pname}' must be int", a.name)
            elif decl.init != a.location_code(a.initial):
                bad(
                    f"positional variable '{pname}' must start at the "
                    f"initial location code {a.location_code(a.initial)}",
                    a.name,
                )
    return out


def _value_matches(value: Value, t: VarType) -> bool:
    if t is VarType.BOOL:
        return isinstance(value, bool)
    if t is VarType.INT:
        return isinstance(value, int) and not isinstance(value, bool)
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def apply_updates(
    updates: Iterable[Assignment], valuation: Mapping[str, Value]
) -> dict[str, Value]:
    """Apply assignments left-to-right; unassigned variables unchanged."""
    out = dict(valuation)
    for u in updates:
        if u.target not in out:
            raise EvalError(f"update target '{u.target}' not declared")
        out[u.target] = eval_expr(u.expr, out)
    return out


def state_satisfies(s: State, f: StateFormula, net: Network) -> bool:
    """True iff every literal of ``f`` holds in ``s``."""
    for lit in f.literals:
        i = net.automaton_index(lit.automaton)
        a = net.automata[i]
        if lit.location not in a.locations:
            raise ModelError(
                f"unknown location '{lit.location}' in automaton '{lit.automaton}'"
            )
        here = s.locs[i] == lit.location
        if here == lit.negated:
            return False
    return True
