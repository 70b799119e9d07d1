"""Bounded-model-checking encoding: k-step unfolding plus the per-step
constraint families (progress / query / avoid / preError / error).

Constraints are built directly as SMT-LIB2 s-expression text.  Step variables
are mangled ``<base>__<i>``; user identifiers containing ``__`` are rejected
at parse time, so the mangling is injective.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping, Optional

from .model import (
    Assignment,
    Binary,
    BoolLit,
    Configuration,
    Edge,
    Expr,
    IntLit,
    ModelError,
    Network,
    RealLit,
    Unary,
    Value,
    Var,
    VarType,
    is_linear,
)


class EncodeError(ModelError):
    """Unencodable input: bad bound or non-linear expression."""


def step_name(base: str, step: int) -> str:
    return f"{base}__{step}"


@dataclass(frozen=True)
class StepVar:
    kind: str  # 'action' | 'variable' | 'automaton'
    base: str
    step: int
    sort: str  # SMT sort name

    @property
    def name(self) -> str:
        return step_name(self.base, self.step)


@dataclass(frozen=True)
class UnfoldingFormula:
    k: int
    declarations: tuple[StepVar, ...]
    init: str
    trans: str
    extra: tuple[str, ...] = ()
    logic: str = "QF_LIA"

    def with_extra(self, *constraints: str) -> "UnfoldingFormula":
        return replace(self, extra=self.extra + tuple(constraints))


def smt_value(value: Value, sort: str = "Int") -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        num, den = value.numerator, value.denominator
        if den == 1:
            s = f"{abs(num)}.0"
        else:
            s = f"(/ {abs(num)}.0 {den}.0)"
        return f"(- {s})" if num < 0 else s
    if value < 0:
        return f"(- {-value})"
    return str(value)


_SMT_OPS = {
    "&&": "and", "||": "or", "+": "+", "-": "-", "*": "*",
    "<": "<", "<=": "<=", ">=": ">=", ">": ">", "==": "=", "!=": "distinct",
}


def expr_to_smt(e: Expr, types: Mapping[str, VarType], step: int) -> str:
    """Translate an expression with every variable read at ``step``."""
    if isinstance(e, IntLit):
        return smt_value(e.value)
    if isinstance(e, RealLit):
        return smt_value(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return step_name(e.name, step)
    if isinstance(e, Unary):
        inner = expr_to_smt(e.operand, types, step)
        return f"(- {inner})" if e.op == "-" else f"(not {inner})"
    if isinstance(e, Binary):
        left = expr_to_smt(e.left, types, step)
        right = expr_to_smt(e.right, types, step)
        return f"({_SMT_OPS[e.op]} {left} {right})"
    raise EncodeError(f"not an expression: {e!r}")


def _subst(e: Expr, mapping: Mapping[str, Expr]) -> Expr:
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Unary):
        return Unary(e.op, _subst(e.operand, mapping))
    if isinstance(e, Binary):
        return Binary(e.op, _subst(e.left, mapping), _subst(e.right, mapping))
    return e


def sequential_update_exprs(updates: tuple[Assignment, ...]) -> dict[str, Expr]:
    """Post-state expressions over pre-state variables, composing the update
    vector left-to-right (later assignments see earlier ones)."""
    acc: dict[str, Expr] = {}
    for u in updates:
        acc[u.target] = _subst(u.expr, acc)
    return acc


def _conj(parts: list[str]) -> str:
    parts = [p for p in parts if p]
    if not parts:
        return "true"
    if len(parts) == 1:
        return parts[0]
    return "(and " + " ".join(parts) + ")"


def _disj(parts: list[str]) -> str:
    if not parts:
        return "false"
    if len(parts) == 1:
        return parts[0]
    return "(or " + " ".join(parts) + ")"


_SORTS = {VarType.INT: "Int", VarType.REAL: "Real", VarType.BOOL: "Bool"}


class Encoder:
    """Builds the k-unfolding and auxiliary constraints for one network."""

    def __init__(self, net: Network, k: int):
        if k < 1:
            raise EncodeError("unfolding bound must be at least 1")
        self.net = net
        self.k = k
        self.types = net.var_types
        self._check_linear()

    def _check_linear(self) -> None:
        for a in self.net.automata:
            for e in a.edges:
                if not is_linear(e.guard):
                    raise EncodeError(
                        f"non-linear guard on edge {e.source}->{e.target} of {a.name}"
                    )
                for u in e.updates:
                    if not is_linear(u.expr):
                        raise EncodeError(
                            f"non-linear update of '{u.target}' in {a.name}"
                        )

    # -- step variables ----------------------------------------------------

    def step_vars(self) -> tuple[StepVar, ...]:
        out = []
        for action in self.net.actions:
            for i in range(self.k + 1):
                out.append(StepVar("action", action, i, "Bool"))
        for a in self.net.automata:
            for i in range(self.k + 1):
                out.append(StepVar("automaton", a.name, i, "Int"))
        for v in self.net.variables:
            for i in range(self.k + 1):
                out.append(StepVar("variable", v.name, i, _SORTS[v.type]))
        return tuple(out)

    # -- unfolding ---------------------------------------------------------

    def unfolding(self) -> UnfoldingFormula:
        net = self.net
        init_parts = []
        for a in net.automata:
            init_parts.append(
                f"(= {step_name(a.name, 0)} {a.location_code(a.initial)})"
            )
        for v in net.variables:
            init_parts.append(f"(= {step_name(v.name, 0)} {smt_value(v.init)})")

        trans_parts = []
        for i in range(self.k):
            for a in net.automata:
                disjuncts = [
                    self._edge_clause(a.name, e, i) for e in a.edges
                ]
                disjuncts.append(self._idle_clause(a.name, i))
                trans_parts.append(_disj(disjuncts))
            trans_parts.extend(self._shared_frame_clauses(i))

        logic = "QF_LIA"
        if any(v.type is VarType.REAL for v in net.variables):
            logic = "QF_LIRA"
        return UnfoldingFormula(
            k=self.k,
            declarations=self.step_vars(),
            init=_conj(init_parts),
            trans=_conj(trans_parts),
            logic=logic,
        )

    def _block(self, action: str, i: int) -> list[str]:
        return [
            f"(not {step_name(other, i)})"
            for other in self.net.actions
            if other != action
        ]

    def _edge_clause(self, automaton: str, e: Edge, i: int) -> str:
        net = self.net
        a = net.automaton(automaton)
        a_idx = net.automaton_index(automaton)
        parts = [f"(= {step_name(automaton, i)} {a.location_code(e.source)})"]
        parts.append(step_name(e.action, i))
        parts.extend(self._block(e.action, i))
        if e.guard != BoolLit(True):
            parts.append(expr_to_smt(e.guard, self.types, i))
        post = sequential_update_exprs(e.updates)
        for v in net.variables:
            if v.name in post:
                rhs = expr_to_smt(post[v.name], self.types, i)
                parts.append(f"(= {step_name(v.name, i + 1)} {rhs})")
            elif self._framed_by_edge(v.name, a_idx, e.action):
                parts.append(
                    f"(= {step_name(v.name, i + 1)} {step_name(v.name, i)})"
                )
        parts.append(f"(= {step_name(automaton, i + 1)} {a.location_code(e.target)})")
        return _conj(parts)

    def _framed_by_edge(self, var: str, a_idx: int, action: str) -> bool:
        # a variable stays framed in this edge's clause unless some other
        # automaton may update it in the same synchronization step
        net = self.net
        for j, other in enumerate(net.automata):
            if j == a_idx:
                continue
            for oe in other.edges:
                if oe.action == action and any(u.target == var for u in oe.updates):
                    return False
        return True

    def _idle_clause(self, automaton: str, i: int) -> str:
        net = self.net
        a = net.automaton(automaton)
        a_idx = net.automaton_index(automaton)
        parts = [f"(= {step_name(automaton, i + 1)} {step_name(automaton, i)})"]
        for action in a.actions:
            parts.append(f"(not {step_name(action, i)})")
        for v in net.variables:
            if net.variable_writers(v.name) == (a_idx,):
                parts.append(
                    f"(= {step_name(v.name, i + 1)} {step_name(v.name, i)})"
                )
        return _conj(parts)

    def _shared_frame_clauses(self, i: int) -> list[str]:
        # variables not owned by exactly one automaton have no idle-clause
        # frame; they stay put unless some action that can write them fires
        net = self.net
        out = []
        for v in net.variables:
            writers = net.variable_writers(v.name)
            if len(writers) == 1:
                continue
            writer_actions: dict[str, None] = {}
            for j in writers:
                for e in net.automata[j].edges:
                    if any(u.target == v.name for u in e.updates):
                        writer_actions.setdefault(e.action, None)
            frame = f"(= {step_name(v.name, i + 1)} {step_name(v.name, i)})"
            fired = [step_name(action, i) for action in writer_actions]
            out.append(_disj([frame] + fired))
        return out

    # -- per-step constraint families --------------------------------------

    def progress(self, j: int) -> str:
        """P(j): the first j+1 transitions each change the global state."""
        if not 0 <= j < self.k:
            raise EncodeError(f"progress step {j} outside [0, {self.k - 1}]")
        net = self.net
        conj = []
        for i in range(j + 1):
            disj = [
                f"(distinct {step_name(a.name, i)} {step_name(a.name, i + 1)})"
                for a in net.automata
            ]
            disj += [
                f"(distinct {step_name(v.name, i)} {step_name(v.name, i + 1)})"
                for v in net.variables
            ]
            conj.append(_disj(disj))
        return _conj(conj)

    def _loc_eqs(self, cfg: Configuration, step: int, negate: bool) -> list[str]:
        net = self.net
        out = []
        for a_name, loc in cfg.loc:
            code = net.automaton(a_name).location_code(loc)
            eq = f"(= {step_name(a_name, step)} {code})"
            out.append(f"(not {eq})" if negate else eq)
        for v_name, value in cfg.var:
            eq = f"(= {step_name(v_name, step)} {smt_value(value)})"
            out.append(f"(not {eq})" if negate else eq)
        return out

    def query(self, j: int, cfg: Configuration) -> str:
        """Q(j, c): the configuration snapshot holds at step j+1."""
        if j + 1 > self.k:
            raise EncodeError(f"query step {j}+1 beyond bound {self.k}")
        if not cfg.loc and not cfg.var:
            raise EncodeError("query configuration maps nothing")
        return _conj(self._loc_eqs(cfg, j + 1, negate=False))

    def avoid(self, j: int, cfg: Configuration) -> str:
        """D(j, c): the snapshot differs from every step up to j."""
        if not 0 <= j <= self.k - 1:
            raise EncodeError(f"avoid step {j} outside [0, {self.k - 1}]")
        return _conj(
            [_disj(self._loc_eqs(cfg, i, negate=True)) for i in range(j + 1)]
        )

    def preerror(self, j: int, cfg: Configuration) -> str:
        """R(j, c): the snapshot holds exactly at step j."""
        if not 0 <= j <= self.k:
            raise EncodeError(f"preError step {j} outside [0, {self.k}]")
        return _conj(self._loc_eqs(cfg, j, negate=False))

    def error(self, j: int, cfg: Configuration) -> str:
        """E(j, c): step j+1 differs from the snapshot somewhere."""
        if j + 1 > self.k:
            raise EncodeError(f"error step {j}+1 beyond bound {self.k}")
        return _disj(self._loc_eqs(cfg, j + 1, negate=True))

    def formula_at(self, literals, step: int) -> str:
        """A state formula as location (dis)equalities at ``step``."""
        parts = []
        for lit in literals:
            code = self.net.automaton(lit.automaton).location_code(lit.location)
            eq = f"(= {step_name(lit.automaton, step)} {code})"
            parts.append(f"(not {eq})" if lit.negated else eq)
        return _conj(parts)


def emit_script(f: UnfoldingFormula) -> str:
    """Deterministic SMT-LIB2 text: logic, declarations, assertions,
    check-sat, get-model."""
    lines = [f"(set-logic {f.logic})"]
    for sv in f.declarations:
        lines.append(f"(declare-const {sv.name} {sv.sort})")
    lines.append(f"(assert {f.init})")
    lines.append(f"(assert {f.trans})")
    for c in f.extra:
        lines.append(f"(assert {c})")
    lines.append("(check-sat)")
    lines.append("(get-model)")
    return "\n".join(lines) + "\n"


def check_model_invariants(
    net: Network, k: int, values: Mapping[str, Value]
) -> list[str]:
    """Encoding sanity on a parsed model: at most one action fires per step,
    and idle automata keep their exclusively-owned variables framed."""
    problems = []
    for i in range(k):
        fired = [
            a for a in net.actions if values.get(step_name(a, i)) is True
        ]
        if len(fired) > 1:
            problems.append(f"step {i}: multiple actions fired: {fired}")
        for idx, a in enumerate(net.automata):
            if any(values.get(step_name(act, i)) is True for act in a.actions):
                continue  # not idle
            here = values.get(step_name(a.name, i))
            there = values.get(step_name(a.name, i + 1))
            if here != there:
                problems.append(f"step {i}: idle automaton {a.name} moved")
            for v in net.variables:
                if net.variable_writers(v.name) != (idx,):
                    continue
                if values.get(step_name(v.name, i)) != values.get(
                    step_name(v.name, i + 1)
                ):
                    problems.append(
                        f"step {i}: idle automaton {a.name} let '{v.name}' change"
                    )
    return problems
