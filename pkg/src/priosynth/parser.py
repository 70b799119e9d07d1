"""Textual DSL for networks (`.net`) and reachability queries (`.q`).

Grammar (comments run `//` to end of line):

    network   := 'network' ID '{' vardecl* automaton+ '}'
    vardecl   := ('int'|'real'|'bool') ID '=' literal ';'
    automaton := 'automaton' ID '{' 'init' ID ';'
                 'locations' ID (',' ID)* ';' edge* '}'
    edge      := 'edge' ID '->' ID 'on' ID
                 ('when' expr)? ('do' assign (',' assign)*)? ';'
    assign    := ID '=' expr
    query     := 'EF' '(' lit ('&&' lit)* ')'
    lit       := '!'? ID '.' ID

An omitted `when` clause means guard `true`.  Actions are declared implicitly
by use.  Identifiers containing `__` are rejected (reserved for the solver
encoding's step-variable mangling).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import (
    Assignment,
    Automaton,
    Binary,
    BoolLit,
    Edge,
    Expr,
    IntLit,
    Literal,
    Network,
    RealLit,
    StateFormula,
    TRUE,
    Unary,
    Var,
    VarDecl,
    VarType,
    validate_network,
)

KEYWORDS = {
    "network", "automaton", "init", "locations", "edge", "on", "when", "do",
    "int", "real", "bool", "true", "false", "EF",
}

_PUNCT = [
    "->", "||", "&&", "<=", ">=", "==", "!=",
    "{", "}", "(", ")", ";", ",", ".", "<", ">", "+", "-", "*", "=", "!",
]


@dataclass(frozen=True)
class SourceSpan:
    file: str
    line: int
    column: int
    length: int

    def __str__(self) -> str:
        return f"{self.file}:{self.line}:{self.column}"


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan):
        super().__init__(f"{span}: {message}")
        self.message = message
        self.span = span


class ValidationError(ParseError):
    def __init__(self, diagnostics, span: SourceSpan):
        self.diagnostics = list(diagnostics)
        msg = "; ".join(str(d) for d in self.diagnostics)
        super().__init__(f"invalid network: {msg}", span)


@dataclass(frozen=True)
class Token:
    kind: str  # 'ident' | 'int' | 'real' | 'punct' | 'eof'
    text: str
    span: SourceSpan


def tokenize(text: str, file: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if c in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        span_start = SourceSpan(file, line, col, 1)
        if c.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            if j < n and text[j] == "." and j + 1 < n and text[j + 1].isdigit():
                j += 1
                while j < n and text[j].isdigit():
                    j += 1
                kind = "real"
            else:
                kind = "int"
            lexeme = text[i:j]
            tokens.append(Token(kind, lexeme, SourceSpan(file, line, col, j - i)))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            lexeme = text[i:j]
            tokens.append(Token("ident", lexeme, SourceSpan(file, line, col, j - i)))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if text.startswith(p, i):
                tokens.append(Token("punct", p, SourceSpan(file, line, col, len(p))))
                col += len(p)
                i += len(p)
                break
        else:
            raise ParseError(f"unexpected character {c!r}", span_start)
    tokens.append(Token("eof", "", SourceSpan(file, line, col, 0)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.cur.span)

    def advance(self) -> Token:
        t = self.cur
        if t.kind != "eof":
            self.pos += 1
        return t

    def accept(self, text: str) -> Optional[Token]:
        t = self.cur
        if (t.kind == "punct" and t.text == text) or (
            t.kind == "ident" and t.text == text and text in KEYWORDS
        ):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            raise self.error(f"expected '{text}', found '{self.cur.text or 'end of input'}'")
        return t

    def ident(self, what: str = "identifier") -> Token:
        t = self.cur
        if t.kind != "ident" or t.text in KEYWORDS:
            raise self.error(f"expected {what}, found '{t.text or 'end of input'}'")
        if "__" in t.text:
            raise ParseError("identifiers may not contain '__' (reserved)", t.span)
        return self.advance()

    # -- literals and expressions ------------------------------------------

    def literal_value(self, t: VarType):
        neg = self.accept("-") is not None
        tok = self.cur
        if tok.kind == "int":
            self.advance()
            value = int(tok.text)
            value = -value if neg else value
            if t is VarType.BOOL:
                raise ParseError("boolean variable needs true/false", tok.span)
            return Fraction(value) if t is VarType.REAL else value
        if tok.kind == "real":
            self.advance()
            if t is not VarType.REAL:
                raise ParseError(f"real literal for {t.value} variable", tok.span)
            value = Fraction(tok.text)
            return -value if neg else value
        if tok.kind == "ident" and tok.text in ("true", "false") and not neg:
            self.advance()
            if t is not VarType.BOOL:
                raise ParseError(f"boolean literal for {t.value} variable", tok.span)
            return tok.text == "true"
        raise self.error("expected literal")

    def expr(self) -> Expr:
        return self._or()

    def _or(self) -> Expr:
        e = self._and()
        while self.accept("||"):
            e = Binary("||", e, self._and())
        return e

    def _and(self) -> Expr:
        e = self._cmp()
        while self.accept("&&"):
            e = Binary("&&", e, self._cmp())
        return e

    def _cmp(self) -> Expr:
        e = self._add()
        for op in ("<=", ">=", "==", "!=", "<", ">"):
            if self.accept(op):
                return Binary(op, e, self._add())
        return e

    def _add(self) -> Expr:
        e = self._mul()
        while True:
            if self.accept("+"):
                e = Binary("+", e, self._mul())
            elif self.accept("-"):
                e = Binary("-", e, self._mul())
            else:
                return e

    def _mul(self) -> Expr:
        e = self._unary()
        while self.accept("*"):
            e = Binary("*", e, self._unary())
        return e

    def _unary(self) -> Expr:
        if self.accept("-"):
            inner = self._unary()
            # fold negated literals so round-tripped trees compare equal
            if isinstance(inner, IntLit):
                return IntLit(-inner.value)
            if isinstance(inner, RealLit):
                return RealLit(-inner.value)
            return Unary("-", inner)
        if self.accept("!"):
            return Unary("!", self._unary())
        return self._atom()

    def _atom(self) -> Expr:
        tok = self.cur
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if tok.kind == "int":
            self.advance()
            return IntLit(int(tok.text))
        if tok.kind == "real":
            self.advance()
            return RealLit(Fraction(tok.text))
        if tok.kind == "ident" and tok.text == "true":
            self.advance()
            return BoolLit(True)
        if tok.kind == "ident" and tok.text == "false":
            self.advance()
            return BoolLit(False)
        return Var(self.ident("expression").text)

    # -- network -----------------------------------------------------------

    def network(self) -> Network:
        self.expect("network")
        name_tok = self.ident("network name")
        self.expect("{")
        variables: list[VarDecl] = []
        while self.cur.kind == "ident" and self.cur.text in ("int", "real", "bool"):
            t = VarType(self.advance().text)
            vname = self.ident("variable name").text
            self.expect("=")
            init = self.literal_value(t)
            self.expect(";")
            variables.append(VarDecl(vname, t, init))
        automata: list[Automaton] = []
        while self.accept("automaton"):
            automata.append(self._automaton_body())
        self.expect("}")
        if self.cur.kind != "eof":
            raise self.error("trailing input after network")
        net = Network(
            name=name_tok.text,
            variables=tuple(variables),
            automata=tuple(automata),
        )
        net = _detect_positional(net)
        diagnostics = validate_network(net)
        if diagnostics:
            raise ValidationError(diagnostics, name_tok.span)
        return net

    def _automaton_body(self) -> Automaton:
        name = self.ident("automaton name").text
        self.expect("{")
        self.expect("init")
        initial = self.ident("location").text
        self.expect(";")
        self.expect("locations")
        locations = [self.ident("location").text]
        while self.accept(","):
            locations.append(self.ident("location").text)
        self.expect(";")
        edges: list[Edge] = []
        while self.accept("edge"):
            source = self.ident("location").text
            self.expect("->")
            target = self.ident("location").text
            self.expect("on")
            action = self.ident("action").text
            guard: Expr = TRUE
            if self.accept("when"):
                guard = self.expr()
            updates: list[Assignment] = []
            if self.accept("do"):
                updates.append(self._assign())
                while self.accept(","):
                    updates.append(self._assign())
            self.expect(";")
            edges.append(Edge(source, action, guard, tuple(updates), target))
        self.expect("}")
        return Automaton(name, tuple(locations), initial, tuple(edges))

    def _assign(self) -> Assignment:
        target = self.ident("variable").text
        self.expect("=")
        return Assignment(target, self.expr())

    # -- query -------------------------------------------------------------

    def query(self) -> StateFormula:
        self.expect("EF")
        self.expect("(")
        literals = [self._query_literal()]
        while self.accept("&&"):
            literals.append(self._query_literal())
        self.expect(")")
        if self.cur.kind != "eof":
            raise self.error("trailing input after query")
        return StateFormula(tuple(literals))

    def _query_literal(self) -> Literal:
        negated = self.accept("!") is not None
        automaton = self.ident("automaton").text
        self.expect(".")
        location = self.ident("location").text
        return Literal(automaton, location, negated)


def _detect_positional(net: Network) -> Network:
    if not net.automata:
        return net
    decls = {v.name: v for v in net.variables}
    for a in net.automata:
        v = decls.get(net.positional_name(a.name))
        if v is None or v.type is not VarType.INT:
            return net
        if a.initial not in a.locations or v.init != a.locations.index(a.initial):
            return net
    return Network(net.name, net.variables, net.automata, positional=True)


def parse_network(text: str, file: str = "<input>") -> Network:
    """Parse and validate a `.net` model; raises ParseError with a span."""
    return _Parser(tokenize(text, file)).network()


def parse_query(text: str, net: Optional[Network] = None, file: str = "<query>") -> StateFormula:
    """Parse a `.q` reachability query; checks references when ``net`` given."""
    tokens = tokenize(text, file)
    f = _Parser(tokens).query()
    if net is not None:
        for lit in f.literals:
            try:
                a = net.automaton(lit.automaton)
            except Exception:
                raise ParseError(f"unknown automaton '{lit.automaton}'", tokens[0].span)
            if lit.location not in a.locations:
                raise ParseError(
                    f"unknown location '{lit.location}' in automaton '{lit.automaton}'",
                    tokens[0].span,
                )
    return f


# ---------------------------------------------------------------------------
# Pretty printing

_PREC = {
    "||": 1, "&&": 2,
    "<": 3, "<=": 3, "==": 3, "!=": 3, ">=": 3, ">": 3,
    "+": 4, "-": 4, "*": 5,
}


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return _fraction_to_decimal(value)
    return str(value)


def _fraction_to_decimal(f: Fraction) -> str:
    sign = "-" if f < 0 else ""
    f = abs(f)
    den = f.denominator
    k = 0
    while den % 2 == 0:
        den //= 2
        k += 1
    j = 0
    while den % 5 == 0:
        den //= 5
        j += 1
    if den != 1:
        raise ValueError(f"rational {f} has no finite decimal form")
    digits = max(k, j)
    scaled = f * 10**digits
    whole, frac = divmod(scaled.numerator, 10**digits)
    if digits == 0:
        return f"{sign}{whole}.0"
    return f"{sign}{whole}.{str(frac).zfill(digits)}"


def format_expr(e: Expr, parent_prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, RealLit):
        return _fraction_to_decimal(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        inner = format_expr(e.operand, 6)
        return f"{e.op}{inner}"
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        left = format_expr(e.left, prec)
        # right operand needs parens at equal precedence (left association)
        right = format_expr(e.right, prec + 1)
        s = f"{left} {e.op} {right}"
        return f"({s})" if prec < parent_prec else s
    raise ValueError(f"not an expression: {e!r}")


def print_network(net: Network) -> str:
    """Deterministic text form; parse(print(net)) equals net structurally."""
    lines = [f"network {net.name} {{"]
    for v in net.variables:
        lines.append(f"  {v.type.value} {v.name} = {format_value(v.init)};")
    if net.variables:
        lines.append("")
    for a in net.automata:
        lines.append(f"  automaton {a.name} {{")
        lines.append(f"    init {a.initial};")
        lines.append(f"    locations {', '.join(a.locations)};")
        for e in a.edges:
            parts = [f"    edge {e.source} -> {e.target} on {e.action}"]
            if e.guard != TRUE:
                parts.append(f"when {format_expr(e.guard)}")
            if e.updates:
                ups = ", ".join(f"{u.target} = {format_expr(u.expr)}" for u in e.updates)
                parts.append(f"do {ups}")
            lines.append(" ".join(parts) + ";")
        lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_query(f: StateFormula) -> str:
    lits = " && ".join(
        f"{'!' if lit.negated else ''}{lit.automaton}.{lit.location}"
        for lit in f.literals
    )
    return f"EF ({lits})\n"
