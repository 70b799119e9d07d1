"""External SMT solver bridge: run a solver binary on an emitted script and
parse sat/unsat plus the satisfying assignment back into configurations.

Protocol: the script is written to a temp file and the solver is invoked as
``<binary> <args...> <file>``; stdout is read in full.  Any binary that speaks
SMT-LIB2 (``check-sat`` then ``get-model``) works; the default is ``z3`` from
PATH, falling back to the bundled WASM wrapper under ``tools/``.
"""

from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from .model import Configuration, ModelError, Network, Value, VarType
from .encoder import step_name


class SolverError(Exception):
    pass


class SolverUnavailable(SolverError):
    """No usable solver binary."""


def find_solver() -> Optional[str]:
    """Solver binary: $PRIOSYNTH_SOLVER, then `z3` on PATH, then the bundled
    WASM wrapper (requires node and an `npm install` under tools/)."""
    env = os.environ.get("PRIOSYNTH_SOLVER")
    if env:
        return env
    path = shutil.which("z3")
    if path:
        return path
    bundled = Path(__file__).resolve().parents[2] / "tools" / "z3"
    if bundled.is_file() and os.access(bundled, os.X_OK):
        return str(bundled)
    return None


@dataclass
class SolverConfig:
    binary: str = "z3"
    args: tuple[str, ...] = ()
    timeout: float = 60.0
    keep_scripts: Optional[str] = None
    recorder: Optional[list] = None  # appended (script, verdict) pairs
    _calls: int = field(default=0, repr=False)


@dataclass
class SolverModel:
    values: dict[str, Value]
    defaulted: set[str] = field(default_factory=set)

    def get(self, name: str, default=None):
        return self.values.get(name, default)


@dataclass
class SolverVerdict:
    status: str  # 'sat' | 'unsat' | 'unknown' | 'solver-error'
    model: Optional[SolverModel] = None
    stderr: str = ""
    wall_time: float = 0.0


def solve(script: str, cfg: SolverConfig) -> SolverVerdict:
    """Run the configured solver on ``script``; timeout maps to 'unknown'."""
    cfg._calls += 1
    if cfg.keep_scripts:
        os.makedirs(cfg.keep_scripts, exist_ok=True)
        dump = Path(cfg.keep_scripts) / f"call-{cfg._calls:04d}.smt2"
        dump.write_text(script)
    with tempfile.NamedTemporaryFile(
        "w", suffix=".smt2", prefix="priosynth-", delete=False
    ) as fh:
        fh.write(script)
        path = fh.name
    started = time.monotonic()
    try:
        proc = subprocess.run(
            [cfg.binary, *cfg.args, path],
            capture_output=True,
            text=True,
            timeout=cfg.timeout,
        )
    except FileNotFoundError:
        raise SolverUnavailable(f"solver binary '{cfg.binary}' not found")
    except subprocess.TimeoutExpired as exc:
        verdict = SolverVerdict(
            "unknown",
            stderr=(exc.stderr or b"").decode() if isinstance(exc.stderr, bytes)
            else (exc.stderr or ""),
            wall_time=time.monotonic() - started,
        )
        _record(cfg, script, verdict)
        return verdict
    finally:
        try:
            os.unlink(path)
        except OSError:
            pass
    elapsed = time.monotonic() - started
    verdict = _parse_output(proc.stdout, proc.stderr, elapsed)
    _record(cfg, script, verdict)
    return verdict


def _record(cfg: SolverConfig, script: str, verdict: SolverVerdict) -> None:
    if cfg.recorder is not None:
        cfg.recorder.append((script, verdict))


def _parse_output(stdout: str, stderr: str, elapsed: float) -> SolverVerdict:
    status = None
    rest_at = 0
    for line in stdout.splitlines(keepends=True):
        stripped = line.strip()
        rest_at += len(line)
        if stripped in ("sat", "unsat", "unknown"):
            status = stripped
            break
        if stripped and not stripped.startswith("(error"):
            # unexpected leading chatter; keep scanning
            continue
    if status is None:
        return SolverVerdict("solver-error", stderr=stderr or stdout, wall_time=elapsed)
    if status != "sat":
        return SolverVerdict(status, stderr=stderr, wall_time=elapsed)
    model = parse_model(stdout[rest_at:])
    return SolverVerdict("sat", model=model, stderr=stderr, wall_time=elapsed)


# ---------------------------------------------------------------------------
# Model parsing (s-expressions from get-model)


def _tokenize_sexpr(text: str) -> list[str]:
    out = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            out.append(c)
            i += 1
        elif c == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif c == "|":
            j = text.index("|", i + 1)
            out.append(text[i + 1:j])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            out.append(text[i:j])
            i = j
    return out


def _read_sexprs(tokens: list[str]):
    stack: list[list] = [[]]
    for t in tokens:
        if t == "(":
            stack.append([])
        elif t == ")":
            done = stack.pop()
            if not stack:
                raise SolverError("unbalanced model s-expression")
            stack[-1].append(done)
        else:
            stack[-1].append(t)
    if len(stack) != 1:
        raise SolverError("unbalanced model s-expression")
    return stack[0]


def _atom_value(node) -> Value:
    if isinstance(node, list):
        if not node:
            raise SolverError("empty value term")
        head = node[0]
        if head == "-":
            v = _atom_value(node[1])
            return -v
        if head == "/":
            return Fraction(_as_fraction(node[1]), _as_fraction(node[2]))
        raise SolverError(f"unsupported value term {node!r}")
    if node == "true":
        return True
    if node == "false":
        return False
    return _numeral(node)


def _numeral(tok: str) -> Value:
    if "." in tok:
        return Fraction(tok)
    return int(tok)


def _as_fraction(node) -> Fraction:
    v = _atom_value(node)
    if isinstance(v, bool):
        raise SolverError("boolean in rational position")
    return Fraction(v)


def parse_model(text: str) -> SolverModel:
    """Extract (define-fun name () sort value) entries from solver output."""
    forms = _read_sexprs(_tokenize_sexpr(text))
    values: dict[str, Value] = {}

    def walk(form):
        if not isinstance(form, list) or not form:
            return
        if form[0] == "model":
            for sub in form[1:]:
                walk(sub)
            return
        if form[0] == "define-fun" and len(form) >= 5 and form[2] == []:
            name = form[1]
            values[name] = _atom_value(form[4])
            return
        for sub in form:
            walk(sub)

    for form in forms:
        walk(form)
    return SolverModel(values)


# ---------------------------------------------------------------------------
# Configurations from models


def create_config(
    m: SolverModel,
    step: int,
    net: Network,
    parts: tuple[str, ...] = ("loc", "var", "act"),
) -> Configuration:
    """Configuration from the step-``step`` slice of a model.

    Missing entries default to: booleans false, numerics 0, automaton
    variables their step-0 value; defaults are tracked on the model.
    """
    loc: dict[str, str] = {}
    var: dict[str, Value] = {}
    act: dict[str, bool] = {}
    if "loc" in parts:
        for a in net.automata:
            name = step_name(a.name, step)
            code = m.get(name)
            if code is None:
                code = m.get(step_name(a.name, 0))
                m.defaulted.add(name)
            if code is None:
                raise SolverError(f"model lacks location for '{a.name}' at step {step}")
            if not isinstance(code, int) or not 0 <= code < len(a.locations):
                raise SolverError(
                    f"model location code {code!r} out of range for '{a.name}'"
                )
            loc[a.name] = a.locations[code]
    if "var" in parts:
        for v in net.variables:
            name = step_name(v.name, step)
            value = m.get(name)
            if value is None:
                m.defaulted.add(name)
                value = False if v.type is VarType.BOOL else 0
            if v.type is VarType.REAL and not isinstance(value, Fraction):
                if isinstance(value, bool):
                    raise SolverError(f"boolean model value for real '{v.name}'")
                value = Fraction(value)
            if v.type is VarType.INT and isinstance(value, Fraction):
                if value.denominator != 1:
                    raise SolverError(f"non-integer model value for int '{v.name}'")
                value = value.numerator
            var[v.name] = value
    if "act" in parts:
        for action in net.actions:
            name = step_name(action, step)
            value = m.get(name)
            if value is None:
                m.defaulted.add(name)
                value = False
            if not isinstance(value, bool):
                raise SolverError(f"non-boolean model value for action '{action}'")
            act[action] = value
    return Configuration.make(loc=loc, var=var, act=act, stp=step)
