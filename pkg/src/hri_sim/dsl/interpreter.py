"""Static validation and sandboxed execution of action programs.

Programs run against a read-only view of one FusedRecord and an adapter
that turns `activity.*` calls into ActionEvents.  Termination is by
construction: loops only iterate the record's object list and a statement
budget caps everything else.  All failures land in the ExecTrace; nothing
escapes as an exception.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol

from ..fusion import FusedRecord
from ..catalog import ApiCatalog
from .nodes import (
    BinOp, Call, Expr, FieldAccess, ForEach, FuncCall, If, Let, Literal,
    Name, Program, Span, Stmt, UnaryOp,
)

_BUILTINS = ("count", "len", "format")


@dataclass(frozen=True)
class Violation:
    message: str
    span: Span

    def __str__(self) -> str:
        return f"{self.message} at {self.span}"


def validate(program: Program, catalog: ApiCatalog) -> list[Violation]:
    """Check every activity call against the catalog; empty list means ok."""
    violations: list[Violation] = []

    def walk_expr(expr: Expr) -> None:
        if isinstance(expr, FuncCall):
            if expr.name not in _BUILTINS:
                violations.append(Violation(f"unknown function {expr.name!r}", expr.span))
            for a in expr.args:
                walk_expr(a)
        elif isinstance(expr, BinOp):
            walk_expr(expr.left)
            walk_expr(expr.right)
        elif isinstance(expr, UnaryOp):
            walk_expr(expr.operand)

    def walk_stmt(stmt: Stmt) -> None:
        if isinstance(stmt, Call):
            sig = catalog.lookup(stmt.name)
            if sig is None:
                violations.append(Violation(f"unknown function {stmt.name!r}", stmt.span))
            elif not (sig.min_arity <= len(stmt.args) <= sig.max_arity):
                violations.append(Violation(
                    f"{stmt.name} expects {sig.min_arity}"
                    + (f"..{sig.max_arity}" if sig.max_arity != sig.min_arity else "")
                    + f" arguments, got {len(stmt.args)}", stmt.span))
            for a in stmt.args:
                walk_expr(a)
        elif isinstance(stmt, Let):
            if stmt.ident == "input":
                violations.append(Violation("cannot assign to input", stmt.span))
            walk_expr(stmt.value)
        elif isinstance(stmt, If):
            walk_expr(stmt.condition)
            for s in stmt.then_body + stmt.else_body:
                walk_stmt(s)
        elif isinstance(stmt, ForEach):
            if stmt.ident == "input":
                violations.append(Violation("cannot assign to input", stmt.span))
            for s in stmt.body:
                walk_stmt(s)

    for stmt in program.statements:
        walk_stmt(stmt)
    return violations


# --- execution -------------------------------------------------------------------

@dataclass(frozen=True)
class ObjectRef:
    category: str
    world_pos: tuple[float, float, float]
    id: str | None = None
    dwell_ms: int = 0


@dataclass(frozen=True)
class ExecBudget:
    max_statements: int = 1000
    max_robot_calls: int = 16

    def __post_init__(self) -> None:
        if self.max_statements <= 0 or self.max_robot_calls <= 0:
            raise ValueError("budgets must be > 0")


@dataclass
class ExecTrace:
    statements_executed: int = 0
    events: list = field(default_factory=list)
    cot_notes: list[str] = field(default_factory=list)
    status: str = "ok"          # ok | budget_exceeded | runtime_error
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class ActionAdapter(Protocol):
    def perform(self, name: str, args: list): ...


class _Halt(Exception):
    def __init__(self, status: str, reason: str | None = None) -> None:
        self.status = status
        self.reason = reason


class _RuntimeFault(Exception):
    def __init__(self, message: str, span: Span) -> None:
        self.message = f"{message} at {span}"


def _record_env(record: FusedRecord) -> dict:
    gazed = None
    if record.gazed_object is not None:
        g = record.gazed_object
        gazed = ObjectRef(g.category, g.world_pos, id=g.id, dwell_ms=g.dwell_ms)
    return {
        "utterance": record.utterance,
        "utterance_source": record.utterance_source,
        "gazed_object": gazed,
        "objects": [ObjectRef(cat, pos) for cat, pos in record.objects],
        "scene_caption": record.scene_caption,
        "user_position": list(record.user_position),
        "current_step": {"id": record.current_step_id,
                         "instruction_text": record.current_step_instruction},
        "timestamp": record.timestamp_ms,
    }


def _render(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, ObjectRef):
        return value.category
    if isinstance(value, list):
        return "[" + ", ".join(_render(v) for v in value) + "]"
    if isinstance(value, float) and value.is_integer():
        return str(int(value))
    return str(value)


class _Interpreter:
    def __init__(self, record: FusedRecord, adapter: ActionAdapter, budget: ExecBudget) -> None:
        self._input = _record_env(record)
        self._adapter = adapter
        self._budget = budget
        self._env: dict[str, object] = {}
        self.trace = ExecTrace()

    def run(self, program: Program) -> ExecTrace:
        try:
            for stmt in program.statements:
                self._exec(stmt)
        except _Halt as halt:
            self.trace.status = halt.status
            self.trace.error = halt.reason
        except _RuntimeFault as fault:
            self.trace.status = "runtime_error"
            self.trace.error = fault.message
        return self.trace

    # -- statements --

    def _exec(self, stmt: Stmt) -> None:
        self.trace.statements_executed += 1
        if self.trace.statements_executed > self._budget.max_statements:
            raise _Halt("budget_exceeded", "statement budget exhausted")
        if isinstance(stmt, Call):
            self._exec_call(stmt)
        elif isinstance(stmt, Let):
            self._env[stmt.ident] = self._eval(stmt.value)
        elif isinstance(stmt, If):
            cond = self._eval(stmt.condition)
            if not isinstance(cond, bool):
                raise _RuntimeFault(f"if condition must be boolean, got {_render(cond)}", stmt.span)
            for s in stmt.then_body if cond else stmt.else_body:
                self._exec(s)
        elif isinstance(stmt, ForEach):
            for item in list(self._input["objects"]):
                self._env[stmt.ident] = item
                for s in stmt.body:
                    self._exec(s)

    def _exec_call(self, call: Call) -> None:
        args = [self._eval(a) for a in call.args]
        short = call.name.removeprefix("activity.")
        if short == "think_step_by_step":
            self.trace.cot_notes.append(_render(args[0]) if args else "")
            return
        if len(self.trace.events) >= self._budget.max_robot_calls:
            raise _Halt("budget_exceeded", "robot call budget exhausted")
        try:
            event = self._adapter.perform(short, args)
        except Exception as exc:
            raise _RuntimeFault(str(exc), call.span) from exc
        if event is not None:
            self.trace.events.append(event)

    # -- expressions --

    def _eval(self, expr: Expr):
        if isinstance(expr, Literal):
            return expr.value
        if isinstance(expr, Name):
            if expr.ident in self._env:
                return self._env[expr.ident]
            raise _RuntimeFault(f"undefined name {expr.ident!r}", expr.span)
        if isinstance(expr, FieldAccess):
            return self._field(expr)
        if isinstance(expr, FuncCall):
            return self._builtin(expr)
        if isinstance(expr, UnaryOp):
            return self._unary(expr)
        if isinstance(expr, BinOp):
            return self._binop(expr)
        raise _RuntimeFault(f"cannot evaluate {expr!r}", Span(0, 0))

    def _field(self, expr: FieldAccess):
        value: object = self._input
        for name in expr.path:
            if isinstance(value, dict):
                if name not in value:
                    raise _RuntimeFault(f"input has no field {name!r}", expr.span)
                value = value[name]
            elif isinstance(value, ObjectRef):
                if not hasattr(value, name):
                    raise _RuntimeFault(f"object has no field {name!r}", expr.span)
                value = getattr(value, name)
            else:
                raise _RuntimeFault(f"cannot access field {name!r} of {_render(value)}", expr.span)
        return value

    def _builtin(self, expr: FuncCall):
        args = [self._eval(a) for a in expr.args]
        if expr.name == "count":
            if len(args) != 2 or not isinstance(args[0], list) or not isinstance(args[1], str):
                raise _RuntimeFault("count expects (list, category)", expr.span)
            return sum(
                1 for item in args[0]
                if isinstance(item, ObjectRef) and item.category == args[1]
            )
        if expr.name == "len":
            if len(args) != 1 or not isinstance(args[0], (list, str)):
                raise _RuntimeFault("len expects a list or text", expr.span)
            return len(args[0])
        if expr.name == "format":
            if not args or not isinstance(args[0], str):
                raise _RuntimeFault("format expects a template text first", expr.span)
            template, values = args[0], args[1:]
            parts = template.split("{}")
            if len(parts) - 1 != len(values):
                raise _RuntimeFault(
                    f"format template has {len(parts) - 1} slots, got {len(values)} values",
                    expr.span)
            out = parts[0]
            for part, value in zip(parts[1:], values):
                out += _render(value) + part
            return out
        raise _RuntimeFault(f"unknown function {expr.name!r}", expr.span)

    def _unary(self, expr: UnaryOp):
        value = self._eval(expr.operand)
        if expr.op == "not":
            if not isinstance(value, bool):
                raise _RuntimeFault(f"not expects a boolean, got {_render(value)}", expr.span)
            return not value
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise _RuntimeFault(f"negation expects a number, got {_render(value)}", expr.span)
        return -value

    def _binop(self, expr: BinOp):
        if expr.op in ("and", "or"):
            left = self._eval(expr.left)
            if not isinstance(left, bool):
                raise _RuntimeFault(f"{expr.op} expects booleans", expr.span)
            # Short-circuit evaluation.
            if expr.op == "and" and not left:
                return False
            if expr.op == "or" and left:
                return True
            right = self._eval(expr.right)
            if not isinstance(right, bool):
                raise _RuntimeFault(f"{expr.op} expects booleans", expr.span)
            return right

        left, right = self._eval(expr.left), self._eval(expr.right)
        if expr.op == "==":
            return left == right
        if expr.op == "!=":
            return left != right
        if expr.op == "+" and isinstance(left, str) and isinstance(right, str):
            return left + right

        def num(v):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise _RuntimeFault(f"{expr.op} expects numbers, got {_render(v)}", expr.span)
            return v

        a, b = num(left), num(right)
        if expr.op == "+":
            return a + b
        if expr.op == "-":
            return a - b
        if expr.op == "*":
            return a * b
        if expr.op == "/":
            if b == 0:
                raise _RuntimeFault("division by zero", expr.span)
            return a / b
        if expr.op == "<":
            return a < b
        if expr.op == "<=":
            return a <= b
        if expr.op == ">":
            return a > b
        if expr.op == ">=":
            return a >= b
        raise _RuntimeFault(f"unknown operator {expr.op!r}", expr.span)


def execute(
    program: Program,
    record: FusedRecord,
    adapter: ActionAdapter,
    budget: ExecBudget | None = None,
) -> ExecTrace:
    """Run a validated program; every outcome is reported through the trace."""
    return _Interpreter(record, adapter, budget or ExecBudget()).run(program)
