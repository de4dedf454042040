"""AST node types for the action language.

Spans are carried for error reporting but excluded from equality, so two
parses of equivalent source compare equal node-for-node.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


_NOSPAN = Span(0, 0)


@dataclass(frozen=True)
class Literal:
    value: str | float | int | bool | None
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass(frozen=True)
class Name:
    ident: str
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass(frozen=True)
class FieldAccess:
    # Access rooted at `input`: path ("objects",) means input.objects.
    path: tuple[str, ...]
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass(frozen=True)
class FuncCall:
    # Builtin call such as count(...), len(...), format(...).
    name: str
    args: tuple["Expr", ...]
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "-" | "not"
    operand: "Expr"
    span: Span = field(default=_NOSPAN, compare=False)


Expr = Literal | Name | FieldAccess | FuncCall | BinOp | UnaryOp


@dataclass(frozen=True)
class Call:
    # activity.<name>(args...)
    name: str  # fully qualified, e.g. "activity.talker"
    args: tuple[Expr, ...]
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass(frozen=True)
class Let:
    ident: str
    value: Expr
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass(frozen=True)
class If:
    condition: Expr
    then_body: tuple["Stmt", ...]
    else_body: tuple["Stmt", ...]
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass(frozen=True)
class ForEach:
    ident: str
    body: tuple["Stmt", ...]
    span: Span = field(default=_NOSPAN, compare=False)


Stmt = Call | Let | If | ForEach


@dataclass(frozen=True)
class Program:
    statements: tuple[Stmt, ...]
