"""Constrained action-program language: parser, validator, sandboxed interpreter."""

from .nodes import (
    BinOp,
    Call,
    FieldAccess,
    ForEach,
    FuncCall,
    If,
    Let,
    Literal,
    Name,
    Program,
    Span,
    UnaryOp,
)
from .parser import ParseError, parse, to_source
from .interpreter import ExecBudget, ExecTrace, Violation, execute, validate

__all__ = [
    "BinOp", "Call", "FieldAccess", "ForEach", "FuncCall", "If", "Let",
    "Literal", "Name", "Program", "Span", "UnaryOp",
    "ParseError", "parse", "to_source",
    "ExecBudget", "ExecTrace", "Violation", "execute", "validate",
]
