"""Lexer, recursive-descent parser, and pretty printer for the action language.

Grammar:

    program := stmt*
    stmt    := call
             | "let" IDENT "=" expr
             | "if" expr block ("else" block)?
             | "for" IDENT "in" "input.objects" block
    call    := "activity" "." IDENT "(" (expr ("," expr)*)? ")"
    block   := "{" stmt* "}"
    expr    := STRING | NUMBER | "true" | "false" | "none" | IDENT
             | "input" ("." IDENT)+
             | IDENT "(" (expr ("," expr)*)? ")"
             | expr binop expr | ("-" | "not") expr | "(" expr ")"

Line comments start with ``#``.  Binary operators, loosest first:
``or``, ``and``, comparisons, ``+ -``, ``* /``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .nodes import (
    BinOp, Call, Expr, FieldAccess, ForEach, FuncCall, If, Let, Literal,
    Name, Program, Span, Stmt, UnaryOp,
)


class ParseError(ValueError):
    def __init__(self, message: str, span: Span) -> None:
        super().__init__(f"syntax error at {span}: {message}")
        self.span = span


_KEYWORDS = {"let", "if", "else", "for", "in", "and", "or", "not", "true", "false", "none"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t]+)
  | (?P<comment>\#[^\n]*)
  | (?P<nl>\n)
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:\\.|[^"\\\n])*")
  | (?P<op><=|>=|==|!=|[-+*/<>(){},.=])
""", re.VERBOSE)

_ESCAPES = {'"': '"', "\\": "\\", "n": "\n", "t": "\t"}


@dataclass(frozen=True)
class Token:
    kind: str  # number | ident | string | op | keyword | eof
    text: str
    span: Span


def _unescape(raw: str, span: Span) -> str:
    body = raw[1:-1]
    out: list[str] = []
    i = 0
    while i < len(body):
        c = body[i]
        if c == "\\":
            esc = body[i + 1] if i + 1 < len(body) else ""
            if esc not in _ESCAPES:
                raise ParseError(f"unknown escape \\{esc}", span)
            out.append(_ESCAPES[esc])
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col, pos = 1, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", Span(line, col))
        kind = m.lastgroup
        text = m.group()
        span = Span(line, col)
        if kind == "nl":
            line += 1
            col = 1
        else:
            col += len(text)
            if kind == "ident" and text in _KEYWORDS:
                tokens.append(Token("keyword", text, span))
            elif kind not in ("ws", "comment"):
                tokens.append(Token(kind, text, span))
        pos = m.end()
    tokens.append(Token("eof", "", Span(line, col)))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]) -> None:
        self._tokens = tokens
        self._pos = 0

    # -- token helpers --

    @property
    def _cur(self) -> Token:
        return self._tokens[self._pos]

    def _advance(self) -> Token:
        tok = self._cur
        if tok.kind != "eof":
            self._pos += 1
        return tok

    def _check(self, kind: str, text: str | None = None) -> bool:
        tok = self._cur
        return tok.kind == kind and (text is None or tok.text == text)

    def _expect(self, kind: str, text: str | None = None) -> Token:
        if not self._check(kind, text):
            want = text or kind
            got = self._cur.text or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", self._cur.span)
        return self._advance()

    # -- statements --

    def program(self) -> Program:
        statements: list[Stmt] = []
        while not self._check("eof"):
            statements.append(self.statement())
        return Program(tuple(statements))

    def statement(self) -> Stmt:
        tok = self._cur
        if tok.kind == "keyword" and tok.text == "let":
            return self._let()
        if tok.kind == "keyword" and tok.text == "if":
            return self._if()
        if tok.kind == "keyword" and tok.text == "for":
            return self._for()
        if tok.kind == "ident" and tok.text == "activity":
            return self._call()
        raise ParseError(f"expected a statement, found {tok.text or 'end of input'!r}", tok.span)

    def _call(self) -> Call:
        start = self._expect("ident", "activity")
        self._expect("op", ".")
        name = self._expect("ident")
        self._expect("op", "(")
        args: list[Expr] = []
        if not self._check("op", ")"):
            args.append(self.expression())
            while self._check("op", ","):
                self._advance()
                args.append(self.expression())
        self._expect("op", ")")
        return Call(f"activity.{name.text}", tuple(args), start.span)

    def _let(self) -> Let:
        start = self._advance()
        ident = self._ident_or_keyword_name()
        self._expect("op", "=")
        return Let(ident, self.expression(), start.span)

    def _if(self) -> If:
        start = self._advance()
        condition = self.expression()
        then_body = self._block()
        else_body: tuple[Stmt, ...] = ()
        if self._check("keyword", "else"):
            self._advance()
            else_body = self._block()
        return If(condition, then_body, else_body, start.span)

    def _for(self) -> ForEach:
        start = self._advance()
        ident = self._ident_or_keyword_name()
        self._expect("keyword", "in")
        input_tok = self._expect("ident")
        if input_tok.text != "input":
            raise ParseError("for loops may only iterate input.objects", input_tok.span)
        self._expect("op", ".")
        field = self._expect("ident")
        if field.text != "objects":
            raise ParseError("for loops may only iterate input.objects", field.span)
        return ForEach(ident, self._block(), start.span)

    def _ident_or_keyword_name(self) -> str:
        # `input` is a legal binding target syntactically; the validator rejects it.
        tok = self._cur
        if tok.kind != "ident":
            raise ParseError(f"expected a name, found {tok.text or 'end of input'!r}", tok.span)
        return self._advance().text

    def _block(self) -> tuple[Stmt, ...]:
        self._expect("op", "{")
        statements: list[Stmt] = []
        while not self._check("op", "}"):
            if self._check("eof"):
                raise ParseError("unterminated block, expected '}'", self._cur.span)
            statements.append(self.statement())
        self._expect("op", "}")
        return tuple(statements)

    # -- expressions, loosest binding first --

    def expression(self) -> Expr:
        return self._or()

    def _binary(self, ops: tuple[str, ...], sub, kinds=("op",)) -> Expr:
        left = sub()
        while (self._cur.kind in kinds or self._cur.kind == "keyword") and self._cur.text in ops:
            op = self._advance()
            left = BinOp(op.text, left, sub(), op.span)
        return left

    def _or(self) -> Expr:
        return self._binary(("or",), self._and)

    def _and(self) -> Expr:
        return self._binary(("and",), self._not)

    def _not(self) -> Expr:
        if self._check("keyword", "not"):
            tok = self._advance()
            return UnaryOp("not", self._not(), tok.span)
        return self._comparison()

    def _comparison(self) -> Expr:
        return self._binary(("==", "!=", "<", "<=", ">", ">="), self._additive)

    def _additive(self) -> Expr:
        return self._binary(("+", "-"), self._multiplicative)

    def _multiplicative(self) -> Expr:
        return self._binary(("*", "/"), self._unary)

    def _unary(self) -> Expr:
        if self._check("op", "-"):
            tok = self._advance()
            return UnaryOp("-", self._unary(), tok.span)
        return self._primary()

    def _primary(self) -> Expr:
        tok = self._cur
        if tok.kind == "string":
            self._advance()
            return Literal(_unescape(tok.text, tok.span), tok.span)
        if tok.kind == "number":
            self._advance()
            value = float(tok.text) if "." in tok.text else int(tok.text)
            return Literal(value, tok.span)
        if tok.kind == "keyword" and tok.text in ("true", "false", "none"):
            self._advance()
            value = {"true": True, "false": False, "none": None}[tok.text]
            return Literal(value, tok.span)
        if tok.kind == "op" and tok.text == "(":
            self._advance()
            inner = self.expression()
            self._expect("op", ")")
            return inner
        if tok.kind == "ident":
            self._advance()
            if tok.text == "input" and self._check("op", "."):
                path: list[str] = []
                while self._check("op", "."):
                    self._advance()
                    path.append(self._expect("ident").text)
                return FieldAccess(tuple(path), tok.span)
            if self._check("op", "("):
                self._advance()
                args: list[Expr] = []
                if not self._check("op", ")"):
                    args.append(self.expression())
                    while self._check("op", ","):
                        self._advance()
                        args.append(self.expression())
                self._expect("op", ")")
                return FuncCall(tok.text, tuple(args), tok.span)
            return Name(tok.text, tok.span)
        raise ParseError(f"expected an expression, found {tok.text or 'end of input'!r}", tok.span)


def parse(source: str) -> Program:
    return _Parser(tokenize(source)).program()


# --- pretty printer -------------------------------------------------------------

def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


def _expr_source(expr: Expr) -> str:
    if isinstance(expr, Literal):
        v = expr.value
        if v is None:
            return "none"
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, str):
            return f'"{_escape(v)}"'
        return repr(v)
    if isinstance(expr, Name):
        return expr.ident
    if isinstance(expr, FieldAccess):
        return "input." + ".".join(expr.path)
    if isinstance(expr, FuncCall):
        return f"{expr.name}({', '.join(_expr_source(a) for a in expr.args)})"
    if isinstance(expr, UnaryOp):
        inner = _expr_source(expr.operand)
        return f"not ({inner})" if expr.op == "not" else f"-({inner})"
    if isinstance(expr, BinOp):
        return f"({_expr_source(expr.left)} {expr.op} {_expr_source(expr.right)})"
    raise TypeError(f"unknown expression node {expr!r}")


def _stmt_lines(stmt: Stmt, indent: int) -> list[str]:
    pad = "    " * indent
    if isinstance(stmt, Call):
        args = ", ".join(_expr_source(a) for a in stmt.args)
        return [f"{pad}{stmt.name}({args})"]
    if isinstance(stmt, Let):
        return [f"{pad}let {stmt.ident} = {_expr_source(stmt.value)}"]
    if isinstance(stmt, If):
        lines = [f"{pad}if {_expr_source(stmt.condition)} {{"]
        for s in stmt.then_body:
            lines.extend(_stmt_lines(s, indent + 1))
        if stmt.else_body:
            lines.append(f"{pad}}} else {{")
            for s in stmt.else_body:
                lines.extend(_stmt_lines(s, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    if isinstance(stmt, ForEach):
        lines = [f"{pad}for {stmt.ident} in input.objects {{"]
        for s in stmt.body:
            lines.extend(_stmt_lines(s, indent + 1))
        lines.append(f"{pad}}}")
        return lines
    raise TypeError(f"unknown statement node {stmt!r}")


def to_source(program: Program) -> str:
    lines: list[str] = []
    for stmt in program.statements:
        lines.extend(_stmt_lines(stmt, 0))
    return "\n".join(lines)
