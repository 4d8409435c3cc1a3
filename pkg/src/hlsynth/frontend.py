"""Lexer, parser and width checker for the behavioral description language (BDL).

A BDL module is straight-line code built from assignments and nested
``seq``/``par`` blocks::

    module s_example(in a: 4, in b: 4, out s: 9) {
      s = a*a + b*b + 4*b;
    }

Timing follows the one-assignment-per-cycle rule: an assignment takes one
cycle, a ``seq`` block takes the sum of its children and a ``par`` block the
maximum.  Within a cycle every read observes the values committed by earlier
cycles.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

from .errors import LexError, ParseError, SemanticError, WidthError

MAX_WIDTH = 64

KEYWORDS = frozenset({"module", "in", "out", "var", "seq", "par", "int"})


class TokenKind(enum.Enum):
    IDENT = "identifier"
    INT = "integer-literal"
    KEYWORD = "keyword"
    OP = "operator"
    PUNCT = "punctuation"


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    text: str
    line: int
    column: int

    @property
    def value(self) -> int:
        return int(self.text, 0)


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>//[^\n]*)
  | (?P<int>0[bB][01]+|0[xX][0-9a-fA-F]+|[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><<|>>|[=+\-*&|^~])
  | (?P<punct>[(){},:;])
    """,
    re.VERBOSE,
)


def tokenize(source: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        column = pos - line_start + 1
        if m is None:
            raise LexError(line, column, source[pos])
        text, group = m.group(), m.lastgroup
        if group == "int":
            # a digit run glued to letters ("3a", "0b102") is not a literal
            if m.end() < len(source) and (source[m.end()].isalnum() or source[m.end()] == "_"):
                raise LexError(line, column + len(text), source[m.end()])
            if int(text, 0) >= 1 << 64:
                raise LexError(line, column, text, f"integer literal {text} does not fit in 64 bits")
            tokens.append(Token(TokenKind.INT, text, line, column))
        elif group == "ident":
            kind = TokenKind.KEYWORD if text in KEYWORDS else TokenKind.IDENT
            tokens.append(Token(kind, text, line, column))
        elif group == "op":
            tokens.append(Token(TokenKind.OP, text, line, column))
        elif group == "punct":
            tokens.append(Token(TokenKind.PUNCT, text, line, column))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    return tokens


# --- abstract syntax --------------------------------------------------------

@dataclass(frozen=True)
class Const:
    value: int
    line: int = field(default=0, compare=False, repr=False)
    column: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Var:
    name: str
    line: int = field(default=0, compare=False, repr=False)
    column: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Unary:
    op: str
    operand: Expr
    line: int = field(default=0, compare=False, repr=False)
    column: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Binary:
    op: str
    lhs: Expr
    rhs: Expr
    line: int = field(default=0, compare=False, repr=False)
    column: int = field(default=0, compare=False, repr=False)


Expr = Union[Const, Var, Unary, Binary]

BINARY_OPS = ("add", "sub", "mul", "and", "or", "xor", "shl", "shr")

_SYMBOL_TO_OP = {
    "+": "add", "-": "sub", "*": "mul", "&": "and",
    "|": "or", "^": "xor", "<<": "shl", ">>": "shr",
}
OP_SYMBOLS = {v: k for k, v in _SYMBOL_TO_OP.items()} | {"not": "~"}

# binding strength, loosest first
_PRECEDENCE = {"or": 1, "xor": 2, "and": 3, "shl": 4, "shr": 4, "add": 5, "sub": 5, "mul": 6}
_LEVELS = [
    {"|"},
    {"^"},
    {"&"},
    {"<<", ">>"},
    {"+", "-"},
    {"*"},
]


@dataclass(frozen=True)
class Assign:
    target: str
    expr: Expr
    line: int = field(default=0, compare=False, repr=False)
    column: int = field(default=0, compare=False, repr=False)


@dataclass(frozen=True)
class Seq:
    children: tuple[Stmt, ...] = ()


@dataclass(frozen=True)
class Par:
    children: tuple[Stmt, ...] = ()


Stmt = Union[Assign, Seq, Par]


@dataclass(frozen=True)
class PortDecl:
    name: str
    direction: str
    width: int


@dataclass(frozen=True)
class VarDecl:
    name: str
    width: int


@dataclass(frozen=True)
class Program:
    name: str
    ports: tuple[PortDecl, ...]
    locals: tuple[VarDecl, ...]
    body: Stmt

    @property
    def inputs(self) -> list[PortDecl]:
        return [p for p in self.ports if p.direction == "in"]

    @property
    def outputs(self) -> list[PortDecl]:
        return [p for p in self.ports if p.direction == "out"]

    def width_of(self, name: str) -> int:
        for decl in (*self.ports, *self.locals):
            if decl.name == name:
                return decl.width
        raise KeyError(name)


# --- traversal helpers ------------------------------------------------------

def walk_expr(expr: Expr) -> Iterator[Expr]:
    """Pre-order traversal of an expression tree."""
    yield expr
    if isinstance(expr, Unary):
        yield from walk_expr(expr.operand)
    elif isinstance(expr, Binary):
        yield from walk_expr(expr.lhs)
        yield from walk_expr(expr.rhs)


def iter_assigns(stmt: Stmt) -> Iterator[Assign]:
    if isinstance(stmt, Assign):
        yield stmt
    else:
        for child in stmt.children:
            yield from iter_assigns(child)


def cycle_count(stmt: Stmt) -> int:
    if isinstance(stmt, Assign):
        return 1
    if isinstance(stmt, Seq):
        return sum(cycle_count(c) for c in stmt.children)
    return max((cycle_count(c) for c in stmt.children), default=0)


def timed_assignments(stmt: Stmt) -> list[tuple[int, Assign]]:
    """Return ``(cycle, assign)`` pairs ordered by cycle, then source order.

    Cycles are 1-based and follow the structural timing rule.
    """
    out: list[tuple[int, Assign]] = []

    def visit(s: Stmt, base: int) -> int:
        if isinstance(s, Assign):
            out.append((base + 1, s))
            return 1
        if isinstance(s, Seq):
            t = base
            for c in s.children:
                t += visit(c, t)
            return t - base
        return max((visit(c, base) for c in s.children), default=0)

    visit(stmt, 0)
    out.sort(key=lambda pair: pair[0])
    return out


def expr_reads(expr: Expr) -> list[Var]:
    return [e for e in walk_expr(expr) if isinstance(e, Var)]


# --- parser -----------------------------------------------------------------

class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _fail(self, expected):
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = last.column + len(last.text) if last else 1
            raise ParseError(line, col, expected, "<end of input>")
        raise ParseError(tok.line, tok.column, expected, tok.text)

    def at(self, *texts: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind is not TokenKind.IDENT and tok.text in texts

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self._fail({text})
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def ident(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT:
            self._fail({"identifier"})
        self.pos += 1
        return tok

    def integer(self) -> Token:
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.INT:
            self._fail({"integer-literal"})
        self.pos += 1
        return tok

    def width(self) -> int:
        tok = self.integer()
        if not 1 <= tok.value <= MAX_WIDTH:
            raise SemanticError(f"width {tok.value} outside [1, {MAX_WIDTH}]", tok.line, tok.column)
        return tok.value

    def module(self) -> Program:
        self.expect("module")
        name = self.ident().text
        self.expect("(")
        ports = []
        if not self.at(")"):
            ports.append(self.port())
            while self.at(","):
                self.pos += 1
                ports.append(self.port())
        self.expect(")")
        self.expect("{")
        decls = []
        while self.at("var", "int"):
            decls.append(self.vardecl())
        if self.at("}"):
            body: Stmt = Seq(())
        else:
            body = self.stmt()
        self.expect("}")
        if self.peek() is not None:
            self._fail({"<end of input>"})
        return Program(name, tuple(ports), tuple(decls), body)

    def port(self) -> PortDecl:
        if not self.at("in", "out"):
            self._fail({"in", "out"})
        direction = self.tokens[self.pos].text
        self.pos += 1
        name = self.ident().text
        self.expect(":")
        return PortDecl(name, direction, self.width())

    def vardecl(self) -> VarDecl:
        if self.at("int"):
            # Handel-C style: int <width> <name>;
            self.pos += 1
            width = self.width()
            name = self.ident().text
        else:
            self.expect("var")
            name = self.ident().text
            self.expect(":")
            width = self.width()
        self.expect(";")
        return VarDecl(name, width)

    def stmt(self) -> Stmt:
        if self.at("seq", "par"):
            kind = self.tokens[self.pos].text
            self.pos += 1
            self.expect("{")
            children = []
            while not self.at("}"):
                if self.peek() is None:
                    self._fail({"}"})
                children.append(self.stmt())
            self.expect("}")
            return Seq(tuple(children)) if kind == "seq" else Par(tuple(children))
        tok = self.peek()
        if tok is None or tok.kind is not TokenKind.IDENT:
            self._fail({"identifier", "seq", "par"})
        target = self.ident()
        self.expect("=")
        expr = self.expr(0)
        self.expect(";")
        return Assign(target.text, expr, target.line, target.column)

    def expr(self, level: int) -> Expr:
        if level == len(_LEVELS):
            return self.unary()
        lhs = self.expr(level + 1)
        while self.peek() is not None and self.peek().kind is TokenKind.OP and self.peek().text in _LEVELS[level]:
            tok = self.tokens[self.pos]
            self.pos += 1
            rhs = self.expr(level + 1)
            op = _SYMBOL_TO_OP[tok.text]
            if op in ("shl", "shr") and not isinstance(rhs, Const):
                raise SemanticError("shift amount must be a constant literal", tok.line, tok.column)
            lhs = Binary(op, lhs, rhs, tok.line, tok.column)
        return lhs

    def unary(self) -> Expr:
        tok = self.peek()
        if tok is None:
            self._fail({"identifier", "integer-literal", "(", "~"})
        if tok.kind is TokenKind.OP and tok.text == "~":
            self.pos += 1
            return Unary("not", self.unary(), tok.line, tok.column)
        if tok.kind is TokenKind.INT:
            self.pos += 1
            return Const(tok.value, tok.line, tok.column)
        if tok.kind is TokenKind.IDENT:
            self.pos += 1
            return Var(tok.text, tok.line, tok.column)
        if self.at("("):
            self.pos += 1
            inner = self.expr(0)
            self.expect(")")
            return inner
        self._fail({"identifier", "integer-literal", "(", "~"})


def _check_semantics(program: Program) -> None:
    seen: dict[str, str] = {}
    for decl in (*program.ports, *program.locals):
        if decl.name in seen:
            raise SemanticError(f"duplicate declaration of '{decl.name}'")
        seen[decl.name] = getattr(decl, "direction", "var")

    for a in iter_assigns(program.body):
        if a.target not in seen:
            raise SemanticError(f"assignment to undeclared '{a.target}'", a.line, a.column)
        if seen[a.target] == "in":
            raise SemanticError(f"assignment to input port '{a.target}'", a.line, a.column)
        for v in expr_reads(a.expr):
            if v.name not in seen:
                raise SemanticError(f"use of undeclared '{v.name}'", v.line, v.column)

    _check_par(program.body)

    # reads of outputs/locals need a write in an earlier cycle
    written: dict[str, int] = {}
    for cycle, a in timed_assignments(program.body):
        for v in expr_reads(a.expr):
            if seen[v.name] != "in" and written.get(v.name, cycle) >= cycle:
                raise SemanticError(f"'{v.name}' is read before it is assigned", v.line, v.column)
        written.setdefault(a.target, cycle)


def _check_par(stmt: Stmt) -> set[str]:
    if isinstance(stmt, Assign):
        return {stmt.target}
    targets: set[str] = set()
    for child in stmt.children:
        child_targets = _check_par(child)
        if isinstance(stmt, Par):
            clash = targets & child_targets
            if clash:
                name = min(clash)
                raise SemanticError(f"'{name}' is assigned by more than one branch of a par block")
        targets |= child_targets
    return targets


def parse(tokens: list[Token]) -> Program:
    """Parse a token list into a :class:`Program` and enforce its invariants."""
    program = _Parser(tokens).module()
    _check_semantics(program)
    return program


def parse_source(source: str) -> Program:
    return parse(tokenize(source))


# --- widths -----------------------------------------------------------------

class WidthReport:
    """Evaluation width of every expression node, keyed by node identity."""

    def __init__(self):
        self._widths: dict[int, tuple[Expr, int]] = {}

    def _set(self, node: Expr, width: int) -> None:
        self._widths[id(node)] = (node, width)

    def __getitem__(self, node: Expr) -> int:
        return self._widths[id(node)][1]

    def __contains__(self, node) -> bool:
        return id(node) in self._widths

    def __len__(self) -> int:
        return len(self._widths)

    def items(self):
        return list(self._widths.values())


def check_widths(program: Program) -> WidthReport:
    """Annotate each expression node with its destination width.

    Every expression evaluates modulo ``2**w`` where ``w`` is the width of the
    assigned variable; a constant that does not fit in ``w`` bits is rejected.
    """
    report = WidthReport()
    for a in iter_assigns(program.body):
        w = program.width_of(a.target)
        for node in walk_expr(a.expr):
            if isinstance(node, Const) and node.value >= 1 << w:
                raise WidthError(node, node.value, w)
            report._set(node, w)
    return report


# --- pretty printer ---------------------------------------------------------

def format_expr(expr: Expr) -> str:
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, Unary):
        inner = format_expr(expr.operand)
        if isinstance(expr.operand, Binary):
            inner = f"({inner})"
        return f"~{inner}"
    prec = _PRECEDENCE[expr.op]
    lhs, rhs = format_expr(expr.lhs), format_expr(expr.rhs)
    if isinstance(expr.lhs, Binary) and _PRECEDENCE[expr.lhs.op] < prec:
        lhs = f"({lhs})"
    if isinstance(expr.rhs, Binary) and _PRECEDENCE[expr.rhs.op] <= prec:
        rhs = f"({rhs})"
    return f"{lhs} {OP_SYMBOLS[expr.op]} {rhs}"


def _format_stmt(stmt: Stmt, indent: int, lines: list[str]) -> None:
    pad = "  " * indent
    if isinstance(stmt, Assign):
        lines.append(f"{pad}{stmt.target} = {format_expr(stmt.expr)};")
        return
    lines.append(f"{pad}{'seq' if isinstance(stmt, Seq) else 'par'} {{")
    for child in stmt.children:
        _format_stmt(child, indent + 1, lines)
    lines.append(f"{pad}}}")


def pretty_print(program: Program) -> str:
    ports = ", ".join(f"{p.direction} {p.name}: {p.width}" for p in program.ports)
    lines = [f"module {program.name}({ports}) {{"]
    for v in program.locals:
        lines.append(f"  var {v.name}: {v.width};")
    _format_stmt(program.body, 1, lines)
    lines.append("}")
    return "\n".join(lines) + "\n"
