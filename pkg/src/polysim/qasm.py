"""OpenQASM 2.0 front end.

Supports the qelib1-style gate subset of the IR, multiple quantum and
classical registers (flattened to global indices in declaration order),
register broadcasting, and constant angle arithmetic.  Gate definitions,
opaque declarations and classical conditionals are rejected.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass

from .circuit import PARAM_COUNTS, Circuit, CircuitError, Instruction

_GATE_ALIASES = {"u3": "u", "U": "u", "CX": "cx"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>//[^\n]*)
  | (?P<real>(\d+\.\d*|\.\d+)([eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<id>[a-zA-Z_][a-zA-Z0-9_]*)
  | (?P<arrow>->)
  | (?P<string>"[^"\n]*")
  | (?P<sym>[{}()\[\];,+\-*/^=])
    """,
    re.VERBOSE,
)

_FUNCTIONS = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "ln": math.log,
    "sqrt": math.sqrt,
}


class QasmError(ValueError):
    """Parse or validation failure, carrying source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, line_start = 1, 0
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QasmError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, chunk, line, m.start() - line_start + 1))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = m.start() + chunk.rindex("\n") + 1
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def _err(self, message: str) -> QasmError:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            return QasmError(message + " (at end of input)", last.line, last.col)
        return QasmError(message, tok.line, tok.col)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            raise self._err("unexpected end of input")
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.peek()
        if tok is None or tok.text != text:
            raise self._err(f"expected {text!r}")
        return self.next()

    def accept(self, text: str) -> bool:
        tok = self.peek()
        if tok is not None and tok.text == text:
            self.pos += 1
            return True
        return False

    # --- angle expressions ------------------------------------------------

    def parse_expr(self) -> float:
        value = self.parse_term()
        while True:
            if self.accept("+"):
                value += self.parse_term()
            elif self.accept("-"):
                value -= self.parse_term()
            else:
                return value

    def parse_term(self) -> float:
        value = self.parse_factor()
        while True:
            if self.accept("*"):
                value *= self.parse_factor()
            elif self.accept("/"):
                value /= self.parse_factor()
            else:
                return value

    def parse_factor(self) -> float:
        if self.accept("-"):
            return -self.parse_factor()
        if self.accept("+"):
            return self.parse_factor()
        base = self.parse_atom()
        if self.accept("^"):
            return base ** self.parse_factor()
        return base

    def parse_atom(self) -> float:
        tok = self.next()
        if tok.kind in ("real", "int"):
            return float(tok.text)
        if tok.kind == "id":
            if tok.text == "pi":
                return math.pi
            if tok.text in _FUNCTIONS:
                self.expect("(")
                arg = self.parse_expr()
                self.expect(")")
                return _FUNCTIONS[tok.text](arg)
            raise QasmError(f"unknown identifier in expression: {tok.text}", tok.line, tok.col)
        if tok.text == "(":
            value = self.parse_expr()
            self.expect(")")
            return value
        raise QasmError(f"unexpected token {tok.text!r} in expression", tok.line, tok.col)


def parse_qasm(text: str, name: str = "circuit") -> Circuit:
    """Parse OpenQASM 2.0 source text into a Circuit."""
    p = _Parser(_tokenize(text))

    tok = p.peek()
    if tok is None or tok.text != "OPENQASM":
        raise QasmError("expected OPENQASM 2.0 header", 1, 1)
    p.next()
    version = p.next()
    if version.kind != "real" or not version.text.startswith("2."):
        raise QasmError(f"unsupported version {version.text!r}", version.line, version.col)
    p.expect(";")

    qregs: dict[str, tuple[int, int]] = {}  # name -> (offset, size)
    cregs: dict[str, tuple[int, int]] = {}
    n_qubits = 0
    n_clbits = 0
    instructions: list[Instruction] = []

    def parse_argument() -> tuple[str, int | None, _Token]:
        tok = p.next()
        if tok.kind != "id":
            raise QasmError(f"expected a register name, got {tok.text!r}", tok.line, tok.col)
        index = None
        if p.accept("["):
            idx_tok = p.next()
            if idx_tok.kind != "int":
                raise QasmError("expected an integer index", idx_tok.line, idx_tok.col)
            index = int(idx_tok.text)
            p.expect("]")
        return tok.text, index, tok

    def resolve(regs: dict[str, tuple[int, int]], arg, what: str) -> list[int]:
        reg_name, index, tok = arg
        if reg_name not in regs:
            raise QasmError(f"undeclared {what} register {reg_name!r}", tok.line, tok.col)
        offset, size = regs[reg_name]
        if index is None:
            return [offset + i for i in range(size)]
        if not 0 <= index < size:
            raise QasmError(
                f"index {index} out of range for {reg_name}[{size}]", tok.line, tok.col
            )
        return [offset + index]

    def broadcast(groups: list[list[int]], tok: _Token) -> list[tuple[int, ...]]:
        length = 1
        for g in groups:
            if len(g) > 1:
                if length > 1 and len(g) != length:
                    raise QasmError("mismatched register sizes", tok.line, tok.col)
                length = len(g)
        rows = []
        for i in range(length):
            rows.append(tuple(g[i] if len(g) > 1 else g[0] for g in groups))
        return rows

    while p.peek() is not None:
        tok = p.next()
        if tok.text == "include":
            inc = p.next()
            if inc.text != '"qelib1.inc"':
                raise QasmError(f"unsupported include {inc.text}", inc.line, inc.col)
            p.expect(";")
            continue
        if tok.text in ("qreg", "creg"):
            name_tok = p.next()
            if name_tok.kind != "id":
                raise QasmError("expected a register name", name_tok.line, name_tok.col)
            p.expect("[")
            size_tok = p.next()
            if size_tok.kind != "int" or int(size_tok.text) < 1:
                raise QasmError("register size must be a positive integer", size_tok.line, size_tok.col)
            p.expect("]")
            p.expect(";")
            size = int(size_tok.text)
            regs = qregs if tok.text == "qreg" else cregs
            if name_tok.text in qregs or name_tok.text in cregs:
                raise QasmError(f"register {name_tok.text!r} already declared", name_tok.line, name_tok.col)
            if tok.text == "qreg":
                regs[name_tok.text] = (n_qubits, size)
                n_qubits += size
            else:
                regs[name_tok.text] = (n_clbits, size)
                n_clbits += size
            continue
        if tok.text == "if":
            raise QasmError("classical conditionals are not supported", tok.line, tok.col)
        if tok.text in ("gate", "opaque"):
            raise QasmError(f"{tok.text} definitions are not supported", tok.line, tok.col)
        if tok.text == "measure":
            src = parse_argument()
            p.expect("->")
            dst = parse_argument()
            p.expect(";")
            qubits = resolve(qregs, src, "quantum")
            clbits = resolve(cregs, dst, "classical")
            if len(qubits) != len(clbits):
                raise QasmError("measure register sizes differ", tok.line, tok.col)
            for q, c in zip(qubits, clbits):
                instructions.append(Instruction("measure", (q,), clbit=c))
            continue
        if tok.text == "reset":
            arg = parse_argument()
            p.expect(";")
            for q in resolve(qregs, arg, "quantum"):
                instructions.append(Instruction("reset", (q,)))
            continue
        if tok.text == "barrier":
            args = [parse_argument()]
            while p.accept(","):
                args.append(parse_argument())
            p.expect(";")
            qubits: list[int] = []
            for arg in args:
                qubits.extend(resolve(qregs, arg, "quantum"))
            try:
                instructions.append(Instruction("barrier", tuple(qubits)))
            except CircuitError as exc:
                raise QasmError(str(exc), tok.line, tok.col) from None
            continue
        if tok.kind == "id":
            kind = _GATE_ALIASES.get(tok.text, tok.text)
            if kind not in PARAM_COUNTS and kind not in (
                "h", "x", "y", "z", "s", "sdg", "t", "tdg", "cx", "cz", "swap",
            ):
                raise QasmError(f"unsupported gate {tok.text!r}", tok.line, tok.col)
            params: tuple[float, ...] = ()
            if p.peek() is not None and p.peek().text == "(":
                p.expect("(")
                values = [p.parse_expr()]
                while p.accept(","):
                    values.append(p.parse_expr())
                p.expect(")")
                params = tuple(values)
            if len(params) != PARAM_COUNTS.get(kind, 0):
                raise QasmError(
                    f"{tok.text} expects {PARAM_COUNTS.get(kind, 0)} parameter(s)",
                    tok.line,
                    tok.col,
                )
            args = [parse_argument()]
            while p.accept(","):
                args.append(parse_argument())
            p.expect(";")
            groups = [resolve(qregs, arg, "quantum") for arg in args]
            for row in broadcast(groups, tok):
                try:
                    instructions.append(Instruction(kind, row, params))
                except CircuitError as exc:
                    raise QasmError(str(exc), tok.line, tok.col) from None
            continue
        raise QasmError(f"unexpected token {tok.text!r}", tok.line, tok.col)

    if n_qubits == 0:
        raise QasmError("no quantum register declared", 1, 1)
    return Circuit(n_qubits, n_clbits, instructions, name=name)


def _format_param(value: float) -> str:
    # repr round-trips float64 exactly, which keeps parse(to_qasm(c)) == c.
    return repr(float(value))


def to_qasm(c: Circuit) -> str:
    """Serialize a Circuit to canonical OpenQASM 2.0 text."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{c.n_qubits}];"]
    if c.n_clbits:
        lines.append(f"creg c[{c.n_clbits}];")
    for inst in c.instructions:
        if inst.kind == "measure":
            lines.append(f"measure q[{inst.qubits[0]}] -> c[{inst.clbit}];")
        elif inst.kind in ("reset", "barrier"):
            args = ",".join(f"q[{q}]" for q in inst.qubits)
            lines.append(f"{inst.kind} {args};")
        else:
            head = inst.kind
            if inst.params:
                head += "(" + ",".join(_format_param(v) for v in inst.params) + ")"
            args = ",".join(f"q[{q}]" for q in inst.qubits)
            lines.append(f"{head} {args};")
    return "\n".join(lines) + "\n"


def parse_qasm_file(path) -> Circuit:
    from pathlib import Path

    path = Path(path)
    return parse_qasm(path.read_text(), name=path.stem)
