"""S-expression reader/writer for expression trees.

This is the on-disk model format.  ``add sub mul`` print as ``+ - *``,
division prints as ``div`` (to keep ``-`` unambiguous as a sign),
everything else by name.  Variables print as ``x<index>``; constants use
the shortest decimal that parses back to the identical float.
"""

from __future__ import annotations

import math
import re

from .trees import (
    BINARY_SYMBOLS,
    UNARY_SYMBOLS,
    Node,
    constant,
    function,
    variable,
)


class ParseError(ValueError):
    """Malformed s-expression; ``position`` is the 1-based character offset."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


_PRINT_NAME = {"add": "+", "sub": "-", "mul": "*", "div": "div"}
_SYMBOL_FOR_TOKEN = {"+": "add", "-": "sub", "*": "mul", "div": "div"}
for _s in UNARY_SYMBOLS:
    _SYMBOL_FOR_TOKEN[_s] = _s

_VARIABLE_RE = re.compile(r"^x(\d+)$")
_NUMBER_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?$")


def format_constant(value: float) -> str:
    """Shortest exact decimal for a finite float ("1" rather than "1.0")."""
    if not math.isfinite(value):
        raise ValueError(f"cannot serialize non-finite constant {value!r}")
    if value == int(value) and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_sexpr(tree: Node) -> str:
    if tree.symbol == "const":
        return format_constant(tree.value)
    if tree.symbol == "var":
        return f"x{tree.value}"
    name = _PRINT_NAME.get(tree.symbol, tree.symbol)
    return "(" + " ".join([name] + [to_sexpr(c) for c in tree.children]) + ")"


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    i = 0
    n = len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
        elif c in "()":
            tokens.append((c, c, i))
            i += 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "()":
                j += 1
            tokens.append(("atom", text[i:j], i))
            i = j
    return tokens


def _leaf_from_atom(token: str, pos: int) -> Node:
    m = _VARIABLE_RE.match(token)
    if m:
        return variable(int(m.group(1)))
    if _NUMBER_RE.match(token):
        value = float(token)
        if not math.isfinite(value):
            raise ParseError(f"constant '{token}' overflows the float range", pos + 1)
        return constant(value)
    if token in _SYMBOL_FOR_TOKEN:
        raise ParseError(
            f"function symbol '{token}' must be applied in parentheses", pos + 1
        )
    raise ParseError(f"unknown symbol '{token}'", pos + 1)


def _close_function(frame, close_pos: int) -> Node:
    token, symbol, sym_pos, kids, _open_pos = frame
    if symbol is None:
        raise ParseError("empty '()' expression", close_pos + 1)
    if symbol in UNARY_SYMBOLS:
        if len(kids) != 1:
            raise ParseError(
                f"'{token}' expects exactly 1 argument, got {len(kids)}", sym_pos + 1
            )
    elif len(kids) < 2:
        raise ParseError(
            f"'{token}' expects at least 2 arguments, got {len(kids)}", sym_pos + 1
        )
    return function(symbol, kids)


def parse_sexpr(text: str) -> Node:
    """Parse one expression; errors report a 1-based character position."""
    tokens = _tokenize(text)
    # frame: [surface token, symbol, symbol position, children, '(' position]
    stack: list[list] = []
    result: Node | None = None

    def attach(node: Node, pos: int) -> None:
        nonlocal result
        if stack:
            stack[-1][3].append(node)
        elif result is None:
            result = node
        else:
            raise ParseError("unexpected trailing content", pos + 1)

    for kind, token, pos in tokens:
        if result is not None:
            raise ParseError("unexpected trailing content", pos + 1)
        if kind == "(":
            stack.append([None, None, None, [], pos])
        elif kind == ")":
            if not stack:
                raise ParseError("unexpected ')'", pos + 1)
            attach(_close_function(stack.pop(), pos), pos)
        elif stack and stack[-1][1] is None:
            symbol = _SYMBOL_FOR_TOKEN.get(token)
            if symbol is None:
                raise ParseError(f"unknown function symbol '{token}'", pos + 1)
            stack[-1][0] = token
            stack[-1][1] = symbol
            stack[-1][2] = pos
        else:
            attach(_leaf_from_atom(token, pos), pos)

    if stack:
        raise ParseError("missing ')'", stack[-1][4] + 1)
    if result is None:
        raise ParseError("empty input", 1)
    return result
