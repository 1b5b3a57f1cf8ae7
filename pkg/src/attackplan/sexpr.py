"""Minimal s-expression reader with source positions.

One reader backs every textual format in the package (domain, problem,
scenario, milestone files). Symbols are case-insensitive identifiers and are
normalized to lowercase at read time; strings keep their case. Comments run
from ``;`` to end of line. Strings are double-quoted and support exactly two
escapes: ``\\"`` and ``\\\\``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError

# Symbol charset is deliberately narrow: identifiers, keywords (leading ':'),
# variables (leading '?') and constant tokens such as ports, versions and
# module paths (digits, '.', '/', '_').
_SYMBOL_CHARS = frozenset(
    "abcdefghijklmnopqrstuvwxyz" "ABCDEFGHIJKLMNOPQRSTUVWXYZ" "0123456789" "-_./:?"
)


@dataclass(frozen=True)
class Sym:
    text: str
    line: int
    col: int

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class Str:
    text: str
    line: int
    col: int

    def __str__(self) -> str:
        return self.text


@dataclass(frozen=True)
class SList:
    items: tuple
    line: int
    col: int

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __getitem__(self, i):
        return self.items[i]


Node = Sym | Str | SList


class _Reader:
    def __init__(self, text: str, path: str | None):
        self.text = text
        self.path = path
        self.pos = 0
        self.line = 1
        self.col = 1

    def error(self, message: str, line: int | None = None, col: int | None = None):
        return ParseError(
            message,
            self.line if line is None else line,
            self.col if col is None else col,
            self.path,
        )

    def _advance(self, ch: str) -> None:
        self.pos += 1
        if ch == "\n":
            self.line += 1
            self.col = 1
        else:
            self.col += 1

    def peek(self) -> str | None:
        return self.text[self.pos] if self.pos < len(self.text) else None

    def skip_blank(self) -> None:
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch == ";":
                while self.pos < len(self.text) and self.text[self.pos] != "\n":
                    self._advance(self.text[self.pos])
            elif ch in " \t\r\n":
                self._advance(ch)
            else:
                return

    def read_form(self) -> Node:
        self.skip_blank()
        ch = self.peek()
        if ch is None:
            raise self.error("unexpected end of input")
        if ch == "(":
            return self._read_list()
        if ch == ")":
            raise self.error("unbalanced ')'")
        if ch == '"':
            return self._read_string()
        return self._read_symbol()

    def _read_list(self) -> SList:
        line, col = self.line, self.col
        self._advance("(")
        items: list[Node] = []
        while True:
            self.skip_blank()
            ch = self.peek()
            if ch is None:
                raise self.error("missing ')' for '(' opened here", line, col)
            if ch == ")":
                self._advance(")")
                return SList(tuple(items), line, col)
            items.append(self.read_form())

    def _read_string(self) -> Str:
        line, col = self.line, self.col
        self._advance('"')
        out: list[str] = []
        while True:
            ch = self.peek()
            if ch is None:
                raise self.error("unterminated string", line, col)
            if ch == '"':
                self._advance(ch)
                return Str("".join(out), line, col)
            if ch == "\\":
                esc_line, esc_col = self.line, self.col
                self._advance(ch)
                nxt = self.peek()
                if nxt not in ('"', "\\"):
                    raise self.error(
                        "unsupported string escape (only \\\" and \\\\)", esc_line, esc_col
                    )
                out.append(nxt)
                self._advance(nxt)
                continue
            out.append(ch)
            self._advance(ch)

    def _read_symbol(self) -> Sym:
        line, col = self.line, self.col
        out: list[str] = []
        while True:
            ch = self.peek()
            if ch is None or ch in ' \t\r\n();"':
                break
            if ch not in _SYMBOL_CHARS:
                raise self.error(f"illegal character {ch!r} in identifier")
            out.append(ch)
            self._advance(ch)
        return Sym("".join(out).lower(), line, col)


def read_all(text: str, path: str | None = None) -> list[Node]:
    """Read every top-level form in ``text``."""
    reader = _Reader(text, path)
    forms: list[Node] = []
    while True:
        reader.skip_blank()
        if reader.peek() is None:
            return forms
        forms.append(reader.read_form())


def read_one(text: str, path: str | None = None) -> Node:
    """Read exactly one form; trailing content is an error."""
    reader = _Reader(text, path)
    form = reader.read_form()
    reader.skip_blank()
    if reader.peek() is not None:
        raise reader.error("trailing content after form")
    return form


def extract_lists(text: str) -> list[SList]:
    """Best-effort extraction of parenthesized forms embedded in prose.

    Used to pull candidate atoms out of free-form model replies: every '('
    is tried as the start of a form, unreadable spans are skipped.
    """
    found: list[SList] = []
    pos = 0
    while True:
        start = text.find("(", pos)
        if start < 0:
            return found
        reader = _Reader(text[start:], None)
        try:
            form = reader.read_form()
        except ParseError:
            pos = start + 1
            continue
        if isinstance(form, SList):
            found.append(form)
        pos = start + max(reader.pos, 1)
