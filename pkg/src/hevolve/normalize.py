"""Canonicalization of heuristic source before embedding.

Three concerns: drop comments and docstrings, rewrite whitespace into one
deterministic style, leave the remaining lexical token stream untouched.
The canonical style is defined by the emitter below (4-space indents, one
statement per line, single spaces around binary operators, one blank line
between top-level definitions) rather than by an external formatter, so
output is bit-reproducible everywhere.

Unparsable sources cannot be canonicalized; ``normalize_degraded`` gives
them a whitespace-only cleanup so they can still be embedded.
"""

from __future__ import annotations

import ast
import io
import keyword
import tokenize
from dataclasses import dataclass

from .errors import SourceParseError

_OPENERS = {"(", "[", "{"}
_CLOSERS = {")", "]", "}"}


@dataclass
class NormalizedSource:
    """Canonical program text plus the id it was derived from."""

    text: str
    original_id: str = ""
    degraded: bool = False


def _docstring_positions(tree: ast.AST):
    """Start positions of docstring literals, and the positions where a
    ``pass`` must replace them because the enclosing body becomes empty.

    The whole leading run of bare string statements counts: otherwise
    stripping the first would promote the next into a fresh docstring and
    normalization would not reach a fixed point.
    """
    positions: set[tuple[int, int]] = set()
    lone: set[tuple[int, int]] = set()
    for node in ast.walk(tree):
        if isinstance(
            node, (ast.Module, ast.ClassDef, ast.FunctionDef, ast.AsyncFunctionDef)
        ):
            body = node.body
            run = 0
            while (
                run < len(body)
                and isinstance(body[run], ast.Expr)
                and isinstance(body[run].value, ast.Constant)
                and isinstance(body[run].value.value, str)
            ):
                positions.add((body[run].value.lineno, body[run].value.col_offset))
                run += 1
            if run and run == len(body) and not isinstance(node, ast.Module):
                lone.add((body[0].value.lineno, body[0].value.col_offset))
    return positions, lone


_COMPOUND_HEADS = {
    "if", "elif", "else", "for", "while", "try", "except", "finally",
    "with", "def", "class", "async", "match", "case",
}


def _logical_lines(source: str):
    """Split into (indent_level, tokens) logical lines.

    Depth-0 semicolons act as statement separators and are dropped,
    except on single-line compound statements (``if c: a = 1; b = 2``)
    where splitting would pull trailing statements out of the suite.
    """
    lines: list[tuple[int, list[tokenize.TokenInfo]]] = []
    level = 0
    depth = 0
    current: list[tokenize.TokenInfo] = []
    line_level = 0
    splittable = True
    for tok in tokenize.generate_tokens(io.StringIO(source).readline):
        kind = tok.type
        if kind in (tokenize.COMMENT, tokenize.NL, tokenize.ENCODING, tokenize.ENDMARKER):
            continue
        if kind == tokenize.INDENT:
            level += 1
            continue
        if kind == tokenize.DEDENT:
            level -= 1
            continue
        if kind == tokenize.NEWLINE:
            if current:
                lines.append((line_level, current))
                current = []
            depth = 0
            splittable = True
            continue
        if kind == tokenize.OP:
            if tok.string in _OPENERS:
                depth += 1
            elif tok.string in _CLOSERS:
                depth -= 1
            elif tok.string == ";" and depth == 0 and splittable:
                if current:
                    lines.append((line_level, current))
                    current = []
                continue
        if not current:
            line_level = level
            splittable = not (
                kind == tokenize.NAME and tok.string in _COMPOUND_HEADS
            )
        current.append(tok)
    if current:
        lines.append((line_level, current))
    return lines


def _is_operand(tok: tokenize.TokenInfo) -> bool:
    if tok.type in (tokenize.NUMBER, tokenize.STRING):
        return True
    if tok.type == tokenize.NAME:
        return not keyword.iskeyword(tok.string) or tok.string in (
            "True",
            "False",
            "None",
        )
    return tok.string in _CLOSERS or tok.string == "..."


def _render_line(tokens: list[tokenize.TokenInfo]) -> str:
    """Join one logical line's tokens with canonical spacing."""
    parts: list[str] = []
    # each open bracket carries (char, annotation_seen) for kwarg spacing
    stack: list[list] = []
    tight = True  # no space before the very first token
    prev: tokenize.TokenInfo | None = None

    for tok in tokens:
        s = tok.string
        space = not tight
        tight = False

        if s in _CLOSERS or s in (",", ";", ":"):
            space = False
        elif s in ("(", "["):
            if prev is not None and _is_operand(prev):
                space = False  # call or subscript
        elif s == "=" and stack and stack[-1][0] == "(" and not stack[-1][1]:
            space = False
            tight = True  # keyword argument / plain default value
        elif s in ("+", "-", "~", "*", "**") and (
            prev is None or not _is_operand(prev)
        ):
            tight = True  # unary sign, unpacking or star parameter

        if s == "@" and prev is None:
            tight = True  # decorator marker
        elif s == ".":
            space = False
            tight = True
        elif s in _OPENERS:
            stack.append([s, False])
            tight = True
        elif s in _CLOSERS:
            if stack:
                stack.pop()
        elif s == ":":
            if stack and stack[-1][0] == "[":
                tight = True  # slice
            elif stack and stack[-1][0] == "(":
                stack[-1][1] = True  # annotated parameter: keep "= " spaced
        elif s == ",":
            if stack:
                stack[-1][1] = False

        if space and parts:
            parts.append(" ")
        parts.append(s)
        prev = tok
    return "".join(parts)


def _starts_definition(tokens: list[tokenize.TokenInfo]) -> bool:
    head = tokens[0].string
    return head in ("def", "class", "async", "@")


def normalize(source: str, original_id: str = "") -> NormalizedSource:
    """Canonicalize parsable source; raises SourceParseError otherwise.

    Idempotent, and insensitive to comments and docstrings: two sources
    differing only in those normalize to identical text.
    """
    try:
        tree = ast.parse(source)
    except (SyntaxError, ValueError) as exc:
        raise SourceParseError(f"source does not parse: {exc}") from exc
    doc_positions, lone_docs = _docstring_positions(tree)

    emitted: list[str] = []
    last_top_decorator = False
    for level, tokens in _logical_lines(source):
        start = tokens[0].start
        if (
            start in doc_positions
            and all(t.type == tokenize.STRING for t in tokens)
        ):
            if start in lone_docs:
                emitted.append("    " * level + "pass")
            continue
        if level == 0 and _starts_definition(tokens) and emitted and not last_top_decorator:
            emitted.append("")
        last_top_decorator = level == 0 and tokens[0].string == "@"
        emitted.append("    " * level + _render_line(tokens))

    text = "\n".join(emitted) + "\n" if emitted else ""
    return NormalizedSource(text=text, original_id=original_id)


def normalize_degraded(source: str, original_id: str = "") -> NormalizedSource:
    """Whitespace-only cleanup for unparsable sources: drop blank lines and
    trailing whitespace, nothing else."""
    lines = [ln.rstrip() for ln in source.splitlines() if ln.strip()]
    text = "\n".join(lines) + "\n" if lines else ""
    return NormalizedSource(text=text, original_id=original_id, degraded=True)


def normalize_or_degrade(source: str, original_id: str = "") -> NormalizedSource:
    """Canonicalize when the source parses, degrade otherwise."""
    try:
        return normalize(source, original_id)
    except SourceParseError:
        return normalize_degraded(source, original_id)


def significant_tokens(source: str) -> list[tuple[int, str]]:
    """(type, text) pairs of the non-structural lexical tokens, with
    comments and docstrings removed. Used to check token preservation."""
    try:
        tree = ast.parse(source)
        doc_positions, _ = _docstring_positions(tree)
    except (SyntaxError, ValueError):
        doc_positions = set()
    out = []
    for level, tokens in _logical_lines(source):
        if tokens[0].start in doc_positions and all(
            t.type == tokenize.STRING for t in tokens
        ):
            continue
        out.extend((t.type, t.string) for t in tokens)
    return out
