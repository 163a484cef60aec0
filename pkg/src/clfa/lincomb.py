"""Parsing of linear combinations such as ``x^2 + 2*xy - y``."""

from __future__ import annotations

import re

_TERM = re.compile(r"\s*([+-])?\s*(?:(\d+)\s*\*\s*)?([A-Za-z0-9_^.']+)\s*")


def parse_lincomb(text: str) -> list[tuple[int, str]]:
    """Split ``text`` into ``(coefficient, name)`` terms.

    A term without ``*`` is a bare basis name, so ``1`` names the unit rather
    than the integer one; ``0`` alone denotes the empty sum.
    """
    text = text.strip()
    if text in ("", "0"):
        return []
    terms: list[tuple[int, str]] = []
    pos = 0
    first = True
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse term at column {pos + 1}: {text[pos:]!r}")
        sign, coef, name = m.groups()
        if sign is None and not first:
            raise ValueError(f"missing '+' or '-' before {name!r} at column {pos + 1}")
        value = int(coef) if coef is not None else 1
        if sign == "-":
            value = -value
        terms.append((value, name))
        pos = m.end()
        first = False
    return terms


def format_lincomb(coeffs, names, p: int) -> str:
    parts = []
    for c, name in zip(coeffs, names):
        c = int(c) % p
        if c == 0:
            continue
        parts.append(name if c == 1 else f"{c}*{name}")
    return " + ".join(parts) if parts else "0"
