"""Parsing of ``prediction,probability`` replies."""

from __future__ import annotations

import re
from dataclasses import dataclass

_NUMBER = r"(?:\d+(?:\.\d*)?|\.\d+)"
_STRICT = re.compile(rf"\s*([01])\s*,\s*({_NUMBER})\s*")
_LENIENT = re.compile(rf"(?<![\d.])([01])\s*,\s*({_NUMBER})(?![\d.])")


@dataclass(frozen=True)
class ParseResult:
    ok: bool
    label: int | None = None
    probability: float | None = None
    mode: str | None = None  # which rule matched
    error: str | None = None


def _accept(match, mode: str) -> ParseResult:
    p = float(match.group(2))
    if not 0.0 <= p <= 1.0:
        return ParseResult(False, error=f"probability {p} outside [0, 1]")
    return ParseResult(True, int(match.group(1)), p, mode)


def parse_response(text: str, mode: str = "strict") -> ParseResult:
    """``strict`` accepts only ``d,p`` up to whitespace; ``lenient`` also searches inside text."""
    if mode not in ("strict", "lenient"):
        raise ValueError(f"unknown parse mode {mode!r}")
    if text is None:
        return ParseResult(False, error="no response")
    m = _STRICT.fullmatch(text)
    if m:
        return _accept(m, "strict")
    if mode == "lenient":
        for m in _LENIENT.finditer(text):
            p = float(m.group(2))
            if 0.0 <= p <= 1.0:
                return _accept(m, "lenient")
            return ParseResult(False, error=f"probability {p} outside [0, 1]")
    return ParseResult(False, error=f"unparseable response {text[:80]!r}")
