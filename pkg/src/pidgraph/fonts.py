"""Embedded 5x7 bitmap font: digits, upper-case letters, quote and dash.

Enough glyph coverage for pipeline-code strings; no external font files,
so rasterization is bit-deterministic everywhere.
"""

from __future__ import annotations

from typing import Dict, Tuple

import numpy as np

GLYPH_W = 5
GLYPH_H = 7

_RAW = {
    "0": ["01110", "10001", "10011", "10101", "11001", "10001", "01110"],
    "1": ["00100", "01100", "00100", "00100", "00100", "00100", "01110"],
    "2": ["01110", "10001", "00001", "00010", "00100", "01000", "11111"],
    "3": ["11111", "00010", "00100", "00010", "00001", "10001", "01110"],
    "4": ["00010", "00110", "01010", "10010", "11111", "00010", "00010"],
    "5": ["11111", "10000", "11110", "00001", "00001", "10001", "01110"],
    "6": ["00110", "01000", "10000", "11110", "10001", "10001", "01110"],
    "7": ["11111", "00001", "00010", "00100", "01000", "01000", "01000"],
    "8": ["01110", "10001", "10001", "01110", "10001", "10001", "01110"],
    "9": ["01110", "10001", "10001", "01111", "00001", "00010", "01100"],
    "A": ["01110", "10001", "10001", "11111", "10001", "10001", "10001"],
    "B": ["11110", "10001", "10001", "11110", "10001", "10001", "11110"],
    "C": ["01110", "10001", "10000", "10000", "10000", "10001", "01110"],
    "D": ["11110", "10001", "10001", "10001", "10001", "10001", "11110"],
    "E": ["11111", "10000", "10000", "11110", "10000", "10000", "11111"],
    "F": ["11111", "10000", "10000", "11110", "10000", "10000", "10000"],
    "G": ["01110", "10001", "10000", "10111", "10001", "10001", "01111"],
    "H": ["10001", "10001", "10001", "11111", "10001", "10001", "10001"],
    "I": ["01110", "00100", "00100", "00100", "00100", "00100", "01110"],
    "J": ["00111", "00010", "00010", "00010", "00010", "10010", "01100"],
    "K": ["10001", "10010", "10100", "11000", "10100", "10010", "10001"],
    "L": ["10000", "10000", "10000", "10000", "10000", "10000", "11111"],
    "M": ["10001", "11011", "10101", "10101", "10001", "10001", "10001"],
    "N": ["10001", "11001", "10101", "10011", "10001", "10001", "10001"],
    "O": ["01110", "10001", "10001", "10001", "10001", "10001", "01110"],
    "P": ["11110", "10001", "10001", "11110", "10000", "10000", "10000"],
    "Q": ["01110", "10001", "10001", "10001", "10101", "10010", "01101"],
    "R": ["11110", "10001", "10001", "11110", "10100", "10010", "10001"],
    "S": ["01111", "10000", "10000", "01110", "00001", "00001", "11110"],
    "T": ["11111", "00100", "00100", "00100", "00100", "00100", "00100"],
    "U": ["10001", "10001", "10001", "10001", "10001", "10001", "01110"],
    "V": ["10001", "10001", "10001", "10001", "10001", "01010", "00100"],
    "W": ["10001", "10001", "10001", "10101", "10101", "11011", "10001"],
    "X": ["10001", "10001", "01010", "00100", "01010", "10001", "10001"],
    "Y": ["10001", "10001", "01010", "00100", "00100", "00100", "00100"],
    "Z": ["11111", "00001", "00010", "00100", "01000", "10000", "11111"],
    '"': ["11011", "11011", "11011", "00000", "00000", "00000", "00000"],
    "-": ["00000", "00000", "00000", "11111", "00000", "00000", "00000"],
    " ": ["00000", "00000", "00000", "00000", "00000", "00000", "00000"],
}

GLYPHS: Dict[str, np.ndarray] = {
    ch: np.array([[c == "1" for c in row] for row in rows], dtype=bool)
    for ch, rows in _RAW.items()
}


def text_size(text: str, scale: int = 2) -> Tuple[int, int]:
    """(width, height) in pixels of the rendered text block."""
    if not text:
        return (0, 0)
    w = len(text) * (GLYPH_W + 1) * scale - scale
    return (w, GLYPH_H * scale)


def render_text(ink: np.ndarray, text: str, x: int, y: int, scale: int = 2) -> None:
    """Stamp text onto a boolean ink array; top-left glyph corner at (x, y)."""
    h, w = ink.shape
    cx = x
    for ch in text.upper():
        glyph = GLYPHS.get(ch)
        if glyph is None:
            raise KeyError(f"glyph {ch!r} not in embedded font")
        big = np.kron(glyph, np.ones((scale, scale), dtype=bool))
        gh, gw = big.shape
        y1, x1 = min(h, y + gh), min(w, cx + gw)
        if y < h and cx < w and y1 > max(0, y) and x1 > max(0, cx):
            ink[max(0, y) : y1, max(0, cx) : x1] |= big[: y1 - max(0, y), : x1 - max(0, cx)]
        cx += (GLYPH_W + 1) * scale
