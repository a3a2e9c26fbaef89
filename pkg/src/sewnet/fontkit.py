"""Fixed-size bitmap glyph supply: BDF parsing, normalization, scaling.

Fonts are immutable after construction; lookups are total (missing code
points come back as a hollow-box fallback), so rendering never fails on
unmapped text.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "MalformedFont",
    "BitmapGlyph",
    "BitmapFont",
    "parse_bdf",
    "serialize_bdf",
    "glyph_for",
    "scale_glyph",
    "builtin_font",
]


class MalformedFont(Exception):
    """BDF stream violates the format; message carries the line number."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.uint8)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class BitmapGlyph:
    codepoint: int
    width: int
    height: int
    rows: np.ndarray  # (height, width) of {0,1}

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("glyph dimensions must be positive")
        if self.rows.shape != (self.height, self.width):
            raise ValueError("row matrix does not match declared size")
        object.__setattr__(self, "rows", _frozen(self.rows))

    @property
    def ink_count(self) -> int:
        return int(self.rows.sum())


@dataclass(frozen=True, eq=False)
class BitmapFont:
    name: str
    nominal_size: int
    glyphs: dict[int, BitmapGlyph] = field(repr=False)
    fallback: BitmapGlyph = field(repr=False)


def glyph_for(font: BitmapFont, cp: int) -> BitmapGlyph:
    """Total lookup: unmapped code points yield the fallback glyph."""
    return font.glyphs.get(cp, font.fallback)


def scale_glyph(g: BitmapGlyph, side: int) -> BitmapGlyph:
    """Nearest-neighbor resample to a side x side square.

    Output pixel (r, c) = input pixel (floor(r*h/side), floor(c*w/side));
    identity sides therefore copy bit-exactly.
    """
    if side < 1:
        raise ValueError("side must be >= 1")
    ri = (np.arange(side) * g.height) // side
    ci = (np.arange(side) * g.width) // side
    return BitmapGlyph(g.codepoint, side, side, g.rows[np.ix_(ri, ci)])


def hollow_box(side: int, codepoint: int = 0xFFFD) -> BitmapGlyph:
    rows = np.zeros((side, side), dtype=np.uint8)
    rows[0, :] = rows[-1, :] = 1
    rows[:, 0] = rows[:, -1] = 1
    return BitmapGlyph(codepoint, side, side, rows)


# --- BDF 2.1 ---------------------------------------------------------------

class _RawGlyph:
    __slots__ = ("encoding", "w", "h", "xoff", "yoff", "bits")

    def __init__(self, encoding, w, h, xoff, yoff, bits):
        self.encoding = encoding
        self.w, self.h = w, h
        self.xoff, self.yoff = xoff, yoff
        self.bits = bits  # (h, w) uint8


def _ints(parts, n, lineno, what):
    if len(parts) < n:
        raise MalformedFont(f"line {lineno}: {what} needs {n} integer fields")
    try:
        return [int(p) for p in parts[:n]]
    except ValueError:
        raise MalformedFont(f"line {lineno}: non-integer field in {what}") from None


def _decode_hex_row(text: str, width: int, lineno: int) -> np.ndarray:
    nbytes = (width + 7) // 8
    if len(text) != 2 * nbytes or any(c not in "0123456789abcdefABCDEF" for c in text):
        raise MalformedFont(f"line {lineno}: bitmap row {text!r} is not {nbytes} hex bytes")
    raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
    # MSB of byte 0 is the leftmost pixel; pad bits past `width` are discarded.
    bits = np.unpackbits(raw)[:width]
    return bits


def parse_bdf(data: bytes) -> BitmapFont:
    """Parse a BDF 2.1 stream into a normalized fixed-box font.

    Glyphs with negative ENCODING are skipped. All kept glyphs are padded
    (never cropped) into a shared square box anchored per the BDF baseline
    and left-bearing metrics.
    """
    lines = data.decode("latin-1").splitlines()
    name = "unnamed"
    fbb = None  # (w, h, xoff, yoff)
    raw_glyphs: list[_RawGlyph] = []

    i = 0
    n = len(lines)

    def next_content():
        nonlocal i
        while i < n:
            ln = lines[i].strip()
            i += 1
            if ln and not ln.startswith("COMMENT"):
                return ln, i
        return None, i

    first, lineno = next_content()
    if first is None or not first.startswith("STARTFONT"):
        raise MalformedFont(f"line {lineno}: missing STARTFONT")

    saw_end = False
    while True:
        ln, lineno = next_content()
        if ln is None:
            break
        key, _, rest = ln.partition(" ")
        if key == "ENDFONT":
            saw_end = True
            break
        if key == "FONT":
            name = rest.strip() or name
        elif key == "FONTBOUNDINGBOX":
            fbb = tuple(_ints(rest.split(), 4, lineno, "FONTBOUNDINGBOX"))
        elif key == "STARTCHAR":
            raw_glyphs.append(_parse_char(next_content, lineno))

    if not saw_end:
        raise MalformedFont(f"line {lineno}: missing ENDFONT")

    return _normalize(name, fbb, [g for g in raw_glyphs if g is not None])


def _parse_char(next_content, start_line) -> _RawGlyph | None:
    encoding = None
    bbx = None
    bits = None
    while True:
        ln, lineno = next_content()
        if ln is None:
            raise MalformedFont(f"line {lineno}: glyph at line {start_line} never ends")
        key, _, rest = ln.partition(" ")
        if key == "ENCODING":
            encoding = _ints(rest.split(), 1, lineno, "ENCODING")[0]
        elif key == "BBX":
            bbx = tuple(_ints(rest.split(), 4, lineno, "BBX"))
        elif key == "BITMAP":
            if bbx is None:
                raise MalformedFont(f"line {lineno}: BITMAP before BBX")
            w, h = bbx[0], bbx[1]
            rows = []
            for _ in range(h):
                row_ln, row_no = next_content()
                if row_ln is None or row_ln == "ENDCHAR":
                    raise MalformedFont(
                        f"line {row_no}: BITMAP has fewer rows than BBX height {h}")
                rows.append(_decode_hex_row(row_ln, max(w, 1), row_no))
            bits = np.array(rows, dtype=np.uint8) if h else np.zeros((0, max(w, 1)), np.uint8)
        elif key == "ENDCHAR":
            if encoding is None:
                raise MalformedFont(f"line {lineno}: glyph without ENCODING")
            if bbx is None or bits is None:
                raise MalformedFont(f"line {lineno}: glyph without BBX/BITMAP")
            if encoding < 0:
                return None
            return _RawGlyph(encoding, bbx[0], bbx[1], bbx[2], bbx[3], bits)


def _normalize(name: str, fbb, raw: list[_RawGlyph]) -> BitmapFont:
    # Union of all glyph boxes (and the declared FBB) in baseline coordinates,
    # squared up; pad only, never crop.
    boxes = [(g.xoff, g.xoff + g.w, g.yoff, g.yoff + g.h) for g in raw]
    if fbb is not None:
        w, h, xo, yo = fbb
        boxes.append((xo, xo + w, yo, yo + h))
    if not boxes:
        boxes = [(0, 8, 0, 8)]
    left = min(b[0] for b in boxes)
    right = max(b[1] for b in boxes)
    bottom = min(b[2] for b in boxes)
    top = max(b[3] for b in boxes)
    side = max(right - left, top - bottom, 1)

    glyphs: dict[int, BitmapGlyph] = {}
    for g in raw:
        canvas = np.zeros((side, side), dtype=np.uint8)
        r0 = top - (g.yoff + g.h)
        c0 = g.xoff - left
        if g.h and g.w:
            canvas[r0:r0 + g.h, c0:c0 + g.w] = g.bits[:, :g.w]
        glyphs[g.encoding] = BitmapGlyph(g.encoding, side, side, canvas)

    return BitmapFont(name=name, nominal_size=side, glyphs=glyphs,
                      fallback=hollow_box(side))


def serialize_bdf(font: BitmapFont) -> bytes:
    """Emit the font as BDF 2.1; parse_bdf(serialize_bdf(f)) reproduces bitmaps."""
    s = font.nominal_size
    out = [
        "STARTFONT 2.1",
        f"FONT {font.name}",
        f"SIZE {s} 75 75",
        f"FONTBOUNDINGBOX {s} {s} 0 0",
        f"CHARS {len(font.glyphs)}",
    ]
    nbytes = (s + 7) // 8
    for cp in sorted(font.glyphs):
        g = font.glyphs[cp]
        out += [
            f"STARTCHAR uni{cp:04X}",
            f"ENCODING {cp}",
            "SWIDTH 500 0",
            f"DWIDTH {s} 0",
            f"BBX {s} {s} 0 0",
            "BITMAP",
        ]
        padded = np.zeros((s, nbytes * 8), dtype=np.uint8)
        padded[:, :s] = g.rows
        for row in np.packbits(padded, axis=1):
            out.append(row.tobytes().hex().upper())
        out.append("ENDCHAR")
    out.append("ENDFONT")
    out.append("")
    return "\n".join(out).encode("latin-1")


@functools.lru_cache(maxsize=1)
def builtin_font() -> BitmapFont:
    """The embedded 8x8 ASCII face (see embedded_font)."""
    from .embedded_font import GLYPHS_8X8

    glyphs = {}
    for ch, art in GLYPHS_8X8.items():
        rows = art.split("|")
        bits = np.array([[1 if c == "#" else 0 for c in row] for row in rows],
                        dtype=np.uint8)
        glyphs[ord(ch)] = BitmapGlyph(ord(ch), 8, 8, bits)
    return BitmapFont(name="builtin-8x8", nominal_size=8, glyphs=glyphs,
                      fallback=hollow_box(8))
