"""Two-dimensional text embedding: words/characters drawn into a fixed grid.

Two modes:
  * cjk - one square cell per character (works as-is for square scripts);
  * sew - one cell per word, the word's N letters packed into a
    k x k sub-grid with k = ceil(sqrt(N)) and letter side floor(l/k).

Rendering is a pure memory-write: deterministic, binary {0,255} pixels,
identical channel planes.
"""

from __future__ import annotations

import math
import struct
import unicodedata
import zlib
from dataclasses import dataclass, field

import numpy as np

from .fontkit import BitmapFont, glyph_for, scale_glyph

__all__ = [
    "default_canvas",
    "UnsupportedFormat",
    "MalformedImage",
    "CanvasSpec",
    "PlacedToken",
    "LayoutPlan",
    "SuperImage",
    "tokenize",
    "layout",
    "render",
    "export_image",
    "import_image",
]


class UnsupportedFormat(Exception):
    pass


class MalformedImage(Exception):
    pass


@dataclass(frozen=True)
class CanvasSpec:
    side: int = 224
    grid_rows: int = 8
    grid_cols: int = 8
    cell_side: int = 28
    margin: int = 0

    def __post_init__(self):
        if self.cell_side < 4:
            raise ValueError("cell_side below 4 renders unreadable glyphs")
        if self.grid_rows < 1 or self.grid_cols < 1 or self.margin < 0:
            raise ValueError("grid must be at least 1x1 with non-negative margin")
        if (self.grid_rows * self.cell_side + 2 * self.margin > self.side
                or self.grid_cols * self.cell_side + 2 * self.margin > self.side):
            raise ValueError("grid does not fit the canvas")

    @property
    def capacity(self) -> int:
        return self.grid_rows * self.grid_cols


def default_canvas(side: int = 224) -> CanvasSpec:
    """Square 8x8 layout for the given side, shrinking the grid when the
    cells would drop below the 4-pixel readability floor."""
    rows = 8
    cell = side // rows
    if cell < 4:
        rows = max(1, side // 4)
        cell = side // rows
    return CanvasSpec(side=side, grid_rows=rows, grid_cols=rows,
                      cell_side=cell)


@dataclass(frozen=True)
class PlacedToken:
    text: str
    cell_row: int
    cell_col: int
    k: int           # sub-grid is k x k
    letter_side: int  # floor(cell_side / k)


@dataclass(frozen=True)
class LayoutPlan:
    tokens: tuple[PlacedToken, ...]
    truncated: bool

    def token_texts(self) -> list[str]:
        """Row-major token sequence; the plan-level inverse of layout()."""
        return [t.text for t in sorted(self.tokens,
                                       key=lambda t: (t.cell_row, t.cell_col))]

    def letter_cells(self, spec: CanvasSpec):
        """Yield (token, letter_index, y, x, side) pixel rectangles."""
        for t in self.tokens:
            cy = spec.margin + t.cell_row * spec.cell_side
            cx = spec.margin + t.cell_col * spec.cell_side
            for i in range(len(t.text)):
                yield t, i, cy + (i // t.k) * t.letter_side, \
                    cx + (i % t.k) * t.letter_side, t.letter_side


@dataclass(frozen=True, eq=False)
class SuperImage:
    side: int
    channels: int
    pixels: np.ndarray  # (channels, side, side) uint8, values {0,255}

    def plane(self) -> np.ndarray:
        return self.pixels[0]


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str, mode: str) -> list[str]:
    """Split text into drawable tokens.

    sew: whitespace-delimited words; punctuation at word edges is peeled off
    into standalone one-character tokens (interior punctuation, e.g. hyphens,
    stays inside the word). cjk: one token per non-whitespace character.
    """
    if mode == "cjk":
        return [ch for ch in text if not ch.isspace()]
    if mode != "sew":
        raise ValueError(f"unknown mode {mode!r}")
    tokens: list[str] = []
    for chunk in text.split():
        lead: list[str] = []
        trail: list[str] = []
        while chunk and _is_punct(chunk[0]):
            lead.append(chunk[0])
            chunk = chunk[1:]
        while chunk and _is_punct(chunk[-1]):
            trail.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(lead)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trail))
    return tokens


def layout(tokens: list[str], spec: CanvasSpec, mode: str = "sew") -> LayoutPlan:
    """Assign tokens to grid cells row-major; overflow is dropped and flagged.

    Each token of N letters gets a k x k sub-grid, k = ceil(sqrt(N)), each
    letter a square of floor(cell_side / k) pixels.
    """
    placed = []
    for i, tok in enumerate(tokens[:spec.capacity]):
        n = max(len(tok), 1)
        k = math.isqrt(n - 1) + 1  # ceil(sqrt(n)) for n >= 1
        placed.append(PlacedToken(
            text=tok,
            cell_row=i // spec.grid_cols,
            cell_col=i % spec.grid_cols,
            k=k,
            letter_side=spec.cell_side // k,
        ))
    return LayoutPlan(tokens=tuple(placed), truncated=len(tokens) > spec.capacity)


def render(plan: LayoutPlan, spec: CanvasSpec, font: BitmapFont,
           channels: int = 3, invert: bool = False) -> SuperImage:
    """Stamp every letter's glyph into its cell. Pure write, no blending."""
    canvas = np.zeros((spec.side, spec.side), dtype=np.uint8)
    for t, i, y, x, side in plan.letter_cells(spec):
        if side < 1:
            continue  # word too long for the cell to give each letter a pixel
        g = scale_glyph(glyph_for(font, ord(t.text[i])), side)
        region = canvas[y:y + side, x:x + side]
        region[g.rows > 0] = 255
    if invert:
        canvas = 255 - canvas
    return SuperImage(side=spec.side, channels=channels,
                      pixels=np.repeat(canvas[None, :, :], channels, axis=0))


# --- lossless export -------------------------------------------------------

def export_image(img: SuperImage, format: str) -> bytes:
    if format == "pgm":
        return _write_pgm(img.plane())
    if format == "png":
        if img.channels == 1:
            return _write_png(img.plane()[:, :, None])
        if img.channels == 3:
            return _write_png(np.moveaxis(img.pixels[:3], 0, 2))
        raise UnsupportedFormat(f"png export needs 1 or 3 channels, got {img.channels}")
    raise UnsupportedFormat(f"unknown image format {format!r}")


def import_image(data: bytes) -> SuperImage:
    if data[:2] == b"P5":
        plane = _read_pgm(data)
        return SuperImage(side=plane.shape[0], channels=1, pixels=plane[None])
    if data[:8] == _PNG_SIG:
        arr = _read_png(data)  # (H, W, C)
        return SuperImage(side=arr.shape[0], channels=arr.shape[2],
                          pixels=np.moveaxis(arr, 2, 0))
    raise UnsupportedFormat("not a P5 PGM or PNG stream")


def _write_pgm(plane: np.ndarray) -> bytes:
    h, w = plane.shape
    return b"P5\n%d %d\n255\n" % (w, h) + plane.tobytes()


def _read_pgm(data: bytes) -> np.ndarray:
    pos = 2  # past magic

    def token():
        nonlocal pos
        while pos < len(data):
            if data[pos:pos + 1].isspace():
                pos += 1
            elif data[pos:pos + 1] == b"#":
                while pos < len(data) and data[pos] != 0x0A:
                    pos += 1
            else:
                break
        start = pos
        while pos < len(data) and not data[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise MalformedImage("truncated PGM header")
        return data[start:pos]

    try:
        w, h, maxval = int(token()), int(token()), int(token())
    except ValueError:
        raise MalformedImage("non-numeric PGM header field") from None
    if maxval != 255:
        raise MalformedImage(f"unsupported PGM maxval {maxval}")
    pos += 1  # single whitespace byte before the raster
    raster = data[pos:pos + w * h]
    if len(raster) != w * h:
        raise MalformedImage("PGM raster shorter than declared size")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w)


_PNG_SIG = b"\x89PNG\r\n\x1a\n"


def _chunk(tag: bytes, body: bytes) -> bytes:
    return (struct.pack(">I", len(body)) + tag + body
            + struct.pack(">I", zlib.crc32(tag + body)))


def _write_png(arr: np.ndarray) -> bytes:
    h, w, c = arr.shape
    color = 0 if c == 1 else 2
    ihdr = struct.pack(">IIBBBBB", w, h, 8, color, 0, 0, 0)
    rows = np.concatenate([np.zeros((h, 1), np.uint8),  # filter 0 per row
                           arr.reshape(h, w * c)], axis=1)
    idat = zlib.compress(rows.tobytes(), 9)
    return _PNG_SIG + _chunk(b"IHDR", ihdr) + _chunk(b"IDAT", idat) + _chunk(b"IEND", b"")


def _read_png(data: bytes) -> np.ndarray:
    pos = 8
    ihdr = None
    idat = bytearray()
    while pos + 8 <= len(data):
        (length,) = struct.unpack(">I", data[pos:pos + 4])
        tag = data[pos + 4:pos + 8]
        body = data[pos + 8:pos + 8 + length]
        pos += 12 + length
        if tag == b"IHDR":
            ihdr = struct.unpack(">IIBBBBB", body)
        elif tag == b"IDAT":
            idat += body
        elif tag == b"IEND":
            break
    if ihdr is None:
        raise MalformedImage("PNG missing IHDR")
    w, h, depth, color, _, _, interlace = ihdr
    if depth != 8 or interlace != 0 or color not in (0, 2):
        raise MalformedImage("only 8-bit non-interlaced grayscale/RGB PNG supported")
    c = 1 if color == 0 else 3
    raw = zlib.decompress(bytes(idat))
    stride = w * c
    if len(raw) != h * (stride + 1):
        raise MalformedImage("PNG pixel data has wrong length")
    out = np.zeros((h, stride), dtype=np.uint8)
    prev = np.zeros(stride, dtype=np.int32)
    for r in range(h):
        ftype = raw[r * (stride + 1)]
        line = np.frombuffer(raw[r * (stride + 1) + 1:(r + 1) * (stride + 1)],
                             dtype=np.uint8).astype(np.int32)
        cur = np.zeros(stride, dtype=np.int32)
        for col in range(stride):
            a = cur[col - c] if col >= c else 0
            b = prev[col]
            cc = prev[col - c] if col >= c else 0
            if ftype == 0:
                rec = line[col]
            elif ftype == 1:
                rec = line[col] + a
            elif ftype == 2:
                rec = line[col] + b
            elif ftype == 3:
                rec = line[col] + (a + b) // 2
            elif ftype == 4:
                p = a + b - cc
                pa, pb, pc = abs(p - a), abs(p - b), abs(p - cc)
                pred = a if pa <= pb and pa <= pc else (b if pb <= pc else cc)
                rec = line[col] + pred
            else:
                raise MalformedImage(f"unknown PNG filter {ftype}")
            cur[col] = rec & 0xFF
        out[r] = cur
        prev = cur
    return out.reshape(h, w, c)
