"""Dataset plumbing: images rendered by the runtime CLI, labels in CSV.

Rendering always shells out to `python -m sewnet render` so training sees
pixel-for-pixel the same preprocessing the runtime applies at inference
time. The PGM reader here is deliberately minimal and independent: binary
P5, maxval 255.
"""

from __future__ import annotations

import csv
import subprocess
import sys
from pathlib import Path

import numpy as np

__all__ = [
    "DatasetMissing",
    "RenderFailed",
    "render_texts",
    "write_labels_csv",
    "read_labels_csv",
    "load_pgm",
    "load_dataset",
]


class DatasetMissing(Exception):
    pass


class RenderFailed(Exception):
    pass


def render_texts(texts, out_dir, side: int, extra_args=()) -> list[str]:
    """Render each text to out_dir/img_NNNN.pgm via the runtime CLI."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    names = []
    for i, text in enumerate(texts):
        name = f"img_{i:04d}.pgm"
        cmd = [sys.executable, "-m", "sewnet", "render",
               "--canvas", str(side), "--out", str(out_dir / name),
               *map(str, extra_args), text]
        proc = subprocess.run(cmd, capture_output=True, text=True)
        if proc.returncode != 0:
            raise RenderFailed(
                f"render exited {proc.returncode} for text {text!r}: "
                f"{proc.stderr.strip()}")
        names.append(name)
    return names


def write_labels_csv(path, rows) -> None:
    """rows: iterable of (class_number_1_based, image_filename)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for cls, name in rows:
            writer.writerow([cls, name])


def read_labels_csv(path) -> list[tuple[int, str]]:
    """Returns (class_index_0_based, image_filename) per row."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise DatasetMissing(f"cannot read labels {path}: {e}") from e
    rows = []
    for i, row in enumerate(csv.reader(raw.splitlines()), 1):
        if not row:
            continue
        if len(row) != 2:
            raise DatasetMissing(f"labels row {i}: expected class,filename")
        try:
            cls = int(row[0])
        except ValueError:
            raise DatasetMissing(f"labels row {i}: class not an integer") \
                from None
        if cls < 1:
            raise DatasetMissing(f"labels row {i}: classes are 1-based")
        rows.append((cls - 1, row[1]))
    return rows


def load_pgm(path) -> np.ndarray:
    """Binary PGM (P5, maxval 255) to a (H, W) float32 array of 0/255."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise DatasetMissing(f"cannot read image {path}: {e}") from e
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        if blob[pos:pos + 1] == b"#":
            pos = blob.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos])
    pos += 1
    if fields[0] != b"P5" or fields[3] != b"255":
        raise DatasetMissing(f"{path}: not a binary 8-bit PGM")
    width, height = int(fields[1]), int(fields[2])
    pixels = np.frombuffer(blob, dtype=np.uint8, count=width * height,
                           offset=pos)
    if pixels.size != width * height:
        raise DatasetMissing(f"{path}: pixel data truncated")
    return pixels.reshape(height, width).astype(np.float32)


def load_dataset(csv_path, image_dir, channels: int,
                 side: int) -> tuple[np.ndarray, np.ndarray]:
    """(images (N, C, H, W) float32 in 0..1, classes (N,) int64)."""
    image_dir = Path(image_dir)
    rows = read_labels_csv(csv_path)
    if not rows:
        raise DatasetMissing(f"{csv_path}: no rows")
    images = np.zeros((len(rows), channels, side, side), dtype=np.float32)
    classes = np.zeros(len(rows), dtype=np.int64)
    for i, (cls, name) in enumerate(rows):
        plane = load_pgm(image_dir / name)
        if plane.shape != (side, side):
            raise DatasetMissing(
                f"{name}: image is {plane.shape[0]}x{plane.shape[1]}, "
                f"the architecture wants {side}x{side}")
        images[i] = plane[None, :, :] / 255.0
        classes[i] = cls
    return images, classes
