"""Text in, label out: classification, dataset evaluation, and the REPL.

The flow mirrors the deployed system: draw the text as an image, quantize
pixels to 5-bit codes, run the integer engine, take the argmax of the raw
scores. Timing is measured per stage (preprocess / inference / postprocess)
in wall-clock milliseconds on the host.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dsa_engine as eng
from .fontkit import BitmapFont, builtin_font
from .gnetfc import DimensionMismatch
from .modelfile import ModelBundle
from .qtensor import quantize_activations
from .superchar import (
    CanvasSpec,
    SuperImage,
    default_canvas,
    export_image,
    layout,
    render,
    tokenize,
)

__all__ = [
    "MalformedCsv",
    "LabelOutOfRange",
    "StageTimings",
    "ClassifyResult",
    "EvalReport",
    "preprocess",
    "classify",
    "evaluate",
    "read_dataset",
    "repl",
]


class MalformedCsv(Exception):
    pass


class LabelOutOfRange(Exception):
    pass


@dataclass
class StageTimings:
    preprocess_ms: float = 0.0
    inference_ms: float = 0.0
    postprocess_ms: float = 0.0
    total_ms: float = 0.0


@dataclass
class ClassifyResult:
    label: str
    class_index: int          # 0-based position in the label table
    scores: np.ndarray        # raw pre-softmax scores, one per class
    timings: StageTimings
    image: SuperImage


def preprocess(text: str, spec: CanvasSpec | None = None,
               font: BitmapFont | None = None, mode: str = "sew",
               channels: int = 3, invert: bool = False) -> SuperImage:
    """Render text into the network's input image (tokenize, place, stamp)."""
    spec = spec or CanvasSpec()
    font = font or builtin_font()
    plan = layout(tokenize(text, mode), spec, mode=mode)
    return render(plan, spec, font, channels=channels, invert=invert)


def classify(text: str, bundle: ModelBundle, *, mode: str = "sew",
             spec: CanvasSpec | None = None, font: BitmapFont | None = None,
             invert: bool = False) -> ClassifyResult:
    """Full path: text -> image -> int-mode inference -> argmax label."""
    g = bundle.graph
    in_c, in_h, in_w = g.input_shape
    spec = spec or default_canvas(in_h)
    if (spec.side, spec.side) != (in_h, in_w):
        raise DimensionMismatch(
            f"canvas {spec.side}x{spec.side} does not fit model input "
            f"{in_h}x{in_w}")

    t0 = time.perf_counter()
    img = preprocess(text, spec, font, mode=mode, channels=in_c, invert=invert)
    t1 = time.perf_counter()

    x = quantize_activations(img.pixels.astype(np.float64), g.input_act_scale)
    out, _ = eng.run(g, x, mode="int")
    scores = np.asarray(out, dtype=np.float64).reshape(-1)
    t2 = time.perf_counter()

    if len(bundle.labels) != scores.size:
        raise DimensionMismatch(
            f"model emits {scores.size} scores but carries "
            f"{len(bundle.labels)} labels")
    idx = int(np.argmax(scores))  # ties resolve to the lowest index
    label = bundle.labels[idx]
    t3 = time.perf_counter()

    timings = StageTimings(
        preprocess_ms=(t1 - t0) * 1e3,
        inference_ms=(t2 - t1) * 1e3,
        postprocess_ms=(t3 - t2) * 1e3,
        total_ms=(t3 - t0) * 1e3,
    )
    return ClassifyResult(label=label, class_index=idx, scores=scores,
                          timings=timings, image=img)


@dataclass
class EvalReport:
    dataset: str
    num_classes: int
    confusion: np.ndarray                 # (K, K) int64, rows = true class
    counts: np.ndarray                    # (K,) int64 true-class counts
    total: int
    mean_preprocess_ms: float = 0.0
    mean_inference_ms: float = 0.0
    mean_postprocess_ms: float = 0.0
    labels: tuple[str, ...] = field(default_factory=tuple)

    @property
    def accuracy(self) -> float:
        if self.total == 0:
            return 0.0
        return float(np.trace(self.confusion)) / self.total

    def to_json(self) -> str:
        data = {
            "dataset": self.dataset,
            "num_classes": self.num_classes,
            "total": self.total,
            "accuracy": self.accuracy,
            "counts": self.counts.tolist(),
            "confusion": self.confusion.tolist(),
            "labels": list(self.labels),
            "mean_preprocess_ms": self.mean_preprocess_ms,
            "mean_inference_ms": self.mean_inference_ms,
            "mean_postprocess_ms": self.mean_postprocess_ms,
        }
        return json.dumps(data, indent=2)


def read_dataset(path, num_classes: int, limit: int | None = None):
    """Rows of (class_index_0based, title, body) from a 3-column CSV.

    Column 1 holds a 1-based class index; text fields are UTF-8, quoted with
    doubled-quote escaping.
    """
    rows = []
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise MalformedCsv(f"{path}: not valid UTF-8 ({e})") from e
    reader = csv.reader(io.StringIO(raw))
    for rownum, row in enumerate(reader, 1):
        if not row:
            continue
        if len(row) != 3:
            raise MalformedCsv(
                f"{path}: row {rownum}: expected 3 fields "
                f"(class, title, body), got {len(row)}")
        try:
            cls = int(row[0])
        except ValueError:
            raise MalformedCsv(
                f"{path}: row {rownum}: class index {row[0]!r} "
                f"is not an integer") from None
        if not 1 <= cls <= num_classes:
            raise LabelOutOfRange(
                f"{path}: row {rownum}: class {cls} outside 1..{num_classes}")
        rows.append((cls - 1, row[1], row[2]))
        if limit is not None and len(rows) >= limit:
            break
    return rows


def evaluate(dataset_path, bundle: ModelBundle, *, mode: str = "sew",
             spec: CanvasSpec | None = None, font: BitmapFont | None = None,
             limit: int | None = None, title_only: bool = False) -> EvalReport:
    """Classify every row and accumulate a confusion matrix plus timings."""
    k = len(bundle.labels)
    rows = read_dataset(dataset_path, k, limit=limit)
    confusion = np.zeros((k, k), dtype=np.int64)
    counts = np.zeros(k, dtype=np.int64)
    sums = np.zeros(3)
    for cls, title, body in rows:
        text = title if title_only else f"{title} {body}"
        res = classify(text, bundle, mode=mode, spec=spec, font=font)
        confusion[cls, res.class_index] += 1
        counts[cls] += 1
        sums += (res.timings.preprocess_ms, res.timings.inference_ms,
                 res.timings.postprocess_ms)
    n = max(len(rows), 1)
    return EvalReport(
        dataset=Path(dataset_path).name,
        num_classes=k,
        confusion=confusion,
        counts=counts,
        total=len(rows),
        mean_preprocess_ms=float(sums[0]) / n,
        mean_inference_ms=float(sums[1]) / n,
        mean_postprocess_ms=float(sums[2]) / n,
        labels=bundle.labels,
    )


def _format_scores(scores: np.ndarray) -> str:
    return "[" + ", ".join(f"{s:.6g}" for s in scores) + "]"


def repl(bundle: ModelBundle, instream, outstream, *, mode: str = "sew",
         spec: CanvasSpec | None = None, font: BitmapFont | None = None) -> int:
    """Line-oriented loop: one result line per input line.

    `:quit` exits cleanly; `:dump <path>` writes the last rendered image as
    PGM. Any other line is classified.
    """
    last_image: SuperImage | None = None
    for raw in instream:
        line = raw.rstrip("\n")
        if line == ":quit":
            break
        if line.startswith(":dump"):
            target = line[5:].strip() or "last.pgm"
            if last_image is None:
                print("nothing to dump yet", file=outstream)
            else:
                Path(target).write_bytes(export_image(last_image, "pgm"))
                print(f"wrote {target}", file=outstream)
            continue
        res = classify(line, bundle, mode=mode, spec=spec, font=font)
        last_image = res.image
        t = res.timings
        print(f"{res.label}  scores={_format_scores(res.scores)}  "
              f"pre={t.preprocess_ms:.2f}ms inf={t.inference_ms:.2f}ms "
              f"post={t.postprocess_ms:.2f}ms", file=outstream)
    return 0
