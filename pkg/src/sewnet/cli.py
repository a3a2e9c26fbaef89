"""Command-line front end.

Subcommands: render, classify, eval, repl, report, validate. Exit codes:
0 success, 1 usage error, 2 data error (text/image/font/CSV), 3 model error
(file format, architecture, budget).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import dsa_engine as eng
from . import fontkit, gnetfc, modelfile, pipeline, superchar

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_MODEL = 3

_DATA_ERRORS = (
    pipeline.MalformedCsv,
    pipeline.LabelOutOfRange,
    superchar.MalformedImage,
    superchar.UnsupportedFormat,
    fontkit.MalformedFont,
)
_MODEL_ERRORS = (
    modelfile.BadMagic,
    modelfile.ChecksumMismatch,
    modelfile.VersionUnsupported,
    modelfile.Truncated,
    eng.MissingWeights,
    eng.ShapeMismatch,
    gnetfc.InvalidSpec,
    gnetfc.DimensionMismatch,
)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage problems; this tool reserves 2 for data."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _UsageError(Exception):
    pass


def _parse_grid(value: str) -> tuple[int, int]:
    parts = value.lower().split("x")
    if len(parts) != 2:
        raise _UsageError(f"--grid wants ROWSxCOLS, got {value!r}")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise _UsageError(f"--grid wants ROWSxCOLS, got {value!r}") from None
    if rows < 1 or cols < 1:
        raise _UsageError("--grid needs positive dimensions")
    return rows, cols


def _canvas_from_args(args) -> superchar.CanvasSpec:
    rows, cols = _parse_grid(args.grid)
    side = args.canvas
    margin = args.margin
    cell = args.cell
    if cell is None:
        cell = min((side - 2 * margin) // rows, (side - 2 * margin) // cols)
    try:
        return superchar.CanvasSpec(side=side, grid_rows=rows, grid_cols=cols,
                                    cell_side=cell, margin=margin)
    except ValueError as e:
        raise _UsageError(str(e)) from None


def _font_from_args(args) -> fontkit.BitmapFont:
    if args.font is None:
        return fontkit.builtin_font()
    try:
        data = Path(args.font).read_bytes()
    except OSError as e:
        raise fontkit.MalformedFont(f"cannot read font {args.font}: {e}") from e
    return fontkit.parse_bdf(data)


def _load_bundle(path) -> modelfile.ModelBundle:
    try:
        return modelfile.load_model(path)
    except OSError as e:
        raise modelfile.Truncated(f"cannot read model {path}: {e}") from e


def _graph_for_inspection(args):
    """report/validate accept either a saved model or an arch config."""
    if args.model:
        return _load_bundle(args.model).graph
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as e:
        raise gnetfc.InvalidSpec(f"cannot read config {args.config}: {e}") from e
    return gnetfc.build_gnetfc(gnetfc.ArchSpec.from_config_text(text))


def _add_canvas_options(p):
    p.add_argument("--mode", choices=("sew", "cjk"), default="sew")
    p.add_argument("--font", help="BDF font file (default: built-in 8x8)")
    p.add_argument("--canvas", type=int, default=224, help="canvas side in pixels")
    p.add_argument("--grid", default="8x8", help="token grid as ROWSxCOLS")
    p.add_argument("--cell", type=int, default=None,
                   help="cell side in pixels (default: fit the grid)")
    p.add_argument("--margin", type=int, default=0)
    p.add_argument("--invert", action="store_true",
                   help="white background, black ink")


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="sewnet",
                  description="Draw text as an image and classify it with a "
                              "quantized all-convolution network.")
    sub = top.add_subparsers(dest="command", required=True,
                             parser_class=_Parser)

    p = sub.add_parser("render", help="render text to a PGM/PNG image")
    _add_canvas_options(p)
    p.add_argument("--out", required=True, help="output path (.pgm or .png)")
    p.add_argument("text")

    p = sub.add_parser("classify", help="classify one text")
    _add_canvas_options(p)
    p.add_argument("--model", required=True)
    p.add_argument("text")

    p = sub.add_parser("eval", help="evaluate a CSV dataset")
    _add_canvas_options(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--title-only", action="store_true",
                   help="classify column 2 alone instead of title + body")

    p = sub.add_parser("repl", help="interactive classification loop")
    _add_canvas_options(p)
    p.add_argument("--model", required=True)

    p = sub.add_parser("report", help="memory and compression report")
    p.add_argument("--model")
    p.add_argument("--config", help="arch config instead of a saved model")
    p.add_argument("--storage", choices=("packed", "device"), default="packed")

    p = sub.add_parser("validate", help="check chip legality and the 9MB budget")
    p.add_argument("--model")
    p.add_argument("--config", help="arch config instead of a saved model")
    return top


def _spec_for_model(args, bundle) -> superchar.CanvasSpec:
    # Unless the user asked for a canvas explicitly, follow the model input.
    side = bundle.graph.input_shape[1]
    untouched = args.canvas == 224 and args.grid == "8x8" and args.cell is None
    if untouched and side != 224:
        return superchar.default_canvas(side)
    if args.canvas == 224 and side != 224:
        args.canvas = side
    return _canvas_from_args(args)


def cmd_render(args) -> int:
    fmt = Path(args.out).suffix.lstrip(".").lower()
    img = pipeline.preprocess(args.text, _canvas_from_args(args),
                              _font_from_args(args), mode=args.mode,
                              channels=3 if fmt == "png" else 1,
                              invert=args.invert)
    Path(args.out).write_bytes(superchar.export_image(img, fmt))
    print(args.out)
    return EXIT_OK


def cmd_classify(args) -> int:
    bundle = _load_bundle(args.model)
    res = pipeline.classify(args.text, bundle, mode=args.mode,
                            spec=_spec_for_model(args, bundle),
                            font=_font_from_args(args), invert=args.invert)
    t = res.timings
    print(res.label)
    print("scores=" + ", ".join(f"{s:.6g}" for s in res.scores))
    print(f"pre={t.preprocess_ms:.2f}ms inf={t.inference_ms:.2f}ms "
          f"post={t.postprocess_ms:.2f}ms total={t.total_ms:.2f}ms")
    return EXIT_OK


def cmd_eval(args) -> int:
    bundle = _load_bundle(args.model)
    rep = pipeline.evaluate(args.data, bundle, mode=args.mode,
                            spec=_spec_for_model(args, bundle),
                            font=_font_from_args(args), limit=args.limit,
                            title_only=args.title_only)
    if args.json:
        print(rep.to_json())
        return EXIT_OK
    print(f"dataset: {rep.dataset}")
    print(f"rows: {rep.total}")
    print(f"accuracy: {rep.accuracy:.4f}")
    print("class counts: " + ", ".join(
        f"{lbl}={int(n)}" for lbl, n in zip(rep.labels, rep.counts)))
    print("confusion (rows = true class):")
    for row in rep.confusion:
        print("  " + " ".join(f"{int(v):6d}" for v in row))
    print(f"mean ms: pre={rep.mean_preprocess_ms:.2f} "
          f"inf={rep.mean_inference_ms:.2f} "
          f"post={rep.mean_postprocess_ms:.2f}")
    return EXIT_OK


def cmd_repl(args) -> int:
    bundle = _load_bundle(args.model)
    return pipeline.repl(bundle, sys.stdin, sys.stdout, mode=args.mode,
                         spec=_spec_for_model(args, bundle),
                         font=_font_from_args(args))


def cmd_report(args) -> int:
    if bool(args.model) == bool(args.config):
        raise _UsageError("pass exactly one of --model / --config")
    g = _graph_for_inspection(args)
    rep = gnetfc.memory_report(g, storage_mode=args.storage)
    mb = 1e6
    print(f"coefficients float32: {rep.float32_bytes} B "
          f"({rep.float32_bytes / mb:.2f} MB)")
    print(f"coefficients packed:  {rep.packed_bytes} B "
          f"({rep.packed_bytes / mb:.2f} MB)  "
          f"{rep.compression_packed:.1f}x vs float32")
    print(f"coefficients stored (8-bit baseline, 1-bit->2b, 3-bit->4b): "
          f"{rep.device_bytes} B ({rep.device_bytes / mb:.2f} MB)  "
          f"{rep.compression_device:.1f}x vs float32")
    print(f"peak activations (5-bit packed, in+out): {rep.peak_act_bytes} B")
    need = rep.packed_bytes + rep.peak_act_bytes
    print(f"on-chip need: {need} B of {rep.budget_bytes} B budget -> "
          f"{'fits' if rep.fits_budget else 'exceeds'}")
    return EXIT_OK


def cmd_validate(args) -> int:
    if bool(args.model) == bool(args.config):
        raise _UsageError("pass exactly one of --model / --config")
    g = _graph_for_inspection(args)
    report = eng.validate_graph(g)
    print(f"layers: {len(g.layers)}")
    print(f"final shape: {report.final_shape}")
    print(f"coefficients packed: {report.coeff_bytes} B")
    print(f"peak activations: {report.peak_act_bytes} B")
    if report.ok:
        print("legal: yes (within the 9MB budget)")
        return EXIT_OK
    for code, msg in report.violations:
        print(f"violation[{code}]: {msg}")
    return EXIT_MODEL


_COMMANDS = {
    "render": cmd_render,
    "classify": cmd_classify,
    "eval": cmd_eval,
    "repl": cmd_repl,
    "report": cmd_report,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _UsageError as e:
        print(f"sewnet: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except _DATA_ERRORS as e:
        print(f"sewnet: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except _MODEL_ERRORS as e:
        print(f"sewnet: model error: {e}", file=sys.stderr)
        return EXIT_MODEL
    except OSError as e:
        print(f"sewnet: data error: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
