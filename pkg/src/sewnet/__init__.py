"""sewnet: draw text as an image, classify it with a quantized all-conv net.

The package mirrors a deployed text-classification stack built around an
integer-only convolution accelerator: `fontkit` and `superchar` rasterize
text onto a square canvas, `qtensor` and `dsa_engine` provide the quantized
tensor formats and the constrained execution engine, `gnetfc` builds the
six-major-layer network and its memory accounting, `modelfile` is the binary
model container, and `pipeline`/`cli` tie everything into classification,
evaluation, and an interactive loop.
"""

__version__ = "0.1.0"

__all__ = [
    "fontkit",
    "superchar",
    "qtensor",
    "dsa_engine",
    "gnetfc",
    "modelfile",
    "pipeline",
    "cli",
]
