"""Execution engine for the accelerator's operator set.

Exactly three ops exist: 3x3 stride-1 convolution (padding 0 or 1, ReLU
fused into requantization), and 2x2 stride-2 max-pooling. Graphs run in two
modes: `int` (bit-exact integer accumulation, 5-bit activations between
layers) and `float` (float64 reference used as the quantization oracle).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .qtensor import (
    QuantActivations,
    QuantWeights,
    packed_nbytes,
    round_half_away,
)

__all__ = [
    "ShapeMismatch",
    "ScaleInvalid",
    "OddSpatialDim",
    "MissingWeights",
    "LayerSpec",
    "NetworkGraph",
    "ExecutionTrace",
    "ValidationReport",
    "CHIP_BUDGET_BYTES",
    "conv_layer",
    "pool_layer",
    "conv3x3_int",
    "conv3x3_float",
    "maxpool2x2",
    "validate_graph",
    "run",
]

CHIP_BUDGET_BYTES = 9 * 2**20  # coefficients + live activations must fit

CONV = "conv3x3"
POOL = "maxpool2x2"


class ShapeMismatch(Exception):
    pass


class ScaleInvalid(Exception):
    pass


class OddSpatialDim(Exception):
    pass


class MissingWeights(Exception):
    pass


@dataclass
class LayerSpec:
    kind: str
    in_channels: int
    out_channels: int
    padding: int = 0            # conv only, 0 or 1
    weight_bits: int = 1        # conv only
    relu: bool = True           # conv only (fused before requantization)
    out_act_scale: float = 1.0  # conv only, set by calibration
    qweights: QuantWeights | None = None
    fweights: np.ndarray | None = None  # (C_out, C_in, 3, 3) float
    fbias: np.ndarray | None = None     # (C_out,) float


def conv_layer(c_in: int, c_out: int, padding: int = 1, bits: int = 1,
               relu: bool = True, out_act_scale: float = 1.0, **kw) -> LayerSpec:
    return LayerSpec(kind=CONV, in_channels=c_in, out_channels=c_out,
                     padding=padding, weight_bits=bits, relu=relu,
                     out_act_scale=out_act_scale, **kw)


def pool_layer(channels: int) -> LayerSpec:
    return LayerSpec(kind=POOL, in_channels=channels, out_channels=channels)


@dataclass
class NetworkGraph:
    input_shape: tuple[int, int, int]  # (C, H, W)
    input_act_scale: float
    layers: list[LayerSpec] = field(default_factory=list)


@dataclass
class LayerTraceEntry:
    kind: str
    out_shape: tuple[int, int, int]
    act_bytes: int  # 5-bit packed size of the output tensor
    millis: float


@dataclass
class ExecutionTrace:
    layers: list[LayerTraceEntry] = field(default_factory=list)
    peak_act_bytes: int = 0
    total_millis: float = 0.0


@dataclass
class ValidationReport:
    ok: bool
    violations: list[tuple[str, str]]  # (code, message)
    coeff_bytes: int
    peak_act_bytes: int
    final_shape: tuple[int, int, int] | None

    def codes(self) -> set[str]:
        return {c for c, _ in self.violations}


def _act_bytes(shape: tuple[int, int, int]) -> int:
    c, h, w = shape
    return packed_nbytes(c * h * w, 5)


def conv_out_hw(h: int, w: int, padding: int) -> tuple[int, int]:
    return h + 2 * padding - 2, w + 2 * padding - 2


def _conv_acc(codes_in: np.ndarray, w_codes: np.ndarray, bias: np.ndarray,
              padding: int) -> np.ndarray:
    """Integer accumulation: int64 sums of code products plus bias."""
    c_in, h, w = codes_in.shape
    if w_codes.shape[1] != c_in:
        raise ShapeMismatch(
            f"weights expect {w_codes.shape[1]} input channels, got {c_in}")
    ho, wo = conv_out_hw(h, w, padding)
    if ho < 1 or wo < 1:
        raise ShapeMismatch(f"conv output would be {ho}x{wo} for input {h}x{w}")
    x = codes_in.astype(np.int64)
    if padding:
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    acc = np.broadcast_to(bias.astype(np.int64)[:, None, None],
                          (w_codes.shape[0], ho, wo)).copy()
    wk = w_codes.astype(np.int64)
    for dr in range(3):
        for dc in range(3):
            acc += np.tensordot(wk[:, :, dr, dc], x[:, dr:dr + ho, dc:dc + wo],
                                axes=([1], [0]))
    return acc


def conv_real_output(x: QuantActivations, w: QuantWeights, padding: int,
                     relu: bool) -> np.ndarray:
    """Accumulator results mapped to the real domain (float64), ReLU applied.

    This is what the final scoring layer of a network hands back: the scale
    product is applied once, in a fixed order, so results are reproducible.
    """
    acc = _conv_acc(x.codes, w.codes, w.bias, padding)
    factors = (np.float64(x.scale) * w.scales.astype(np.float64))[:, None, None]
    real = acc.astype(np.float64) * factors
    if relu:
        real = np.maximum(real, 0.0)
    return real


def conv3x3_int(x: QuantActivations, w: QuantWeights, padding: int,
                relu: bool, out_scale: float) -> QuantActivations:
    if padding not in (0, 1):
        raise ShapeMismatch(f"padding must be 0 or 1, got {padding}")
    if out_scale <= 0:
        raise ScaleInvalid(f"out_scale must be positive, got {out_scale}")
    real = conv_real_output(x, w, padding, relu)
    codes = np.clip(round_half_away(real / out_scale), 0, 31).astype(np.uint8)
    return QuantActivations(codes=codes, scale=float(out_scale))


def conv3x3_float(x: np.ndarray, w: np.ndarray, bias: np.ndarray | None,
                  padding: int, relu: bool) -> np.ndarray:
    """Float64 cross-correlation, stride 1; the reference path."""
    if padding not in (0, 1):
        raise ShapeMismatch(f"padding must be 0 or 1, got {padding}")
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if x.ndim != 3 or w.ndim != 4 or w.shape[2:] != (3, 3):
        raise ShapeMismatch(f"bad conv operand shapes {x.shape} / {w.shape}")
    c_in, h, wd = x.shape
    if w.shape[1] != c_in:
        raise ShapeMismatch(f"weights expect {w.shape[1]} input channels, got {c_in}")
    ho, wo = conv_out_hw(h, wd, padding)
    if ho < 1 or wo < 1:
        raise ShapeMismatch(f"conv output would be {ho}x{wo} for input {h}x{wd}")
    if padding:
        x = np.pad(x, ((0, 0), (padding, padding), (padding, padding)))
    out = np.zeros((w.shape[0], ho, wo))
    for dr in range(3):
        for dc in range(3):
            out += np.tensordot(w[:, :, dr, dc], x[:, dr:dr + ho, dc:dc + wo],
                                axes=([1], [0]))
    if bias is not None:
        out += np.asarray(bias, dtype=np.float64)[:, None, None]
    if relu:
        out = np.maximum(out, 0.0)
    return out


def maxpool2x2(x):
    """2x2 stride-2 max over codes (int mode) or reals (float mode)."""
    if isinstance(x, QuantActivations):
        return QuantActivations(codes=_pool_array(x.codes), scale=x.scale)
    return _pool_array(np.asarray(x))


def _pool_array(a: np.ndarray) -> np.ndarray:
    c, h, w = a.shape
    if h % 2 or w % 2:
        raise OddSpatialDim(f"maxpool needs even spatial dims, got {h}x{w}")
    return a.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))


# --- graph validation --------------------------------------------------------

def validate_graph(g: NetworkGraph, budget_bytes: int = CHIP_BUDGET_BYTES,
                   ) -> ValidationReport:
    """Check chip legality: op set, shape chaining, even pools, memory budget.

    Violations are reported, not raised.
    """
    violations: list[tuple[str, str]] = []
    c, h, w = g.input_shape
    coeff_bytes = 0
    peak = 0
    shape_ok = True
    if g.input_act_scale <= 0:
        violations.append(("ScaleInvalid", "input activation scale must be positive"))

    for i, layer in enumerate(g.layers):
        tag = f"layer {i} ({layer.kind})"
        if layer.kind not in (CONV, POOL):
            violations.append(("UnsupportedOp", f"{tag}: op not in {{conv3x3, maxpool2x2}}"))
            shape_ok = False
            break
        if layer.in_channels != c:
            violations.append(("ChannelMismatch",
                               f"{tag}: expects {layer.in_channels} channels, gets {c}"))
        if layer.kind == CONV:
            if layer.padding not in (0, 1):
                violations.append(("BadPadding", f"{tag}: padding {layer.padding}"))
            if layer.weight_bits not in (1, 3):
                violations.append(("BadBits", f"{tag}: weight bits {layer.weight_bits}"))
            n = layer.out_channels * layer.in_channels * 9
            coeff_bytes += packed_nbytes(n, layer.weight_bits)
            if layer.qweights is not None:
                qshape = layer.qweights.codes.shape
                if qshape != (layer.out_channels, layer.in_channels, 3, 3):
                    violations.append(("WeightShapeMismatch",
                                       f"{tag}: weights {qshape}"))
            ho, wo = conv_out_hw(h, w, layer.padding if layer.padding in (0, 1) else 0)
            if ho < 1 or wo < 1:
                violations.append(("ShapeUnderflow",
                                   f"{tag}: output {ho}x{wo} from input {h}x{w}"))
                shape_ok = False
                break
            out_shape = (layer.out_channels, ho, wo)
        else:
            if layer.out_channels != layer.in_channels:
                violations.append(("ChannelMismatch", f"{tag}: pool changes channels"))
            if h % 2 or w % 2:
                violations.append(("OddPoolInput", f"{tag}: input {h}x{w}"))
                shape_ok = False
                break
            out_shape = (c, h // 2, w // 2)
        peak = max(peak, _act_bytes((c, h, w)) + _act_bytes(out_shape))
        c, h, w = out_shape

    total = coeff_bytes + peak
    if total > budget_bytes:
        violations.append(("BudgetExceeded",
                           f"coefficients {coeff_bytes}B + peak activations {peak}B "
                           f"= {total}B > budget {budget_bytes}B"))
    return ValidationReport(ok=not violations,
                            violations=violations,
                            coeff_bytes=coeff_bytes,
                            peak_act_bytes=peak,
                            final_shape=(c, h, w) if shape_ok else None)


# --- whole-graph execution ---------------------------------------------------

def run(g: NetworkGraph, x, mode: str = "int"):
    """Run all layers in order; returns (output, ExecutionTrace).

    int mode: `x` is QuantActivations. Every layer hands 5-bit codes to the
    next, except a terminal relu=false conv, whose raw real-valued scores are
    returned (classification scores before softmax).
    float mode: `x` is a float (C,H,W) array and layers use float weights.
    """
    if mode not in ("int", "float"):
        raise ValueError(f"mode must be int or float, got {mode}")
    shape = x.shape if mode == "float" else x.codes.shape
    if tuple(shape) != tuple(g.input_shape):
        raise ShapeMismatch(f"input shape {shape} != graph input {g.input_shape}")

    trace = ExecutionTrace()
    cur = x
    in_bytes = _act_bytes(tuple(shape))
    t_start = time.perf_counter()
    last = len(g.layers) - 1
    for i, layer in enumerate(g.layers):
        t0 = time.perf_counter()
        if layer.kind == CONV:
            if mode == "int":
                if layer.qweights is None:
                    raise MissingWeights(f"layer {i} has no quantized weights")
                terminal_scores = (i == last and not layer.relu)
                if terminal_scores:
                    cur = conv_real_output(cur, layer.qweights, layer.padding,
                                           relu=False)
                else:
                    cur = conv3x3_int(cur, layer.qweights, layer.padding,
                                      layer.relu, layer.out_act_scale)
            else:
                if layer.fweights is None:
                    raise MissingWeights(f"layer {i} has no float weights")
                cur = conv3x3_float(cur, layer.fweights, layer.fbias,
                                    layer.padding, layer.relu)
        elif layer.kind == POOL:
            cur = maxpool2x2(cur)
        else:
            raise ShapeMismatch(f"layer {i}: unsupported op {layer.kind!r}")
        out_shape = tuple(cur.shape if not isinstance(cur, QuantActivations)
                          else cur.codes.shape)
        out_bytes = _act_bytes(out_shape)
        trace.layers.append(LayerTraceEntry(
            kind=layer.kind, out_shape=out_shape, act_bytes=out_bytes,
            millis=(time.perf_counter() - t0) * 1e3))
        trace.peak_act_bytes = max(trace.peak_act_bytes, in_bytes + out_bytes)
        in_bytes = out_bytes
    trace.total_millis = (time.perf_counter() - t_start) * 1e3
    return cur, trace


def copy_graph(g: NetworkGraph) -> NetworkGraph:
    return NetworkGraph(input_shape=tuple(g.input_shape),
                        input_act_scale=g.input_act_scale,
                        layers=[replace(l) for l in g.layers])
