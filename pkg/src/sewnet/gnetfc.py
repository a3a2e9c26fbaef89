"""Six-major-layer network builder and its bookkeeping.

The architecture is VGG-flavored: pooled major layers (3x3 convs, padding 1,
trailing 2x2 pool), then a final major of three padding-free convs that walks
the map down 7x7 -> 5x5 -> 3x3 -> 1x1 so no inner-product layer is needed.
Also here: the exact FC == single-valid-conv identity used as the oracle
anchor, post-training activation-scale calibration, and the memory report.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import dsa_engine as eng
from .dsa_engine import (
    CONV,
    POOL,
    LayerSpec,
    NetworkGraph,
    conv_layer,
    pool_layer,
)
from .qtensor import (
    packed_nbytes,
    quantize_weights_1bit,
    quantize_weights_3bit,
    round_half_away,
)

__all__ = [
    "InvalidSpec",
    "DimensionMismatch",
    "EmptySampleSet",
    "ArchSpec",
    "MemoryReport",
    "build_gnetfc",
    "fc_as_single_conv",
    "apply_full_conv",
    "calibrate_scales",
    "quantize_graph",
    "attach_random_float_weights",
    "memory_report",
    "vgg16_conv_stack",
    "DEFAULT_INPUT_SCALE",
]

# Binary image pixels 0/255 map onto the 0..31 code range.
DEFAULT_INPUT_SCALE = float(np.float32(255.0 / 31.0))


class InvalidSpec(Exception):
    pass


class DimensionMismatch(Exception):
    pass


class EmptySampleSet(Exception):
    pass


@dataclass(frozen=True)
class ArchSpec:
    input_side: int = 224
    input_channels: int = 3
    num_classes: int = 14
    major_channels: tuple[int, ...] = (64, 128, 256, 512, 256)
    major_sublayers: tuple[int, ...] = (2, 2, 3, 3, 3)
    major6_channels: tuple[int, ...] | None = None  # defaults to (256, 256, classes)
    bits_per_major: tuple[int, ...] = (3, 3, 1, 1, 1, 1)
    scale_divisor: int = 1

    def __post_init__(self):
        if self.major6_channels is None:
            object.__setattr__(self, "major6_channels",
                               (256, 256, self.num_classes))
        for name in ("major_channels", "major_sublayers", "major6_channels",
                     "bits_per_major"):
            object.__setattr__(self, name, tuple(getattr(self, name)))

    @classmethod
    def desk(cls, num_classes: int = 2, input_side: int = 56,
             input_channels: int = 3) -> "ArchSpec":
        """Small spec that keeps the 7->5->3->1 tail: 3 pooled majors at 56px."""
        return cls(input_side=input_side, input_channels=input_channels,
                   num_classes=num_classes,
                   major_channels=(8, 16, 32), major_sublayers=(1, 1, 1),
                   major6_channels=(32, 32, num_classes),
                   bits_per_major=(3, 3, 1, 1))

    def validate(self):
        d = self.scale_divisor
        if d not in (1, 2, 4):
            raise InvalidSpec(f"scale_divisor must be 1, 2 or 4, got {d}")
        p = len(self.major_channels)
        if p < 1 or len(self.major_sublayers) != p:
            raise InvalidSpec("major_channels and major_sublayers must match, >= 1 majors")
        if len(self.bits_per_major) != p + 1:
            raise InvalidSpec(f"bits_per_major needs {p + 1} entries (pooled majors "
                              f"plus the final major), got {len(self.bits_per_major)}")
        if any(b not in (1, 3) for b in self.bits_per_major):
            raise InvalidSpec("weight bits must be 1 or 3 per major")
        if len(self.major6_channels) != 3:
            raise InvalidSpec("the final major has exactly 3 sublayers")
        if self.num_classes < 2:
            raise InvalidSpec("need at least 2 classes")
        if any(s < 1 for s in self.major_sublayers):
            raise InvalidSpec("every pooled major needs >= 1 sublayer")
        if any(self.scaled(c) < 1 for c in
               self.major_channels + self.major6_channels[:2]):
            raise InvalidSpec("channel widths collapse to zero under scale_divisor")
        side = self.scaled_input_side
        if side < 1:
            raise InvalidSpec("input side collapses under scale_divisor")
        for i in range(p):
            if side % 2:
                raise InvalidSpec(
                    f"pool after major {i + 1} sees an odd {side}x{side} map")
            side //= 2
        # Three padding-free 3x3 convs: side -> side-2 -> side-4 -> side-6.
        if side - 6 < 1:
            raise InvalidSpec(
                f"final major enters at {side}x{side}; the padding-free chain "
                f"needs at least 7x7 to end at 1x1")

    @property
    def scaled_input_side(self) -> int:
        return self.input_side // self.scale_divisor

    def scaled(self, channels: int) -> int:
        return channels // self.scale_divisor

    # plain-text key=value config (external interface, shared with the trainer)
    def to_config_text(self) -> str:
        rows = [
            ("input_side", self.input_side),
            ("input_channels", self.input_channels),
            ("num_classes", self.num_classes),
            ("major_channels", ",".join(map(str, self.major_channels))),
            ("major_sublayers", ",".join(map(str, self.major_sublayers))),
            ("major6_channels", ",".join(map(str, self.major6_channels))),
            ("bits_per_major", ",".join(map(str, self.bits_per_major))),
            ("scale_divisor", self.scale_divisor),
        ]
        return "".join(f"{k} = {v}\n" for k, v in rows)

    @classmethod
    def from_config_text(cls, text: str) -> "ArchSpec":
        kv = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidSpec(f"config line {lineno}: expected key = value")
            k, _, v = line.partition("=")
            kv[k.strip()] = v.strip()

        def ints(key, default):
            if key not in kv:
                return default
            return tuple(int(x) for x in kv[key].split(",") if x.strip())

        def one(key, default):
            return int(kv[key]) if key in kv else default

        base = cls()
        return cls(
            input_side=one("input_side", base.input_side),
            input_channels=one("input_channels", base.input_channels),
            num_classes=one("num_classes", base.num_classes),
            major_channels=ints("major_channels", base.major_channels),
            major_sublayers=ints("major_sublayers", base.major_sublayers),
            major6_channels=ints("major6_channels", None),
            bits_per_major=ints("bits_per_major", base.bits_per_major),
            scale_divisor=one("scale_divisor", base.scale_divisor),
        )


def build_gnetfc(spec: ArchSpec | None = None,
                 input_act_scale: float = DEFAULT_INPUT_SCALE) -> NetworkGraph:
    """Weightless chip-legal graph for the spec; raises InvalidSpec otherwise."""
    spec = spec or ArchSpec()
    spec.validate()
    layers: list[LayerSpec] = []
    c = spec.input_channels
    for mi, (width, subs) in enumerate(zip(spec.major_channels,
                                           spec.major_sublayers)):
        width = spec.scaled(width)
        for _ in range(subs):
            layers.append(conv_layer(c, width, padding=1,
                                     bits=spec.bits_per_major[mi], relu=True))
            c = width
        layers.append(pool_layer(c))
    tail_bits = spec.bits_per_major[len(spec.major_channels)]
    tail = [spec.scaled(width) for width in spec.major6_channels[:2]]
    tail.append(spec.num_classes)
    for j, width in enumerate(tail):
        layers.append(conv_layer(c, width, padding=0, bits=tail_bits,
                                 relu=(j < 2)))  # scoring layer stays linear
        c = width
    return NetworkGraph(
        input_shape=(spec.input_channels, spec.scaled_input_side,
                     spec.scaled_input_side),
        input_act_scale=input_act_scale,
        layers=layers)


def fc_as_single_conv(fc_weights: np.ndarray, k: int, channels: int) -> np.ndarray:
    """Exact identity: an FC over a k x k x C map equals one k x k valid conv.

    fc_weights is (D, C*k*k) with inputs flattened row-major (C, k, k);
    returns (D, C, k, k) kernel weights.
    """
    w = np.asarray(fc_weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[1] != channels * k * k:
        raise DimensionMismatch(
            f"FC weights must be (D, {channels * k * k}), got {w.shape}")
    return w.reshape(w.shape[0], channels, k, k)


def apply_full_conv(x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Valid convolution where the kernel covers the whole map: (D,) output."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != w.shape[1:]:
        raise DimensionMismatch(f"map {x.shape} vs kernel {w.shape[1:]}")
    return np.tensordot(w, x, axes=([1, 2, 3], [0, 1, 2]))


def attach_random_float_weights(g: NetworkGraph, seed: int = 0,
                                weight_std: float | None = None) -> NetworkGraph:
    """Fill every conv with Gaussian float weights (He-ish fan-in scaling)."""
    rng = np.random.default_rng(seed)
    for layer in g.layers:
        if layer.kind != CONV:
            continue
        fan_in = layer.in_channels * 9
        std = weight_std if weight_std is not None else math.sqrt(2.0 / fan_in)
        layer.fweights = rng.normal(0.0, std,
                                    (layer.out_channels, layer.in_channels, 3, 3))
        layer.fbias = rng.normal(0.0, 0.1, layer.out_channels)
    return g


def calibrate_scales(g: NetworkGraph, samples) -> list[float]:
    """Per-conv output scale = observed float activation max / 31.

    Runs the float path over all samples; a layer whose outputs never rise
    above zero gets scale 1. Scales are rounded through float32 so they
    survive the model file bit-exactly, and are written into the graph.
    """
    samples = list(samples)
    if not samples:
        raise EmptySampleSet("calibration needs at least one sample")
    conv_idx = [i for i, l in enumerate(g.layers) if l.kind == CONV]
    maxima = {i: 0.0 for i in conv_idx}
    for s in samples:
        cur = np.asarray(s, dtype=np.float64)
        for i, layer in enumerate(g.layers):
            if layer.kind == CONV:
                if layer.fweights is None:
                    raise eng.MissingWeights(f"layer {i} has no float weights")
                cur = eng.conv3x3_float(cur, layer.fweights, layer.fbias,
                                        layer.padding, layer.relu)
                maxima[i] = max(maxima[i], float(cur.max(initial=0.0)))
            else:
                cur = eng.maxpool2x2(cur)
    scales = []
    for i in conv_idx:
        m = maxima[i]
        scale = float(np.float32(m / 31.0)) if m > 0 else 1.0
        g.layers[i].out_act_scale = scale
        scales.append(scale)
    return scales


def quantize_graph(g: NetworkGraph) -> NetworkGraph:
    """Quantize a calibrated float-weight graph into an integer-mode graph.

    Weight codes/scales follow each layer's bit width; float biases move to
    the accumulator domain (divided by in_scale * weight_scale[c]).
    """
    out = eng.copy_graph(g)
    in_scale = float(np.float32(g.input_act_scale))
    out.input_act_scale = in_scale
    for i, layer in enumerate(out.layers):
        if layer.kind != CONV:
            continue
        if layer.fweights is None:
            raise eng.MissingWeights(f"layer {i} has no float weights to quantize")
        quant = quantize_weights_1bit if layer.weight_bits == 1 else quantize_weights_3bit
        qw = quant(layer.fweights)
        fbias = layer.fbias if layer.fbias is not None \
            else np.zeros(layer.out_channels)
        denom = in_scale * qw.scales.astype(np.float64)
        ibias = round_half_away(np.asarray(fbias, dtype=np.float64) / denom)
        ibias = np.clip(ibias, -(2 ** 31), 2 ** 31 - 1).astype(np.int32)
        layer.qweights = type(qw)(bits=qw.bits, codes=qw.codes,
                                  scales=qw.scales, bias=ibias)
        layer.out_act_scale = float(np.float32(layer.out_act_scale))
        layer.fweights = None
        layer.fbias = None
        in_scale = layer.out_act_scale
    return out


# --- memory accounting -------------------------------------------------------

@dataclass
class LayerMemory:
    index: int
    kind: str
    coeffs: int
    bits: int
    float32_bytes: int
    packed_bytes: int
    device_bytes: int


@dataclass
class MemoryReport:
    layers: list[LayerMemory] = field(default_factory=list)
    float32_bytes: int = 0
    packed_bytes: int = 0
    device_bytes: int = 0
    peak_act_bytes: int = 0
    budget_bytes: int = eng.CHIP_BUDGET_BYTES
    storage_mode: str = "packed"

    @property
    def fits_budget(self) -> bool:
        return self.packed_bytes + self.peak_act_bytes <= self.budget_bytes

    @property
    def compression_packed(self) -> float:
        return self.float32_bytes / self.packed_bytes if self.packed_bytes else 0.0

    @property
    def compression_device(self) -> float:
        return self.float32_bytes / self.device_bytes if self.device_bytes else 0.0


# The accelerator stores coefficients against an 8-bit baseline: 1-bit layers
# compress 4x (2 effective bits), 3-bit layers 2x (4 effective bits).
_DEVICE_STORED_BITS = {1: 2, 3: 4}


def memory_report(g: NetworkGraph, storage_mode: str = "packed") -> MemoryReport:
    if storage_mode not in ("packed", "device"):
        raise ValueError(f"storage_mode must be packed or device, got {storage_mode}")
    rep = MemoryReport(storage_mode=storage_mode)
    shape = tuple(g.input_shape) if g.layers else None
    peak = 0
    prev_bytes = _act_bytes(shape) if shape else 0
    for i, layer in enumerate(g.layers):
        if layer.kind == CONV:
            n = layer.out_channels * layer.in_channels * 9
            row = LayerMemory(
                index=i, kind=CONV, coeffs=n, bits=layer.weight_bits,
                float32_bytes=4 * n,
                packed_bytes=packed_nbytes(n, layer.weight_bits),
                device_bytes=n * _DEVICE_STORED_BITS[layer.weight_bits] // 8,
            )
            rep.layers.append(row)
            rep.float32_bytes += row.float32_bytes
            rep.packed_bytes += row.packed_bytes
            rep.device_bytes += row.device_bytes
            h, w = eng.conv_out_hw(shape[1], shape[2], layer.padding)
            shape = (layer.out_channels, h, w)
        else:
            shape = (shape[0], shape[1] // 2, shape[2] // 2)
        cur_bytes = _act_bytes(shape)
        peak = max(peak, prev_bytes + cur_bytes)
        prev_bytes = cur_bytes
    rep.peak_act_bytes = peak
    return rep


def _act_bytes(shape) -> int:
    c, h, w = shape
    return packed_nbytes(c * h * w, 5)


def vgg16_conv_stack() -> NetworkGraph:
    """The 13-conv VGG16 feature stack (for the compression comparison).

    Bits follow the same per-major assignment as the six-major network:
    first two majors 3-bit, the rest 1-bit.
    """
    majors = [(64, 2), (128, 2), (256, 3), (512, 3), (512, 3)]
    bits = [3, 3, 1, 1, 1]
    layers: list[LayerSpec] = []
    c = 3
    for (width, subs), b in zip(majors, bits):
        for _ in range(subs):
            layers.append(conv_layer(c, width, padding=1, bits=b, relu=True))
            c = width
        layers.append(pool_layer(c))
    return NetworkGraph(input_shape=(3, 224, 224),
                        input_act_scale=DEFAULT_INPUT_SCALE, layers=layers)
