"""Quantized numeric formats for the inference engine.

Weights: 1-bit (sign x per-channel mean magnitude) or 3-bit (symmetric
seven-level, codes -3..+3) with per-output-channel scales and integer biases
in the accumulator domain. Activations: unsigned 5-bit codes with one scale
per tensor. Packing is little-endian within bytes, codes row-major.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BadShape",
    "NonPositiveScale",
    "CodeOutOfRange",
    "QuantWeights",
    "QuantActivations",
    "quantize_weights_1bit",
    "quantize_weights_3bit",
    "quantize_activations",
    "dequantize_weights",
    "dequantize_activations",
    "pack_codes",
    "unpack_codes",
    "round_half_away",
    "packed_nbytes",
]


class BadShape(Exception):
    pass


class NonPositiveScale(Exception):
    pass


class CodeOutOfRange(Exception):
    pass


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest, ties away from zero (numpy's default is banker's)."""
    return np.where(np.asarray(x) >= 0, np.floor(np.asarray(x) + 0.5),
                    np.ceil(np.asarray(x) - 0.5))


def packed_nbytes(count: int, bits: int) -> int:
    return (count * bits + 7) // 8


@dataclass(frozen=True, eq=False)
class QuantWeights:
    bits: int                 # 1 or 3
    codes: np.ndarray         # (C_out, C_in, 3, 3) int8
    scales: np.ndarray        # (C_out,) float32, > 0
    bias: np.ndarray          # (C_out,) int32, accumulator domain

    def __post_init__(self):
        c = self.codes
        if c.ndim != 4 or c.shape[2:] != (3, 3):
            raise BadShape(f"weight codes must be (C_out, C_in, 3, 3), got {c.shape}")
        if self.bits == 1:
            bad = ~np.isin(c, (-1, 1))
        elif self.bits == 3:
            bad = (c < -3) | (c > 3)
        else:
            raise BadShape(f"weight bits must be 1 or 3, got {self.bits}")
        if bad.any():
            raise CodeOutOfRange(f"{self.bits}-bit weight code out of range")
        if np.any(self.scales <= 0):
            raise NonPositiveScale("weight scales must be positive")
        object.__setattr__(self, "codes", np.ascontiguousarray(c, dtype=np.int8))
        object.__setattr__(self, "scales",
                           np.ascontiguousarray(self.scales, dtype=np.float32))
        object.__setattr__(self, "bias",
                           np.ascontiguousarray(self.bias, dtype=np.int32))

    @property
    def c_out(self) -> int:
        return self.codes.shape[0]

    @property
    def c_in(self) -> int:
        return self.codes.shape[1]

    def packed(self) -> bytes:
        return pack_codes(self.codes.ravel(), self.bits)


@dataclass(frozen=True, eq=False)
class QuantActivations:
    codes: np.ndarray  # (C, H, W) uint8, values 0..31
    scale: float       # real value = code * scale

    def __post_init__(self):
        if self.scale <= 0:
            raise NonPositiveScale("activation scale must be positive")
        c = np.asarray(self.codes)
        if c.ndim != 3:
            raise BadShape(f"activations must be (C, H, W), got {c.shape}")
        if c.min(initial=0) < 0 or c.max(initial=0) > 31:
            raise CodeOutOfRange("activation codes must be within 0..31")
        object.__setattr__(self, "codes", np.ascontiguousarray(c, dtype=np.uint8))
        object.__setattr__(self, "scale", float(self.scale))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.codes.shape


def _check_conv_shape(w: np.ndarray):
    if w.ndim != 4 or w.shape[2:] != (3, 3):
        raise BadShape(f"expected (C_out, C_in, 3, 3) weights, got {w.shape}")


def quantize_weights_1bit(w: np.ndarray, bias: np.ndarray | None = None) -> QuantWeights:
    """Binary-weight scheme: per channel, scale = mean |w|, code = sign.

    sign(0) = +1; an all-zero channel gets scale 1 and all-(+1) codes. For the
    fixed per-channel magnitude this sign choice minimizes L2 error.
    """
    w = np.asarray(w, dtype=np.float64)
    _check_conv_shape(w)
    c_out = w.shape[0]
    flat = np.abs(w).reshape(c_out, -1)
    scales = flat.mean(axis=1)
    scales = np.where(scales > 0, scales, 1.0)
    codes = np.where(w >= 0, 1, -1).astype(np.int8)
    return QuantWeights(bits=1, codes=codes,
                        scales=scales.astype(np.float32),
                        bias=_bias_or_zero(bias, c_out))


def quantize_weights_3bit(w: np.ndarray, bias: np.ndarray | None = None) -> QuantWeights:
    """Seven-level symmetric scheme: scale = max |w| / 3, codes in -3..+3."""
    w = np.asarray(w, dtype=np.float64)
    _check_conv_shape(w)
    c_out = w.shape[0]
    peak = np.abs(w).reshape(c_out, -1).max(axis=1)
    zero = peak == 0
    scales = np.where(zero, 1.0, peak / 3.0)
    codes = round_half_away(w / scales[:, None, None, None])
    codes = np.clip(codes, -3, 3).astype(np.int8)
    codes[zero] = 0
    return QuantWeights(bits=3, codes=codes,
                        scales=scales.astype(np.float32),
                        bias=_bias_or_zero(bias, c_out))


def _bias_or_zero(bias, c_out) -> np.ndarray:
    if bias is None:
        return np.zeros(c_out, dtype=np.int32)
    b = np.asarray(bias)
    if b.shape != (c_out,):
        raise BadShape(f"bias must be ({c_out},), got {b.shape}")
    return b.astype(np.int32)


def quantize_activations(x: np.ndarray, scale: float) -> QuantActivations:
    """code = clamp(round(x / scale), 0, 31); round ties away from zero."""
    if scale <= 0:
        raise NonPositiveScale(f"scale must be positive, got {scale}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 3:
        raise BadShape(f"activations must be (C, H, W), got {x.shape}")
    codes = np.clip(round_half_away(x / scale), 0, 31).astype(np.uint8)
    return QuantActivations(codes=codes, scale=float(scale))


def dequantize_weights(qw: QuantWeights) -> np.ndarray:
    return qw.codes.astype(np.float64) * qw.scales.astype(np.float64)[:, None, None, None]


def dequantize_activations(qa: QuantActivations) -> np.ndarray:
    return qa.codes.astype(np.float64) * qa.scale


# --- bit packing -------------------------------------------------------------

_FIELD_RANGE = {1: (-1, 1), 3: (-3, 3), 5: (0, 31)}


def _to_fields(codes: np.ndarray, bits: int) -> np.ndarray:
    lo, hi = _FIELD_RANGE[bits]
    c = np.asarray(codes)
    if c.size and (c.min() < lo or c.max() > hi):
        raise CodeOutOfRange(f"code out of range for {bits}-bit packing")
    if bits == 1:
        if c.size and not np.isin(c, (-1, 1)).all():
            raise CodeOutOfRange("1-bit codes must be -1 or +1")
        return (c > 0).astype(np.uint8)          # +1 -> 1, -1 -> 0
    if bits == 3:
        return (c & 0b111).astype(np.uint8)      # two's complement in 3 bits
    return c.astype(np.uint8)


def _from_fields(fields: np.ndarray, bits: int) -> np.ndarray:
    if bits == 1:
        return np.where(fields == 1, 1, -1).astype(np.int8)
    if bits == 3:
        v = fields.astype(np.int8)
        v = np.where(v >= 4, v - 8, v)
        if np.any(v == -4):
            raise CodeOutOfRange("3-bit field 0b100 (-4) is forbidden")
        return v
    return fields.astype(np.uint8)


def pack_codes(codes, bits: int) -> bytes:
    """Row-major codes into bytes, little-endian bit order, zero-padded tail."""
    if bits not in _FIELD_RANGE:
        raise ValueError(f"bits must be one of 1/3/5, got {bits}")
    fields = _to_fields(np.asarray(codes).ravel(), bits)
    if fields.size == 0:
        return b""
    # Expand every field into its `bits` bits, LSB first, then pack the
    # resulting bitstream little-endian.
    shifts = np.arange(bits, dtype=np.uint8)
    bitplane = ((fields[:, None] >> shifts[None, :]) & 1).astype(np.uint8)
    return np.packbits(bitplane.ravel(), bitorder="little").tobytes()


def unpack_codes(data: bytes, bits: int, count: int) -> np.ndarray:
    """Inverse of pack_codes for a known code count."""
    if bits not in _FIELD_RANGE:
        raise ValueError(f"bits must be one of 1/3/5, got {bits}")
    if count == 0:
        return np.zeros(0, dtype=np.int8 if bits != 5 else np.uint8)
    need = packed_nbytes(count, bits)
    if len(data) < need:
        raise CodeOutOfRange(f"packed stream too short: {len(data)} < {need} bytes")
    stream = np.unpackbits(np.frombuffer(data[:need], dtype=np.uint8),
                           bitorder="little")[:count * bits]
    weights = (1 << np.arange(bits)).astype(np.uint8)
    fields = stream.reshape(count, bits) @ weights
    return _from_fields(fields.astype(np.uint8), bits)
