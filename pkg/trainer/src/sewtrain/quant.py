"""Weight and activation coding for the target device, from scratch.

The runtime package carries its own implementation of these rules; this one
is written independently against the same contract so the pair can check
each other. Coding rules:

  1-bit weights    per channel: code = sign (zero counts as +1),
                   scale = mean absolute value; an all-zero channel stores
                   scale 1 with all-(+1) codes.
  3-bit weights    per channel: scale = max absolute value / 3 (1 if the
                   channel is all zero, with zero codes), codes are
                   clamp(round(w / scale), -3, +3); -4 is never produced.
  5-bit acts       code = clamp(round(x / scale), 0, 31).
  biases           int32 in the accumulator domain:
                   round(b / (input_scale * weight_scale[c])).
  rounding         ties away from zero everywhere.
  packing          codes flatten row-major; each code occupies `bits` bits
                   LSB-first inside little-endian bytes; the final partial
                   byte is zero-padded. 3-bit codes use two's complement;
                   1-bit stores +1 as 1 and -1 as 0.

Scales are float32 so files re-serialize byte-identically.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "round_away",
    "binary_weight_codes",
    "septenary_weight_codes",
    "activation_codes",
    "bias_codes",
    "pack_fields",
]


def round_away(x: np.ndarray) -> np.ndarray:
    """Nearest integer, ties away from zero."""
    x = np.asarray(x, dtype=np.float64)
    signs = np.where(x < 0, -1.0, 1.0)
    return signs * np.floor(np.abs(x) + 0.5)


def _per_channel(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim != 4 or w.shape[2:] != (3, 3):
        raise ValueError(f"expected (C_out, C_in, 3, 3) weights, got {w.shape}")
    return w


def binary_weight_codes(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(codes int8 in {-1, +1}, scales float32)."""
    w = _per_channel(w)
    magnitude = np.abs(w).reshape(w.shape[0], -1).mean(axis=1)
    magnitude[magnitude == 0] = 1.0
    codes = np.where(w >= 0, 1, -1).astype(np.int8)
    return codes, magnitude.astype(np.float32)


def septenary_weight_codes(w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(codes int8 in -3..+3, scales float32)."""
    w = _per_channel(w)
    peak = np.abs(w).reshape(w.shape[0], -1).max(axis=1)
    dead = peak == 0
    steps = np.where(dead, 1.0, peak / 3.0)
    codes = round_away(w / steps[:, None, None, None])
    codes = np.clip(codes, -3, 3).astype(np.int8)
    codes[dead] = 0
    return codes, steps.astype(np.float32)


def activation_codes(x: np.ndarray, scale: float) -> np.ndarray:
    """uint8 codes 0..31."""
    if scale <= 0:
        raise ValueError(f"activation scale must be positive, got {scale}")
    q = round_away(np.asarray(x, dtype=np.float64) / scale)
    return np.clip(q, 0, 31).astype(np.uint8)


def bias_codes(fbias: np.ndarray, input_scale: float,
               weight_scales: np.ndarray) -> np.ndarray:
    """int32 accumulator-domain biases."""
    denom = input_scale * np.asarray(weight_scales, dtype=np.float64)
    q = round_away(np.asarray(fbias, dtype=np.float64) / denom)
    return np.clip(q, -(2 ** 31), 2 ** 31 - 1).astype(np.int32)


def pack_fields(codes: np.ndarray, bits: int) -> bytes:
    """Row-major codes to little-endian bit-packed bytes."""
    if bits not in (1, 3, 5):
        raise ValueError(f"bits must be 1, 3 or 5, got {bits}")
    flat = np.asarray(codes).ravel().astype(np.int64)
    if bits == 1:
        fields = (flat > 0).astype(np.uint8)
    else:
        fields = (flat & ((1 << bits) - 1)).astype(np.uint8)
    # one row per code, columns are its bits from least significant up
    stream = ((fields[:, None] >> np.arange(bits)) & 1).ravel()
    pad = (-len(stream)) % 8
    if pad:
        stream = np.concatenate([stream, np.zeros(pad, dtype=np.uint8)])
    weights = np.array([1, 2, 4, 8, 16, 32, 64, 128], dtype=np.uint8)
    return (stream.reshape(-1, 8) * weights).sum(axis=1, dtype=np.uint8) \
        .astype(np.uint8).tobytes()
