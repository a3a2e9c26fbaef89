"""Quantized-inference reference, independent of the runtime.

Executes an exported model the way the target device would: int64
accumulation over weight and activation codes, one float64 rescale per
channel, round-ties-away requantization to 5 bits, raw float scores out of
the final (linear) convolution. Used to cross-check the runtime's engine
on the same files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quant import activation_codes, round_away

__all__ = ["ConvRecord", "PoolRecord", "QuantModel", "float_forward",
           "int_scores", "predict"]


@dataclass
class ConvRecord:
    in_channels: int
    out_channels: int
    padding: int
    bits: int
    relu: bool
    out_scale: float
    codes: np.ndarray   # (C_out, C_in, 3, 3) int8
    scales: np.ndarray  # (C_out,) float32
    bias: np.ndarray    # (C_out,) int32


@dataclass
class PoolRecord:
    channels: int


@dataclass
class QuantModel:
    input_shape: tuple[int, int, int]
    input_scale: float
    records: list
    labels: tuple[str, ...]
    arch_text: str = ""


def _patch_matrix(x: np.ndarray, padding: int):
    """(C*9, Ho*Wo) matrix of 3x3 patches, rows ordered (channel, ky, kx)."""
    if padding:
        x = np.pad(x, ((0, 0), (1, 1), (1, 1)))
    windows = np.lib.stride_tricks.sliding_window_view(x, (3, 3),
                                                       axis=(1, 2))
    c, ho, wo = windows.shape[:3]
    return windows.transpose(0, 3, 4, 1, 2).reshape(c * 9, ho * wo), (ho, wo)


def _conv_codes(codes: np.ndarray, rec: ConvRecord) -> np.ndarray:
    cols, (ho, wo) = _patch_matrix(codes.astype(np.int64), rec.padding)
    flat_w = rec.codes.astype(np.int64).reshape(rec.out_channels, -1)
    acc = flat_w @ cols + rec.bias.astype(np.int64)[:, None]
    return acc.reshape(rec.out_channels, ho, wo)


def int_scores(model: QuantModel, image: np.ndarray) -> np.ndarray:
    """Raw float64 class scores for one (C, H, W) float image."""
    if image.shape != model.input_shape:
        raise ValueError(f"image {image.shape} vs model input "
                         f"{model.input_shape}")
    codes = activation_codes(image, model.input_scale)
    scale = float(model.input_scale)
    last = len(model.records) - 1
    for i, rec in enumerate(model.records):
        if isinstance(rec, PoolRecord):
            c, h, w = codes.shape
            if h % 2 or w % 2:
                raise ValueError(f"pool {i} sees odd {h}x{w} map")
            codes = codes.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))
            continue
        acc = _conv_codes(codes, rec)
        factors = np.float64(scale) * rec.scales.astype(np.float64)
        real = acc.astype(np.float64) * factors[:, None, None]
        if rec.relu:
            real = np.maximum(real, 0.0)
        if i == last and not rec.relu:
            return real.reshape(-1)
        codes = np.clip(round_away(real / rec.out_scale), 0, 31) \
            .astype(np.uint8)
        scale = float(rec.out_scale)
    raise ValueError("model has no linear scoring layer at the end")


def predict(model: QuantModel, image: np.ndarray) -> int:
    return int(np.argmax(int_scores(model, image)))


def float_forward(plan, conv_arrays, image: np.ndarray,
                  collect_maxima: list | None = None) -> np.ndarray:
    """Float64 forward through the plan; optionally records per-conv maxima."""
    x = np.asarray(image, dtype=np.float64)
    conv_i = 0
    for step in plan:
        if step[0] == "pool":
            c, h, w = x.shape
            x = x.reshape(c, h // 2, 2, w // 2, 2).max(axis=(2, 4))
            continue
        _, _c_in, c_out, padding, _bits, relu = step
        weight, bias = conv_arrays[conv_i]
        cols, (ho, wo) = _patch_matrix(x, padding)
        real = weight.reshape(c_out, -1) @ cols + bias[:, None]
        x = real.reshape(c_out, ho, wo)
        if relu:
            x = np.maximum(x, 0.0)
        if collect_maxima is not None:
            if conv_i == len(collect_maxima):
                collect_maxima.append(0.0)
            collect_maxima[conv_i] = max(collect_maxima[conv_i],
                                         float(x.max(initial=0.0)))
        conv_i += 1
    return x
