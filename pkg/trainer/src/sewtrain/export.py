"""Calibrate, quantize and serialize a trained float net.

The binary layout (little-endian throughout):

    magic b"GNFC", u32 version (1), u32 payload length, payload, u32 CRC32.

    payload: u32-length-prefixed architecture text (UTF-8), u32 x 3 input
    shape, f32 input activation scale, u32 label count with u16-length
    UTF-8 labels, u32 layer count, then per layer a u8 kind tag: 0 = conv
    (u32 in, u32 out, u8 padding, u8 bits, u8 relu, f32 output scale,
    u32-length packed codes, f32 per-channel scales, i32 per-channel
    biases), 1 = pool (u32 channels).

Images render as 0/255 ink; training and calibration run on pixels / 255,
so the stored input scale is 1/31: full ink maps to code 31 whether the
loader quantizes the 0..1 or the 0..255 domain.
"""

from __future__ import annotations

import struct
import zlib
from pathlib import Path

import numpy as np

from .config import TrainConfig
from .netdef import PlanNet
from .quant import (
    bias_codes,
    binary_weight_codes,
    pack_fields,
    septenary_weight_codes,
)
from .reference import ConvRecord, PoolRecord, QuantModel, float_forward

__all__ = ["SpecMismatch", "quantize_net", "model_bytes", "export_model"]

_MAGIC = b"GNFC"
_VERSION = 1
INPUT_SCALE = float(np.float32(1.0 / 31.0))


class SpecMismatch(Exception):
    pass


def quantize_net(net: PlanNet, cfg: TrainConfig, labels,
                 samples) -> QuantModel:
    """Calibrated integer model from a float net.

    samples: iterable of (C, H, W) float images in 0..1 used to pick
    per-layer output scales (observed max maps to code 31).
    """
    plan = cfg.layer_plan()
    arrays = net.conv_arrays()
    expect = [s for s in plan if s[0] == "conv"]
    if len(arrays) != len(expect):
        raise SpecMismatch(f"net has {len(arrays)} convs, plan wants "
                           f"{len(expect)}")
    for (_, c_in, c_out, *_rest), (w, b) in zip(expect, arrays):
        if w.shape != (c_out, c_in, 3, 3) or b.shape != (c_out,):
            raise SpecMismatch(
                f"weights {w.shape} do not fit conv {c_in}->{c_out}")
    labels = tuple(labels)
    if len(labels) != cfg.num_classes:
        raise SpecMismatch(f"{len(labels)} labels for {cfg.num_classes} "
                           f"classes")

    samples = list(samples)
    if not samples:
        raise SpecMismatch("calibration needs at least one sample")
    maxima: list[float] = []
    for sample in samples:
        float_forward(plan, arrays, sample, collect_maxima=maxima)
    out_scales = [float(np.float32(m / 31.0)) if m > 0 else 1.0
                  for m in maxima]

    records = []
    conv_i = 0
    in_scale = INPUT_SCALE
    for step in plan:
        if step[0] == "pool":
            records.append(PoolRecord(channels=step[1]))
            continue
        _, c_in, c_out, padding, bits, relu = step
        weight, fbias = arrays[conv_i]
        coder = binary_weight_codes if bits == 1 else septenary_weight_codes
        codes, scales = coder(weight)
        ibias = bias_codes(fbias, in_scale, scales)
        records.append(ConvRecord(
            in_channels=c_in, out_channels=c_out, padding=padding,
            bits=bits, relu=relu, out_scale=out_scales[conv_i],
            codes=codes, scales=scales, bias=ibias))
        in_scale = out_scales[conv_i]
        conv_i += 1

    side = cfg.input_side // cfg.scale_divisor
    return QuantModel(
        input_shape=(cfg.input_channels, side, side),
        input_scale=INPUT_SCALE, records=records, labels=labels,
        arch_text=cfg.arch_text())


def model_bytes(model: QuantModel) -> bytes:
    parts = []
    arch = model.arch_text.encode("utf-8")
    parts.append(struct.pack("<I", len(arch)))
    parts.append(arch)
    parts.append(struct.pack("<III", *model.input_shape))
    parts.append(struct.pack("<f", model.input_scale))
    parts.append(struct.pack("<I", len(model.labels)))
    for label in model.labels:
        raw = label.encode("utf-8")
        parts.append(struct.pack("<H", len(raw)))
        parts.append(raw)
    parts.append(struct.pack("<I", len(model.records)))
    for rec in model.records:
        if isinstance(rec, PoolRecord):
            parts.append(struct.pack("<BI", 1, rec.channels))
            continue
        parts.append(struct.pack(
            "<BIIBBBf", 0, rec.in_channels, rec.out_channels,
            rec.padding, rec.bits, 1 if rec.relu else 0, rec.out_scale))
        packed = pack_fields(rec.codes, rec.bits)
        parts.append(struct.pack("<I", len(packed)))
        parts.append(packed)
        parts.append(rec.scales.astype("<f4").tobytes())
        parts.append(rec.bias.astype("<i4").tobytes())
    payload = b"".join(parts)
    return (_MAGIC + struct.pack("<II", _VERSION, len(payload)) + payload
            + struct.pack("<I", zlib.crc32(payload)))


def export_model(net: PlanNet, cfg: TrainConfig, labels, samples,
                 path) -> QuantModel:
    """Quantize and write; returns the model for reference inference."""
    model = quantize_net(net, cfg, labels, samples)
    Path(path).write_bytes(model_bytes(model))
    return model
