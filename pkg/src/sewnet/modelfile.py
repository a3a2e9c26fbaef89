"""Binary container for quantized models.

Layout (all integers little-endian):

    magic  b"GNFC"
    u32    format version (currently 1)
    u32    payload length in bytes
    bytes  payload
    u32    CRC32 of the payload

Payload:

    u32 + bytes   architecture config text (UTF-8 key=value lines, may be empty)
    u32 x 3       input shape (channels, height, width)
    f32           input activation scale
    u32           label count; each label is u16 length + UTF-8 bytes
    u32           layer count; each layer starts with a u8 kind tag:
                    0 = conv: u32 in_ch, u32 out_ch, u8 padding, u8 bits,
                        u8 relu, f32 out_act_scale,
                        u32 + bytes packed weight codes,
                        f32 x out_ch scales, i32 x out_ch biases
                    1 = pool: u32 channels

Scales are stored as float32 and reloaded as exactly those float32 values,
so save -> load -> save reproduces the file byte for byte.
"""

from __future__ import annotations

import io
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dsa_engine import (
    CONV,
    POOL,
    LayerSpec,
    MissingWeights,
    NetworkGraph,
    conv_layer,
    pool_layer,
)
from .qtensor import QuantWeights, pack_codes, unpack_codes

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "BadMagic",
    "VersionUnsupported",
    "ChecksumMismatch",
    "Truncated",
    "ModelBundle",
    "model_to_bytes",
    "model_from_bytes",
    "save_model",
    "load_model",
]

MAGIC = b"GNFC"
FORMAT_VERSION = 1

_KIND_CONV = 0
_KIND_POOL = 1


class BadMagic(Exception):
    pass


class VersionUnsupported(Exception):
    pass


class ChecksumMismatch(Exception):
    pass


class Truncated(Exception):
    pass


@dataclass
class ModelBundle:
    graph: NetworkGraph
    labels: tuple[str, ...]
    arch_text: str = ""


class _Writer:
    def __init__(self):
        self.buf = io.BytesIO()

    def u8(self, v):
        self.buf.write(struct.pack("<B", v))

    def u16(self, v):
        self.buf.write(struct.pack("<H", v))

    def u32(self, v):
        self.buf.write(struct.pack("<I", v))

    def i32(self, v):
        self.buf.write(struct.pack("<i", v))

    def f32(self, v):
        self.buf.write(struct.pack("<f", v))

    def blob(self, data: bytes):
        self.u32(len(data))
        self.buf.write(data)

    def getvalue(self) -> bytes:
        return self.buf.getvalue()


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise Truncated(
                f"needed {n} bytes at offset {self.pos}, "
                f"only {len(self.data) - self.pos} remain")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def f32(self) -> float:
        return float(struct.unpack("<f", self.take(4))[0])

    def blob(self) -> bytes:
        return self.take(self.u32())

    def done(self) -> bool:
        return self.pos == len(self.data)


def model_to_bytes(bundle: ModelBundle) -> bytes:
    g = bundle.graph
    w = _Writer()
    w.blob(bundle.arch_text.encode("utf-8"))
    for d in g.input_shape:
        w.u32(d)
    w.f32(g.input_act_scale)
    w.u32(len(bundle.labels))
    for label in bundle.labels:
        raw = label.encode("utf-8")
        if len(raw) > 0xFFFF:
            raise ValueError(f"label too long ({len(raw)} bytes)")
        w.u16(len(raw))
        w.buf.write(raw)
    w.u32(len(g.layers))
    for i, layer in enumerate(g.layers):
        if layer.kind == POOL:
            w.u8(_KIND_POOL)
            w.u32(layer.in_channels)
        elif layer.kind == CONV:
            qw = layer.qweights
            if qw is None:
                raise MissingWeights(
                    f"layer {i} is not quantized; only integer-mode graphs "
                    f"can be saved")
            w.u8(_KIND_CONV)
            w.u32(layer.in_channels)
            w.u32(layer.out_channels)
            w.u8(layer.padding)
            w.u8(qw.bits)
            w.u8(1 if layer.relu else 0)
            w.f32(layer.out_act_scale)
            w.blob(qw.packed())
            w.buf.write(np.ascontiguousarray(qw.scales,
                                             dtype="<f4").tobytes())
            w.buf.write(np.ascontiguousarray(qw.bias,
                                             dtype="<i4").tobytes())
        else:
            raise ValueError(f"layer {i}: unknown kind {layer.kind!r}")
    payload = w.getvalue()
    head = MAGIC + struct.pack("<II", FORMAT_VERSION, len(payload))
    return head + payload + struct.pack("<I", zlib.crc32(payload))


def model_from_bytes(data: bytes) -> ModelBundle:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise BadMagic("not a model file (bad magic)")
    version = r.u32()
    if version != FORMAT_VERSION:
        raise VersionUnsupported(
            f"format version {version}, this reader supports {FORMAT_VERSION}")
    payload = r.blob()
    stored_crc = r.u32()
    actual_crc = zlib.crc32(payload)
    if stored_crc != actual_crc:
        raise ChecksumMismatch(
            f"payload CRC32 {actual_crc:#010x} != stored {stored_crc:#010x}")

    p = _Reader(payload)
    arch_text = p.blob().decode("utf-8")
    shape = (p.u32(), p.u32(), p.u32())
    input_act_scale = p.f32()
    labels = tuple(p.take(p.u16()).decode("utf-8")
                   for _ in range(p.u32()))
    layers: list[LayerSpec] = []
    for i in range(p.u32()):
        kind = p.u8()
        if kind == _KIND_POOL:
            layers.append(pool_layer(p.u32()))
        elif kind == _KIND_CONV:
            c_in, c_out = p.u32(), p.u32()
            padding, bits, relu = p.u8(), p.u8(), p.u8()
            out_scale = p.f32()
            packed = p.blob()
            scales = np.frombuffer(p.take(4 * c_out), dtype="<f4").copy()
            bias = np.frombuffer(p.take(4 * c_out), dtype="<i4").copy()
            codes = unpack_codes(packed, bits, c_out * c_in * 9)
            qw = QuantWeights(bits=bits,
                              codes=codes.reshape(c_out, c_in, 3, 3),
                              scales=scales, bias=bias)
            layers.append(conv_layer(c_in, c_out, padding=padding, bits=bits,
                                     relu=bool(relu), out_act_scale=out_scale,
                                     qweights=qw))
        else:
            raise Truncated(f"layer {i}: unknown kind tag {kind}")
    if not p.done():
        raise Truncated(f"{len(payload) - p.pos} unparsed payload bytes")
    graph = NetworkGraph(input_shape=shape, input_act_scale=input_act_scale,
                         layers=layers)
    return ModelBundle(graph=graph, labels=labels, arch_text=arch_text)


def save_model(path, bundle: ModelBundle) -> None:
    Path(path).write_bytes(model_to_bytes(bundle))


def load_model(path) -> ModelBundle:
    return model_from_bytes(Path(path).read_bytes())
