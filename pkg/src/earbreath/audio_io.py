"""Mono PCM WAV reading and writing.

Supported encodings: 16- and 24-bit integer PCM and 32-bit IEEE float.
Samples are normalized to [-1, 1] on read. The parser is deliberately strict:
a truncated or malformed file raises ``FormatError`` with the byte offset of
the offending structure instead of returning partial data.
"""

from __future__ import annotations

import struct

import numpy as np

from .blocks import SampleBlock
from .errors import FormatError, ParameterError

_PCM = 1
_IEEE_FLOAT = 3
_EXTENSIBLE = 0xFFFE


def read_wav(path) -> SampleBlock:
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12:
        raise FormatError("file too short for a RIFF header", 0)
    if data[0:4] != b"RIFF":
        raise FormatError("missing RIFF magic", 0)
    if data[8:12] != b"WAVE":
        raise FormatError("missing WAVE form type", 8)

    fmt = None
    payload = None
    offset = 12
    while offset + 8 <= len(data):
        chunk_id = data[offset:offset + 4]
        (size,) = struct.unpack_from("<I", data, offset + 4)
        body_start = offset + 8
        if body_start + size > len(data):
            raise FormatError(f"chunk {chunk_id!r} truncated "
                              f"(declares {size} bytes)", offset)
        if chunk_id == b"fmt ":
            if size < 16:
                raise FormatError("fmt chunk too short", offset)
            fmt = struct.unpack_from("<HHIIHH", data, body_start)
            fmt_offset = offset
        elif chunk_id == b"data":
            payload = data[body_start:body_start + size]
            data_offset = offset
        offset = body_start + size + (size & 1)

    if fmt is None:
        raise FormatError("no fmt chunk found", 12)
    if payload is None:
        raise FormatError("no data chunk found", 12)

    audio_format, channels, sample_rate, _, block_align, bits = fmt
    if audio_format == _EXTENSIBLE:
        raise FormatError("WAVE_FORMAT_EXTENSIBLE is not supported", fmt_offset)
    if channels != 1:
        raise FormatError(f"expected mono audio, got {channels} channels", fmt_offset)
    if audio_format == _PCM and bits == 16:
        if len(payload) % 2:
            raise FormatError("data chunk is not a whole number of samples",
                              data_offset)
        samples = np.frombuffer(payload, dtype="<i2").astype(np.float64) / 32768.0
    elif audio_format == _PCM and bits == 24:
        if len(payload) % 3:
            raise FormatError("data chunk is not a whole number of samples",
                              data_offset)
        b = np.frombuffer(payload, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        raw = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        raw = np.where(raw & 0x800000, raw - (1 << 24), raw)
        samples = raw.astype(np.float64) / float(1 << 23)
    elif audio_format == _IEEE_FLOAT and bits == 32:
        if len(payload) % 4:
            raise FormatError("data chunk is not a whole number of samples",
                              data_offset)
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    else:
        raise FormatError(f"unsupported encoding: format {audio_format}, "
                          f"{bits} bits", fmt_offset)
    if len(samples) == 0:
        raise FormatError("data chunk contains no samples", data_offset)
    return SampleBlock(samples, float(sample_rate))


def write_wav(path, block: SampleBlock, encoding: str = "float32") -> None:
    """Write a mono block; ``encoding`` is one of float32, pcm16, pcm24."""
    x = block.samples
    if encoding == "float32":
        payload = x.astype("<f4").tobytes()
        audio_format, bits = _IEEE_FLOAT, 32
    elif encoding == "pcm16":
        ints = np.clip(np.rint(x * 32768.0), -32768, 32767).astype("<i2")
        payload = ints.tobytes()
        audio_format, bits = _PCM, 16
    elif encoding == "pcm24":
        full = 1 << 23
        ints = np.clip(np.rint(x * full), -full, full - 1).astype(np.int32)
        b = np.empty((len(ints), 3), dtype=np.uint8)
        b[:, 0] = ints & 0xFF
        b[:, 1] = (ints >> 8) & 0xFF
        b[:, 2] = (ints >> 16) & 0xFF
        payload = b.tobytes()
        audio_format, bits = _PCM, 24
    else:
        raise ParameterError(f"unknown encoding {encoding!r}")

    rate = int(round(block.sample_rate_hz))
    block_align = bits // 8
    header = struct.pack(
        "<4sI4s4sIHHIIHH4sI",
        b"RIFF", 36 + len(payload), b"WAVE",
        b"fmt ", 16, audio_format, 1, rate, rate * block_align, block_align, bits,
        b"data", len(payload))
    with open(path, "wb") as fh:
        fh.write(header + payload)
        if len(payload) & 1:
            fh.write(b"\x00")
