"""Binary record/replay log format.

Fixed little-endian layout so the transport model knows exact per-sample
byte counts, and so write -> read -> write round-trips are byte identical.

Header::

    magic        4 bytes   b"D36R"
    version      u16       format version, currently 1
    n_streams    u16       descriptor count

Descriptor table, one entry per stream (sorted by stream_id)::

    stream_id    u16
    kind         u8        ModalityKind value
    rate_hz      f64
    channels     u16
    sample_bits  u8
    width        u16       image streams only, else 0
    height       u16       image streams only, else 0

Chunks, one per sample, in recorded order::

    stream_id    u16
    t_ns         u64
    payload_len  u32
    payload      payload_len bytes (canonical little-endian dtype)

No compression, no alignment padding.
"""

from __future__ import annotations

import io
import struct

import numpy as np

from . import errors
from .core import (
    PAYLOAD_DTYPES,
    ModalityKind,
    ModalitySample,
    RecordLog,
    StreamDescriptor,
    validate_descriptor,
)

MAGIC = b"D36R"
VERSION = 1

_HEADER = struct.Struct("<4sHH")
_DESC = struct.Struct("<HBdHBHH")
_CHUNK = struct.Struct("<HQI")


def log_to_bytes(log: RecordLog) -> bytes:
    """Serialize a RecordLog; raises if any invariant is violated."""
    for desc in log.descriptors.values():
        validate_descriptor(desc)
    log.validate_sorted()

    buf = io.BytesIO()
    buf.write(_HEADER.pack(MAGIC, VERSION, len(log.descriptors)))
    for sid in sorted(log.descriptors):
        d = log.descriptors[sid]
        buf.write(_DESC.pack(d.stream_id, d.kind.value, d.rate_hz, d.channels,
                             d.sample_bits, d.width, d.height))
    for s in log.samples:
        desc = log.descriptors[s.stream_id]
        payload = np.ascontiguousarray(s.payload, dtype=PAYLOAD_DTYPES[desc.kind])
        raw = payload.tobytes()
        buf.write(_CHUNK.pack(s.stream_id, s.t_ns, len(raw)))
        buf.write(raw)
    return buf.getvalue()


def log_from_bytes(data: bytes) -> RecordLog:
    """Parse bytes produced by :func:`log_to_bytes`."""
    if len(data) < _HEADER.size:
        raise errors.TruncatedChunk("file shorter than header")
    magic, version, n_streams = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise errors.BadMagic(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise errors.VersionMismatch(f"unsupported version {version}, expected {VERSION}")

    off = _HEADER.size
    log = RecordLog()
    for _ in range(n_streams):
        if off + _DESC.size > len(data):
            raise errors.TruncatedChunk("descriptor table truncated")
        sid, kind_v, rate, channels, bits, width, height = _DESC.unpack_from(data, off)
        off += _DESC.size
        try:
            kind = ModalityKind(kind_v)
        except ValueError as exc:
            raise errors.UnknownKind(f"unknown modality code {kind_v}") from exc
        log.add_stream(StreamDescriptor(sid, kind, rate, channels, bits, width, height))

    while off < len(data):
        if off + _CHUNK.size > len(data):
            raise errors.TruncatedChunk(f"chunk header truncated at offset {off}")
        sid, t_ns, payload_len = _CHUNK.unpack_from(data, off)
        off += _CHUNK.size
        if off + payload_len > len(data):
            raise errors.TruncatedChunk(f"chunk payload truncated at offset {off}")
        desc = log.descriptors.get(sid)
        if desc is None:
            raise errors.TruncatedChunk(f"chunk references unknown stream {sid}")
        raw = data[off:off + payload_len]
        off += payload_len
        payload = _decode_payload(desc, raw)
        log.append(ModalitySample(sid, t_ns, payload))
    log.validate_sorted()
    return log


def _decode_payload(desc: StreamDescriptor, raw: bytes) -> np.ndarray:
    dtype = PAYLOAD_DTYPES[desc.kind]
    flat = np.frombuffer(raw, dtype=dtype)
    if desc.kind is ModalityKind.VISUOTACTILE:
        want = desc.height * desc.width * desc.channels
        if flat.size != want:
            raise errors.TruncatedChunk(
                f"stream {desc.stream_id}: image payload {flat.size} != {want} values")
        return flat.reshape(desc.height, desc.width, desc.channels)
    if desc.kind is ModalityKind.SURFACE_AUDIO:
        if flat.size == 0 or flat.size % desc.channels:
            raise errors.TruncatedChunk(
                f"stream {desc.stream_id}: audio payload not a whole block")
        return flat.reshape(-1, desc.channels)
    if flat.size != desc.channels:
        raise errors.TruncatedChunk(
            f"stream {desc.stream_id}: vector payload {flat.size} != {desc.channels}")
    return flat


def write_log(log: RecordLog, path) -> int:
    """Write ``log`` to ``path``; returns bytes written."""
    data = log_to_bytes(log)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def read_log(path) -> RecordLog:
    with open(path, "rb") as fh:
        return log_from_bytes(fh.read())
