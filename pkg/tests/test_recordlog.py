import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from touchlab import errors
from touchlab.core import ModalityKind, ModalitySample, RecordLog, StreamDescriptor
from touchlab.recordlog import (
    MAGIC,
    log_from_bytes,
    log_to_bytes,
    read_log,
    write_log,
)


def _empty_log():
    log = RecordLog()
    for sid, kind in enumerate(ModalityKind):
        log.add_stream(StreamDescriptor.default(sid, kind))
    return log


def _payload_for(rng, desc):
    kind = desc.kind
    if kind is ModalityKind.VISUOTACTILE:
        return rng.integers(0, 256, size=(desc.height, desc.width, desc.channels),
                            dtype=np.uint8)
    if kind is ModalityKind.SURFACE_AUDIO:
        n = int(rng.integers(1, 64))
        return rng.integers(-32768, 32768, size=(n, desc.channels)).astype("<i2")
    return rng.normal(size=desc.channels).astype("<f4")


def _random_log(seed, n_samples):
    rng = np.random.default_rng(seed)
    log = _empty_log()
    sids = list(log.descriptors)
    t = {sid: 0 for sid in sids}
    for _ in range(n_samples):
        sid = int(rng.choice(sids))
        t[sid] += int(rng.integers(1, 10_000_000))
        log.append(ModalitySample(sid, t[sid], _payload_for(rng, log.descriptors[sid])))
    return log


def _logs_equal(a, b):
    if a.descriptors != b.descriptors:
        return False
    if len(a.samples) != len(b.samples):
        return False
    for x, y in zip(a.samples, b.samples):
        if x.stream_id != y.stream_id or x.t_ns != y.t_ns:
            return False
        if x.payload.shape != y.payload.shape or not np.array_equal(x.payload, y.payload):
            return False
    return True


class TestRoundTrip:
    def test_empty_log(self, tmp_path):
        log = _empty_log()
        path = tmp_path / "empty.d36r"
        write_log(log, path)
        back = read_log(path)
        assert back.descriptors == log.descriptors
        assert back.samples == []

    def test_1000_mixed_samples_bit_exact(self, tmp_path):
        log = _random_log(seed=7, n_samples=1000)
        path = tmp_path / "mixed.d36r"
        write_log(log, path)
        data1 = path.read_bytes()
        back = read_log(path)
        assert _logs_equal(log, back)
        # Byte-compare oracle: re-serializing the parsed log reproduces the file.
        assert log_to_bytes(back) == data1

    @settings(max_examples=25, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1), n=st.integers(0, 120))
    def test_round_trip_is_identity(self, seed, n):
        log = _random_log(seed, n)
        data = log_to_bytes(log)
        back = log_from_bytes(data)
        assert _logs_equal(log, back)
        assert log_to_bytes(back) == data


class TestCorruption:
    def test_bad_magic(self):
        data = bytearray(log_to_bytes(_random_log(1, 5)))
        assert data[:4] == MAGIC
        data[:4] = b"XXXX"
        with pytest.raises(errors.BadMagic):
            log_from_bytes(bytes(data))

    def test_version_mismatch(self):
        data = bytearray(log_to_bytes(_random_log(1, 5)))
        data[4:6] = (99).to_bytes(2, "little")
        with pytest.raises(errors.VersionMismatch):
            log_from_bytes(bytes(data))

    def test_truncated_chunk(self):
        data = log_to_bytes(_random_log(1, 5))
        with pytest.raises(errors.TruncatedChunk):
            log_from_bytes(data[:-3])

    def test_unsorted_samples_refused_at_write(self):
        log = _empty_log()
        sid = 3  # inertial
        log.append(ModalitySample(sid, 100, np.zeros(3, dtype="<f4")))
        log.append(ModalitySample(sid, 50, np.zeros(3, dtype="<f4")))
        with pytest.raises(errors.UnsortedSamples):
            log_to_bytes(log)
