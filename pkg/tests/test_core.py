import numpy as np
import pytest
from hypothesis import given, strategies as st

from touchlab import errors
from touchlab.core import (
    DEFAULT_CHANNELS,
    ModalityKind,
    ModalitySample,
    RecordLog,
    StreamDescriptor,
    WindowSample,
    frame_delay,
    validate_descriptor,
)


class TestValidateDescriptor:
    def test_visuotactile_default_ok(self):
        desc = StreamDescriptor.default(0, ModalityKind.VISUOTACTILE)
        assert desc.rate_hz == 240.0
        assert desc.channels == 3
        validate_descriptor(desc)

    def test_zero_rate_rejected(self):
        desc = StreamDescriptor(1, ModalityKind.SURFACE_AUDIO, 0.0, channels=1,
                                sample_bits=16)
        with pytest.raises(errors.ZeroRate):
            validate_descriptor(desc)

    def test_gas_default_ok(self):
        desc = StreamDescriptor(2, ModalityKind.GAS, 1.0, channels=4, sample_bits=32)
        validate_descriptor(desc)

    def test_zero_channels_rejected(self):
        desc = StreamDescriptor(3, ModalityKind.HEAT, 1.0, channels=0, sample_bits=32)
        with pytest.raises(errors.ZeroChannels):
            validate_descriptor(desc)

    def test_unknown_kind_rejected(self):
        desc = StreamDescriptor(4, "bogus", 1.0, channels=1, sample_bits=32)
        with pytest.raises(errors.UnknownKind):
            validate_descriptor(desc)


class TestFrameDelay:
    def test_240_fps(self):
        assert frame_delay(240.0) == pytest.approx(4.17e-3, abs=0.01e-3)

    def test_60_fps(self):
        assert frame_delay(60.0) == pytest.approx(16.7e-3, abs=0.05e-3)

    def test_unit_rate(self):
        assert frame_delay(1.0) == 1.0

    def test_zero_rate(self):
        with pytest.raises(errors.ZeroRate):
            frame_delay(0.0)

    @given(st.floats(min_value=0.1, max_value=1e5),
           st.floats(min_value=1e-6, max_value=1e4))
    def test_strictly_decreasing(self, rate, bump):
        assert frame_delay(rate + bump) < frame_delay(rate)


class TestRecordLogModel:
    def test_payload_shape_enforced(self):
        log = RecordLog()
        log.add_stream(StreamDescriptor.default(0, ModalityKind.INERTIAL))
        with pytest.raises(errors.ShapeMismatch):
            log.append(ModalitySample(0, 0, np.zeros(4, dtype="<f4")))
        log.append(ModalitySample(0, 0, np.zeros(3, dtype="<f4")))
        assert len(log.samples) == 1

    def test_unknown_stream_rejected(self):
        log = RecordLog()
        with pytest.raises(KeyError):
            log.append(ModalitySample(7, 0, np.zeros(3, dtype="<f4")))

    def test_unsorted_per_stream_detected(self):
        log = RecordLog()
        log.add_stream(StreamDescriptor.default(0, ModalityKind.HEAT))
        log.append(ModalitySample(0, 10, np.zeros(1, dtype="<f4")))
        log.append(ModalitySample(0, 5, np.zeros(1, dtype="<f4")))
        with pytest.raises(errors.UnsortedSamples):
            log.validate_sorted()


def _window_kwargs(**over):
    kw = dict(
        visuotactile=np.zeros((10, 120, 120, 3), dtype="u1"),
        inertial=np.zeros((10, 3), dtype="<f4"),
        pressure=np.zeros((10, 4), dtype="<f4"),
        audio=np.zeros((40, 64, 1), dtype="<f4"),
        action_label="tap",
        material_label="wood",
        finger_id=0,
    )
    kw.update(over)
    return kw


class TestWindowSample:
    def test_valid_window(self):
        w = WindowSample(**_window_kwargs())
        assert w.duration_s == pytest.approx(1.33)

    @pytest.mark.parametrize("field,shape,dtype", [
        ("visuotactile", (9, 120, 120, 3), "u1"),
        ("inertial", (10, 4), "<f4"),
        ("pressure", (10, 3), "<f4"),
        ("audio", (64, 64, 1), "<f4"),
    ])
    def test_bad_shapes_rejected(self, field, shape, dtype):
        with pytest.raises(errors.ShapeMismatch):
            WindowSample(**_window_kwargs(**{field: np.zeros(shape, dtype=dtype)}))

    def test_bad_labels_rejected(self):
        with pytest.raises(errors.LabelOutOfRange):
            WindowSample(**_window_kwargs(action_label="poke"))
        with pytest.raises(errors.LabelOutOfRange):
            WindowSample(**_window_kwargs(material_label="metal"))
        with pytest.raises(errors.LabelOutOfRange):
            WindowSample(**_window_kwargs(finger_id=4))
