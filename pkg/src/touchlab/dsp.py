"""Signal preprocessing for the feature pipelines.

Covers the whole preprocessing chain used downstream: Butterworth biquad
filtering (the pressure chain is a 0.95 Hz high-pass followed by a 50 Hz
low-pass), 64x64 mel spectrograms (n_fft=2048, n_overlap=1024, 64 mel
bands, power spectrum, dB scale, per-window min-max normalization),
multimodal window building with the fixed tensor layouts, and the ring-down
features (interpolated peak frequency, fitted decay time).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.signal

from . import errors
from .core import (
    AUDIO_WINDOW_SHAPE,
    WINDOW_DURATION_S,
    WINDOW_T,
    ModalityKind,
    RecordLog,
    StreamDescriptor,
    WindowSample,
)

# --- filtering ----------------------------------------------------------------

HIGHPASS = "highpass"
LOWPASS = "lowpass"

PRESSURE_HPF_HZ = 0.95
PRESSURE_LPF_HZ = 50.0


@dataclass(frozen=True)
class FilterSpec:
    """Butterworth filter as cascaded biquad sections.

    ``order`` counts biquad (second-order) sections, so the analog rolloff is
    40 dB/decade per section.
    """

    kind: str
    fc_hz: float
    sample_rate_hz: float
    order: int = 1

    def __post_init__(self):
        if self.kind not in (HIGHPASS, LOWPASS):
            raise ValueError(f"kind must be {HIGHPASS!r} or {LOWPASS!r}")
        if not (0 < self.fc_hz < self.sample_rate_hz / 2):
            raise errors.NyquistViolation(
                f"fc={self.fc_hz} Hz outside (0, {self.sample_rate_hz / 2}) Hz")
        if self.order < 1:
            raise ValueError("order must be >= 1")

    def sos(self) -> np.ndarray:
        return scipy.signal.butter(2 * self.order, self.fc_hz, btype=self.kind,
                                   fs=self.sample_rate_hz, output="sos")


def apply_filter(series: np.ndarray, spec: FilterSpec) -> np.ndarray:
    """Filter ``series`` (1-D, or 2-D filtered along axis 0)."""
    series = np.asarray(series, dtype=np.float64)
    return scipy.signal.sosfilt(spec.sos(), series, axis=0)


def pressure_preprocess(series: np.ndarray, rate_hz: float = 1000.0) -> np.ndarray:
    """Two series filters: HPF(0.95 Hz) then LPF(50 Hz).

    Removes static grasp offsets while keeping the fast transients the
    fingertips experience during perturbations.
    """
    hpf = FilterSpec(HIGHPASS, PRESSURE_HPF_HZ, rate_hz)
    lpf = FilterSpec(LOWPASS, PRESSURE_LPF_HZ, rate_hz)
    return apply_filter(apply_filter(series, hpf), lpf)


# --- spectrograms ---------------------------------------------------------------


@dataclass(frozen=True)
class SpectrogramSpec:
    n_fft: int = 2048
    n_overlap: int = 1024
    mel_bands: int = 64
    time_bins: int = 64

    def __post_init__(self):
        if not (0 <= self.n_overlap < self.n_fft):
            raise ValueError("n_overlap must be in [0, n_fft)")

    @property
    def hop(self) -> int:
        return self.n_fft - self.n_overlap


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_band_edges(n_bands: int, fmin_hz: float, fmax_hz: float) -> np.ndarray:
    """n_bands+2 edge frequencies, equally spaced on the mel scale."""
    return mel_to_hz(np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_bands + 2))


def mel_filterbank(n_bands: int, n_fft: int, rate_hz: float) -> np.ndarray:
    """Triangular mel filterbank, shape (n_bands, n_fft//2 + 1)."""
    edges = mel_band_edges(n_bands, 0.0, rate_hz / 2)
    freqs = np.fft.rfftfreq(n_fft, d=1.0 / rate_hz)
    fb = np.zeros((n_bands, freqs.size))
    for m in range(n_bands):
        lo, mid, hi = edges[m], edges[m + 1], edges[m + 2]
        up = (freqs >= lo) & (freqs <= mid)
        down = (freqs > mid) & (freqs <= hi)
        if mid > lo:
            fb[m, up] = (freqs[up] - lo) / (mid - lo)
        if hi > mid:
            fb[m, down] = (hi - freqs[down]) / (hi - mid)
    return fb


def _frame(x: np.ndarray, n_fft: int, hop: int) -> np.ndarray:
    n_frames = 1 + (x.size - n_fft) // hop
    idx = np.arange(n_fft)[None, :] + hop * np.arange(n_frames)[:, None]
    return x[idx]


def mel_power(audio: np.ndarray, rate_hz: float,
              spec: SpectrogramSpec = SpectrogramSpec()) -> np.ndarray:
    """Linear mel power frames, shape (n_frames, mel_bands)."""
    audio = np.asarray(audio, dtype=np.float64).ravel()
    if audio.size < spec.n_fft:
        raise errors.TooShort(
            f"need at least n_fft={spec.n_fft} samples, got {audio.size}")
    frames = _frame(audio, spec.n_fft, spec.hop)
    window = np.hanning(spec.n_fft)
    power = np.abs(np.fft.rfft(frames * window, axis=1)) ** 2  # (n_frames, bins)
    return power @ mel_filterbank(spec.mel_bands, spec.n_fft, rate_hz).T


def mel_spectrogram(audio: np.ndarray, rate_hz: float,
                    spec: SpectrogramSpec = SpectrogramSpec()) -> np.ndarray:
    """Mel power spectrogram as a (mel_bands, time_bins) image in [0, 1].

    Pipeline: Hann-windowed STFT -> power |X|^2 -> 64-band mel filterbank ->
    dB scale -> time axis linearly resampled to 64 columns -> min-max
    normalized per window.  A constant (e.g. all-zero) input normalizes to an
    all-zero image.
    """
    mel_db = 10.0 * np.log10(mel_power(audio, rate_hz, spec) + 1e-12)

    # Resample the time axis to a fixed column count.
    n_frames = mel_db.shape[0]
    src = np.arange(n_frames, dtype=np.float64)
    dst = np.linspace(0.0, n_frames - 1.0, spec.time_bins)
    resampled = np.empty((spec.mel_bands, spec.time_bins))
    for b in range(spec.mel_bands):
        resampled[b] = np.interp(dst, src, mel_db[:, b])

    lo, hi = resampled.min(), resampled.max()
    if hi - lo < 1e-12:
        return np.zeros_like(resampled)
    return (resampled - lo) / (hi - lo)


# --- ring-down features ---------------------------------------------------------


def peak_frequency(series: np.ndarray, rate_hz: float) -> float:
    """Frequency of the magnitude-spectrum argmax, quadratic-interpolated.

    Fits a parabola through the log-magnitude at the argmax bin and its two
    neighbours, giving sub-bin resolution on isolated peaks.
    """
    series = np.asarray(series, dtype=np.float64).ravel()
    if series.size < 256:
        raise errors.TooShort(f"need >= 256 samples, got {series.size}")
    mag = np.abs(np.fft.rfft(series))
    k = int(np.argmax(mag))
    bin_hz = rate_hz / series.size
    if 0 < k < mag.size - 1 and mag[k] > 0:
        logm = np.log(mag[k - 1:k + 2] + 1e-300)
        denom = logm[0] - 2.0 * logm[1] + logm[2]
        delta = 0.0 if denom == 0 else 0.5 * (logm[0] - logm[2]) / denom
        delta = float(np.clip(delta, -0.5, 0.5))
    else:
        delta = 0.0
    return (k + delta) * bin_hz


def decay_time(series: np.ndarray, rate_hz: float,
               onset_snr: float = 5.0) -> float:
    """Exponential decay constant tau of a ring-down, in seconds.

    Takes the Hilbert envelope, locates the onset (first crossing of
    ``onset_snr`` times the pre-onset floor), and least-squares fits the
    log envelope slope over the decaying section.
    """
    series = np.asarray(series, dtype=np.float64).ravel()
    if series.size < 64:
        raise errors.NoOnset("series too short for onset detection")
    env = np.abs(scipy.signal.hilbert(series))
    # Trim Hilbert edge ripple before looking at the envelope.
    margin = max(4, env.size // 50)
    env = env[margin:-margin]
    peak = env.max()
    if peak < 1e-12:
        raise errors.NoOnset("signal is identically zero")
    # Fit from the first near-peak point down to 10% of peak (or the end of
    # the record).
    start = int(np.argmax(env >= 0.95 * peak))
    tail = np.nonzero(env[start:] <= 0.1 * peak)[0]
    end = start + int(tail[0]) if tail.size else env.size
    if end - start < 16:
        raise errors.NoOnset("decaying section too short to fit")
    t = np.arange(start, end) / rate_hz
    logenv = np.log(env[start:end])
    slope, _ = np.polyfit(t, logenv, 1)
    if slope >= -1e-9:
        raise errors.NonDecaying(f"fitted envelope slope {slope:.3g} is not negative")
    tau = -1.0 / slope
    # A "decay" longer than the whole record is indistinguishable from a
    # sustained tone at this record length.
    if tau > 10.0 * series.size / rate_hz:
        raise errors.NonDecaying(f"fitted tau {tau:.3g}s exceeds record length tenfold")
    return float(tau)


# --- window building -------------------------------------------------------------


def _finger_streams(log: RecordLog) -> dict[int, dict[ModalityKind, StreamDescriptor]]:
    """Group descriptors by finger: stream_id // 8 is the finger index."""
    fingers: dict[int, dict[ModalityKind, StreamDescriptor]] = {}
    for desc in log.descriptors.values():
        fingers.setdefault(desc.stream_id // 8, {})[desc.kind] = desc
    return fingers


def _stack_series(log: RecordLog, desc: StreamDescriptor):
    """Collect one stream into (times_s, values) arrays.

    Audio blocks are expanded to per-sample rows with timestamps
    reconstructed from the block start time and the stream rate.
    """
    samples = log.stream_samples(desc.stream_id)
    if desc.kind is ModalityKind.SURFACE_AUDIO:
        times, rows = [], []
        for s in samples:
            n = s.payload.shape[0]
            times.append(s.t_ns / 1e9 + np.arange(n) / desc.rate_hz)
            rows.append(s.payload)
        if not rows:
            return np.empty(0), np.empty((0, desc.channels))
        return np.concatenate(times), np.concatenate(rows).astype(np.float64)
    times = np.array([s.t_ns / 1e9 for s in samples])
    values = np.stack([s.payload for s in samples]) if samples else np.empty((0,))
    return times, values


def _uniform_indices(n: int, t: int) -> np.ndarray:
    return np.round(np.linspace(0, n - 1, t)).astype(int)


def _interp_columns(times, values, query_times):
    out = np.empty((query_times.size, values.shape[1]))
    for c in range(values.shape[1]):
        out[:, c] = np.interp(query_times, times, values[:, c])
    return out


def audio_window_tiles(audio: np.ndarray, rate_hz: float,
                       spec: SpectrogramSpec = SpectrogramSpec()) -> np.ndarray:
    """Stack per-channel mel spectrograms into the (T*4, 64, 1) window layout.

    Each of the 4 channels yields a 64x64 spectrogram whose time axis is
    block-averaged down to T=10 rows; channels are stacked along the first
    axis.
    """
    n, n_ch = audio.shape
    tiles = []
    for c in range(n_ch):
        s = mel_spectrogram(audio[:, c], rate_hz, spec)  # (bands, time)
        by_time = s.T  # (time, bands)
        # Block-average 64 time bins down to 10 rows.
        edges = np.linspace(0, by_time.shape[0], WINDOW_T + 1).astype(int)
        rows = np.stack([by_time[a:b].mean(axis=0) for a, b in zip(edges, edges[1:])])
        tiles.append(rows)
    out = np.concatenate(tiles, axis=0)[:, :, None].astype("<f4")
    if out.shape != AUDIO_WINDOW_SHAPE:
        raise errors.ShapeMismatch(f"audio tile shape {out.shape}")
    return out


def build_windows(log: RecordLog, stride_s: float = WINDOW_DURATION_S,
                  labels: dict | None = None) -> list[WindowSample]:
    """Cut a log into labelled 1.33 s multimodal windows, one set per finger.

    Every finger must carry visuotactile, audio, pressure and inertial
    streams (gas/heat are not part of the window contract).  Pressure is
    run through the preprocessing chain before resampling.  ``labels`` maps
    window start time to (action, material): callers pass either a constant
    ``{"action": ..., "material": ...}`` or a callable
    ``labels(t_start_s) -> (action, material)``.
    """
    if stride_s <= 0:
        raise ValueError("stride must be positive")
    fingers = _finger_streams(log)
    required = (ModalityKind.VISUOTACTILE, ModalityKind.SURFACE_AUDIO,
                ModalityKind.SURFACE_PRESSURE, ModalityKind.INERTIAL)

    windows: list[WindowSample] = []
    for finger_id in sorted(fingers):
        streams = fingers[finger_id]
        for kind in required:
            if kind not in streams:
                raise errors.MissingModality(
                    f"finger {finger_id} is missing {kind.name}")

        vt_samples = log.stream_samples(streams[ModalityKind.VISUOTACTILE].stream_id)
        vt_times = np.array([s.t_ns / 1e9 for s in vt_samples])
        au_times, au_values = _stack_series(log, streams[ModalityKind.SURFACE_AUDIO])
        pr_times, pr_values = _stack_series(log, streams[ModalityKind.SURFACE_PRESSURE])
        in_times, in_values = _stack_series(log, streams[ModalityKind.INERTIAL])
        if min(vt_times.size, au_times.size, pr_times.size, in_times.size) == 0:
            raise errors.InsufficientData(f"finger {finger_id} has an empty stream")

        pr_filtered = pressure_preprocess(
            pr_values, streams[ModalityKind.SURFACE_PRESSURE].rate_hz)

        t0 = max(vt_times[0], au_times[0], pr_times[0], in_times[0])
        # Each stream nominally covers one sample period past its last
        # timestamp; a 13.3 s log cut at stride 1.33 s yields 10 windows.
        t_end = min(
            vt_times[-1] + 1.0 / streams[ModalityKind.VISUOTACTILE].rate_hz,
            au_times[-1] + 1.0 / streams[ModalityKind.SURFACE_AUDIO].rate_hz,
            pr_times[-1] + 1.0 / streams[ModalityKind.SURFACE_PRESSURE].rate_hz,
            in_times[-1] + 1.0 / streams[ModalityKind.INERTIAL].rate_hz,
        )
        start = t0
        while start + WINDOW_DURATION_S <= t_end + 1e-9:
            stop = start + WINDOW_DURATION_S

            vt_idx = np.nonzero((vt_times >= start) & (vt_times < stop))[0]
            if vt_idx.size < WINDOW_T:
                raise errors.InsufficientData(
                    f"finger {finger_id}: only {vt_idx.size} visuotactile frames "
                    f"in window at {start:.3f}s")
            sel = vt_idx[_uniform_indices(vt_idx.size, WINDOW_T)]
            vt = np.stack([vt_samples[i].payload for i in sel]).astype("u1")

            au_idx = np.nonzero((au_times >= start) & (au_times < stop))[0]
            if au_idx.size < SpectrogramSpec().n_fft:
                raise errors.InsufficientData(
                    f"finger {finger_id}: audio window too short at {start:.3f}s")
            audio = audio_window_tiles(
                au_values[au_idx], streams[ModalityKind.SURFACE_AUDIO].rate_hz)

            q = np.linspace(start, stop, WINDOW_T, endpoint=False)
            inertial = _interp_columns(in_times, in_values, q).astype("<f4")
            pressure = _interp_columns(pr_times, pr_filtered, q).astype("<f4")

            if callable(labels):
                action, material = labels(start)
            elif labels:
                action, material = labels["action"], labels["material"]
            else:
                action, material = "tap", "wood"

            windows.append(WindowSample(
                visuotactile=vt, inertial=inertial, pressure=pressure, audio=audio,
                action_label=action, material_label=material, finger_id=finger_id,
                window_start_ns=int(round(start * 1e9)),
            ))
            start += stride_s
    return windows
