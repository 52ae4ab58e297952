"""Deterministic multimodal scenario synthesis.

Stands in for the physical fingertip: scripted contact events (tap, slide,
stir, approach, hold) against material-specific object models produce all
six sensor streams per finger.  Every stream draws from its own generator
seeded by (scenario seed, stream id), so stream synthesis order never
affects the output and identical scripts produce byte-identical logs.

Planted structure (what the classification experiments learn):

- actions shape the inertial and envelope dynamics: taps are impulsive,
  slides sustain a low-frequency sway, stirs trace a quadrature circle;
- materials shape the audio texture band, the tap ring-down frequency and
  the visuotactile imprint depth;
- materials also assign each finger a pressure-amplitude pattern whose
  overall scale is randomized per event: a single finger sees an ambiguous
  amplitude, while the cross-finger amplitude ratios identify the material
  (only visible when fingers are combined).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.signal

from . import errors, optics
from .core import (
    DEFAULT_RATES,
    ModalityKind,
    ModalitySample,
    RecordLog,
    StreamDescriptor,
    stream_id_for,
)

TAP = "tap"
SLIDE = "slide"
STIR = "stir"
APPROACH = "approach"
HOLD = "hold"

EVENT_KINDS = (TAP, SLIDE, STIR, APPROACH, HOLD)

#: Ambient gas record: oxidation resistance (ohm), humidity (%),
#: temperature (degC), pressure (hPa).
AMBIENT_GAS = np.array([50_000.0, 40.0, 25.0, 1013.0])
AMBIENT_TEMP_C = 25.0

#: Per-sample gas sensor noise per channel.
GAS_NOISE = np.array([3800.0, 1.9, 0.62, 0.7])

#: Per-approach signature drift per channel (sample-to-sample material
#: variability).
GAS_DRIFT = np.array([1400.0, 0.6, 0.26, 0.11])

GAS_TAU_S = 30.0


@dataclass(frozen=True)
class MaterialModel:
    """Synthesis parameters of one object material."""

    texture_hz: float          # audio texture band centre
    texture_amp: float         # audio texture rms
    ring_f0_hz: float          # tap ring-down frequency
    ring_tau_s: float
    imprint_depth: float       # visuotactile indentation strength, 0..1
    pressure_pattern: tuple    # per-finger contact amplitude ratios
    gas_delta: tuple = (0.0, 0.0, 0.0, 0.0)   # offset from ambient
    temperature_c: float = AMBIENT_TEMP_C


MATERIALS = {
    "wood": MaterialModel(
        texture_hz=900.0, texture_amp=0.12, ring_f0_hz=900.0, ring_tau_s=0.03,
        imprint_depth=0.45, pressure_pattern=(1.2, 0.6, 1.0, 0.8)),
    "plastic": MaterialModel(
        texture_hz=1500.0, texture_amp=0.09, ring_f0_hz=1400.0, ring_tau_s=0.05,
        imprint_depth=0.3, pressure_pattern=(0.8, 1.2, 0.6, 1.0)),
    "silicone": MaterialModel(
        texture_hz=550.0, texture_amp=0.06, ring_f0_hz=400.0, ring_tau_s=0.015,
        imprint_depth=0.8, pressure_pattern=(1.0, 0.8, 1.2, 0.6)),
    "coffee-powder": MaterialModel(
        texture_hz=800.0, texture_amp=0.05, ring_f0_hz=300.0, ring_tau_s=0.01,
        imprint_depth=0.5, pressure_pattern=(1.0, 1.0, 1.0, 1.0),
        gas_delta=(-20_000.0, 5.0, 1.0, 0.0)),
    "liquid-coffee": MaterialModel(
        texture_hz=250.0, texture_amp=0.04, ring_f0_hz=600.0, ring_tau_s=0.08,
        imprint_depth=0.2, pressure_pattern=(1.0, 1.0, 1.0, 1.0),
        gas_delta=(-25_000.0, 18.0, 8.0, 0.0), temperature_c=55.0),
    "rubber": MaterialModel(
        texture_hz=700.0, texture_amp=0.07, ring_f0_hz=350.0, ring_tau_s=0.02,
        imprint_depth=0.6, pressure_pattern=(1.0, 1.0, 1.0, 1.0),
        gas_delta=(-8000.0, 1.0, 0.5, 0.0)),
    "cheese": MaterialModel(
        texture_hz=400.0, texture_amp=0.05, ring_f0_hz=250.0, ring_tau_s=0.012,
        imprint_depth=0.7, pressure_pattern=(1.0, 1.0, 1.0, 1.0),
        gas_delta=(-15_000.0, 8.0, 2.0, 0.0)),
    "soap": MaterialModel(
        texture_hz=550.0, texture_amp=0.04, ring_f0_hz=280.0, ring_tau_s=0.015,
        imprint_depth=0.55, pressure_pattern=(1.0, 1.0, 1.0, 1.0),
        gas_delta=(-12_000.0, 4.0, 1.5, 0.0)),
    "butter": MaterialModel(
        texture_hz=350.0, texture_amp=0.03, ring_f0_hz=220.0, ring_tau_s=0.01,
        imprint_depth=0.65, pressure_pattern=(1.0, 1.0, 1.0, 1.0),
        gas_delta=(-10_000.0, 2.0, 3.0, 0.0), temperature_c=18.0),
    "air": MaterialModel(
        texture_hz=100.0, texture_amp=0.0, ring_f0_hz=100.0, ring_tau_s=0.01,
        imprint_depth=0.0, pressure_pattern=(0.0, 0.0, 0.0, 0.0)),
}

GAS_MATERIALS = ("coffee-powder", "liquid-coffee", "rubber", "cheese",
                 "soap", "butter")


@dataclass(frozen=True)
class ObjectSpec:
    """An object under interaction; ``fill_fraction`` is only meaningful for
    containers."""

    material: str
    fill_fraction: float | None = None
    temperature_c: float | None = None
    gas_signature: tuple | None = None

    def __post_init__(self):
        if self.material not in MATERIALS:
            raise ValueError(f"unknown material {self.material!r}")
        if self.fill_fraction is not None and not (0.0 <= self.fill_fraction <= 1.0):
            raise ValueError("fill_fraction must be in [0, 1]")

    @property
    def is_container(self) -> bool:
        return self.fill_fraction is not None

    @property
    def model(self) -> MaterialModel:
        return MATERIALS[self.material]

    def gas_target(self) -> np.ndarray:
        if self.gas_signature is not None:
            return np.asarray(self.gas_signature, dtype=np.float64)
        return AMBIENT_GAS + np.asarray(self.model.gas_delta)

    def temperature(self) -> float:
        return self.model.temperature_c if self.temperature_c is None \
            else self.temperature_c


@dataclass(frozen=True)
class RingdownParams:
    """Container tap acoustics: fill shifts the resonance down, contact
    position stretches the decay."""

    f0_hz: float = 800.0
    k_fill: float = 0.3
    tau0_s: float = 0.08

    def __post_init__(self):
        if self.f0_hz <= 0 or self.tau0_s <= 0:
            raise ValueError("f0_hz and tau0_s must be positive")

    def frequency(self, fill_fraction: float) -> float:
        return self.f0_hz * (1.0 - self.k_fill * fill_fraction)

    def tau_s(self, position: float) -> float:
        return self.tau0_s * (0.6 + 0.8 * float(np.clip(position, 0.0, 1.0)))


DEFAULT_RINGDOWN = RingdownParams()


@dataclass(frozen=True)
class Event:
    t_start: float
    t_end: float
    kind: str
    obj: ObjectSpec
    finger_ids: tuple = (0, 1, 2, 3)

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")
        if self.t_end <= self.t_start:
            raise ValueError("t_end must be after t_start")
        object.__setattr__(self, "finger_ids", tuple(self.finger_ids))


@dataclass(frozen=True)
class EventDraw:
    """Per-event randomization, shared by every finger and modality."""

    event: Event
    amp_scale: float = 1.0
    freq_scale: float = 1.0
    depth_scale: float = 1.0


DEFAULT_NOISE = {
    ModalityKind.VISUOTACTILE: 1.5,     # uint8 counts
    ModalityKind.SURFACE_AUDIO: 0.002,
    ModalityKind.SURFACE_PRESSURE: 0.01,
    ModalityKind.INERTIAL: 0.05,
    ModalityKind.HEAT: 0.05,
}


@dataclass
class ScenarioScript:
    """A scripted multisensor recording session."""

    seed: int
    duration_s: float
    events: list = field(default_factory=list)
    fingers: tuple = (0, 1, 2, 3)
    rates: dict = field(default_factory=dict)
    noise: dict = field(default_factory=dict)
    ringdown: RingdownParams = DEFAULT_RINGDOWN

    def rate(self, kind: ModalityKind) -> float:
        return float(self.rates.get(kind, DEFAULT_RATES[kind]))

    def noise_sigma(self, kind: ModalityKind) -> float:
        return float(self.noise.get(kind, DEFAULT_NOISE[kind]))

    def validate(self) -> None:
        by_finger: dict[int, list] = {}
        for i, ev in enumerate(self.events):
            if ev.t_start < 0 or ev.t_end > self.duration_s + 1e-9:
                raise ValueError(f"event {i} outside scenario duration")
            for f in ev.finger_ids:
                by_finger.setdefault(f, []).append((ev.t_start, ev.t_end, i))
        for f, spans in by_finger.items():
            spans.sort()
            for (s1, e1, i1), (s2, e2, i2) in zip(spans, spans[1:]):
                if s2 < e1 - 1e-9:
                    raise errors.OverlappingEvents(
                        f"events {i1} and {i2} overlap on finger {f}")


def _event_rng(seed: int, tag: int, event_idx: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, tag, event_idx)))


def _stream_rng(seed: int, stream_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, 0x57EA, stream_id)))


# --- primitive generators ------------------------------------------------------------


def gen_ringdown(obj: ObjectSpec, contact_position: float, duration_s: float,
                 rate_hz: float = 48_000.0, amplitude: float = 1.0,
                 params: RingdownParams = DEFAULT_RINGDOWN) -> np.ndarray:
    """Damped sinusoid of a container tap.

    Peak frequency depends only on the fill fraction, f = f0 (1 - k * fill);
    the decay constant depends only on the contact position.
    """
    if not obj.is_container:
        raise errors.NotAContainer(
            f"{obj.material!r} has no fill_fraction; ring-down undefined")
    f = params.frequency(obj.fill_fraction)
    tau = params.tau_s(contact_position)
    t = np.arange(int(round(duration_s * rate_hz))) / rate_hz
    return amplitude * np.exp(-t / tau) * np.sin(2.0 * np.pi * f * t)


def _material_ring(model: MaterialModel, duration_s: float, rate_hz: float,
                   amplitude: float, freq_scale: float = 1.0) -> np.ndarray:
    t = np.arange(int(round(duration_s * rate_hz))) / rate_hz
    return amplitude * np.exp(-t / model.ring_tau_s) \
        * np.sin(2.0 * np.pi * model.ring_f0_hz * freq_scale * t)


def gen_gas_approach(obj: ObjectSpec, approach_duration_s: float,
                     rate_hz: float = 1.0, rng=None,
                     ambient: np.ndarray = AMBIENT_GAS,
                     tau_s: float = GAS_TAU_S,
                     drift_scale: float = 1.0) -> np.ndarray:
    """Gas record series (n, 4) of one approach-to-near-contact.

    First-order relaxation from the ambient baseline toward the material
    signature, with per-approach signature drift and per-sample sensor
    noise when a generator is supplied.
    """
    if approach_duration_s <= 0:
        raise ValueError("approach duration must be positive")
    n = int(round(approach_duration_s * rate_hz))
    t = np.arange(n) / rate_hz
    sig = obj.gas_target().astype(np.float64)
    if rng is not None:
        sig = sig + rng.normal(0.0, GAS_DRIFT * drift_scale)
    series = sig[None, :] + (ambient - sig)[None, :] * np.exp(-t / tau_s)[:, None]
    if rng is not None:
        series = series + rng.normal(0.0, GAS_NOISE, size=series.shape)
    return series


@dataclass(frozen=True)
class Imprint:
    """A contact imprint in fisheye image coordinates (u, v in [-1, 1])."""

    u: float
    v: float
    radius_px: float = 7.0
    depth: float = 0.5

    def __post_init__(self):
        if self.radius_px <= 0 or self.depth < 0:
            raise ValueError("radius must be positive, depth non-negative")
        if math.hypot(self.u, self.v) > 0.95:
            raise errors.ContactOutsideSurface(
                f"imprint at ({self.u:.2f}, {self.v:.2f}) outside the fingertip")


#: Camera blur applied to imprint footprints, in pixels.
IMAGE_PSF_PX = 1.8

_BACKGROUND_SURFACE = optics.ScatterSurface.gaussian(22.0)


@lru_cache(maxsize=4)
def _background(image_size: int, surface_label: str) -> np.ndarray:
    """Rendered illumination background, normalized to mean 0.5."""
    surface = optics.sweep_surface(
        float(surface_label[:-3]) if surface_label.endswith("deg") else surface_label)
    img = optics.render(surface, photons=200_000, seed=0xB6,
                        image_size=image_size).values
    mean = img[img > 0].mean() if np.any(img > 0) else 1.0
    return np.clip(img / (2.0 * mean), 0.0, 1.0)


def gen_visuotactile(contacts, surface: optics.ScatterSurface = _BACKGROUND_SURFACE,
                     rng=None, image_size: int = 120,
                     noise_sigma: float = 0.0) -> optics.TaxelImage:
    """Background illumination field plus per-contact indentation imprints.

    The background is a cached render of the given surface; imprints darken
    a PSF-blurred disc around each contact (full per-frame path tracing is
    far beyond desk-scale for 240 fps streams).  Output values are in
    [0, 1], shape (image_size, image_size, 3).
    """
    bg = _background(image_size, surface.label()).copy()
    if contacts:
        axis = (np.arange(image_size) + 0.5) / image_size * 2.0 - 1.0
        u, v = np.meshgrid(axis, axis, indexing="xy")
        px = 2.0 / image_size
        attenuation = np.zeros((image_size, image_size))
        for c in contacts:
            r2 = (u - c.u) ** 2 + (v - c.v) ** 2
            sigma = (c.radius_px + IMAGE_PSF_PX) * px
            attenuation += c.depth * np.exp(-0.5 * r2 / sigma ** 2)
        bg *= np.clip(1.0 - 0.45 * attenuation, 0.0, 1.0)[:, :, None]
    if rng is not None and noise_sigma > 0:
        bg = np.clip(bg + rng.normal(0.0, noise_sigma, size=bg.shape), 0.0, 1.0)
    return optics.TaxelImage(values=bg)


# --- event kinematics ----------------------------------------------------------------


def _imprint_path(kind: str, t_rel: np.ndarray, duration: float,
                  depth: float, finger_id: int):
    """Imprint centre and activity envelope over an event, per frame."""
    base_u = -0.3 + 0.2 * finger_id
    if kind == TAP:
        u = np.full_like(t_rel, base_u)
        v = np.full_like(t_rel, 0.1)
        active = (t_rel >= 0.0) & (t_rel <= 0.04)
        env = np.where(active, np.sin(np.pi * np.clip(t_rel / 0.04, 0, 1)), 0.0)
    elif kind == SLIDE:
        u = base_u + 0.5 * (t_rel / max(duration, 1e-9)) - 0.25
        v = np.full_like(t_rel, -0.1)
        env = np.ones_like(t_rel)
    elif kind == STIR:
        u = base_u + 0.3 * np.cos(2.0 * np.pi * 2.0 * t_rel)
        v = 0.3 * np.sin(2.0 * np.pi * 2.0 * t_rel)
        env = np.ones_like(t_rel)
    elif kind == HOLD:
        u = np.full_like(t_rel, base_u)
        v = np.full_like(t_rel, 0.0)
        env = np.ones_like(t_rel)
    else:  # approach: no contact
        u = np.full_like(t_rel, base_u)
        v = np.full_like(t_rel, 0.0)
        env = np.zeros_like(t_rel)
    return np.clip(u, -0.9, 0.9), np.clip(v, -0.9, 0.9), env * depth


def _bandpass_noise(n: int, rate_hz: float, center_hz: float, rng) -> np.ndarray:
    """Unit-rms noise band around center_hz (clipped to the Nyquist range)."""
    nyq = rate_hz / 2.0
    lo = min(max(center_hz * 0.7, 1.0), nyq * 0.8)
    hi = min(center_hz * 1.3, nyq * 0.95)
    if hi <= lo:
        hi = min(lo * 1.2, nyq * 0.98)
    sos = scipy.signal.butter(2, [lo, hi], btype="bandpass", fs=rate_hz,
                              output="sos")
    x = scipy.signal.sosfilt(sos, rng.standard_normal(n))
    rms = np.sqrt(np.mean(x ** 2))
    return x / rms if rms > 0 else x


# --- scenario synthesis ----------------------------------------------------------------


def _synth_pressure(script, finger, events_scales, rng):
    rate = script.rate(ModalityKind.SURFACE_PRESSURE)
    n = int(round(script.duration_s * rate))
    t = np.arange(n) / rate
    out = rng.normal(0.0, script.noise_sigma(ModalityKind.SURFACE_PRESSURE),
                     size=(n, 4))
    chan_gain = np.array([1.0, 0.8, 0.65, 0.5])
    for ed in events_scales:
        ev = ed.event
        if finger not in ev.finger_ids or ev.kind == APPROACH:
            continue
        amp = MATERIALS[ev.obj.material].pressure_pattern[finger] \
            * ed.amp_scale * rng.uniform(0.80, 1.20)
        sel = (t >= ev.t_start) & (t < ev.t_end)
        tr = t[sel] - ev.t_start
        if ev.kind == TAP:
            pulse = np.where(tr < 0.01, np.sin(np.pi * tr / 0.01), 0.0) * amp
            out[sel] += pulse[:, None] * chan_gain[None, :]
            out[sel] += 0.3 * amp  # brief grasp increase during the tap
        elif ev.kind == SLIDE:
            texture = _bandpass_noise(tr.size, rate, 30.0, rng) * 0.3 * amp
            sway = 0.2 * amp * np.sin(2.0 * np.pi * 3.0 * tr)
            out[sel] += (texture + sway)[:, None] * chan_gain[None, :]
            out[sel] += 0.5 * amp
        elif ev.kind == STIR:
            osc = 0.35 * amp * np.sin(2.0 * np.pi * 2.0 * tr)
            texture = _bandpass_noise(tr.size, rate, 25.0, rng) * 0.15 * amp
            out[sel] += (osc + texture)[:, None] * chan_gain[None, :]
            out[sel] += 0.5 * amp
        elif ev.kind == HOLD:
            out[sel] += 0.4 * amp
    return t, out.astype("<f4")


def _synth_inertial(script, finger, events_scales, rng):
    rate = script.rate(ModalityKind.INERTIAL)
    n = int(round(script.duration_s * rate))
    t = np.arange(n) / rate
    out = rng.normal(0.0, script.noise_sigma(ModalityKind.INERTIAL), size=(n, 3))
    for ed in events_scales:
        ev = ed.event
        if finger not in ev.finger_ids or ev.kind == APPROACH:
            continue
        sel = (t >= ev.t_start) & (t < ev.t_end)
        tr = t[sel] - ev.t_start
        if ev.kind == TAP:
            out[sel, 2] += 2.0 * np.exp(-tr / 0.03)
        elif ev.kind == SLIDE:
            out[sel, 0] += 0.8 * np.sin(2.0 * np.pi * 3.0 * tr)
            out[sel, 1] += 0.2 * _bandpass_noise(tr.size, rate, 12.0, rng)
        elif ev.kind == STIR:
            out[sel, 0] += 0.9 * np.sin(2.0 * np.pi * 2.0 * tr)
            out[sel, 1] += 0.9 * np.cos(2.0 * np.pi * 2.0 * tr)
    return t, out.astype("<f4")


def _synth_audio(script, finger, events_scales, rng):
    rate = script.rate(ModalityKind.SURFACE_AUDIO)
    n = int(round(script.duration_s * rate))
    t = np.arange(n) / rate
    out = rng.normal(0.0, script.noise_sigma(ModalityKind.SURFACE_AUDIO),
                     size=(n, 4))
    chan_gain = np.array([1.0, 0.85, 0.7, 0.6])
    for ed in events_scales:
        ev = ed.event
        if finger not in ev.finger_ids or ev.kind == APPROACH:
            continue
        model = MATERIALS[ev.obj.material]
        i0 = int(round(ev.t_start * rate))
        i1 = min(int(round(ev.t_end * rate)), n)
        if i1 <= i0:
            continue
        seg = slice(i0, i1)
        tr = t[seg] - ev.t_start
        if ev.kind == TAP:
            position = 0.2 + 0.2 * finger
            if ev.obj.is_container:
                # Container resonance is intrinsic to the object: no jitter,
                # the fill level alone sets the peak frequency.
                ring = gen_ringdown(ev.obj, position, (i1 - i0) / rate, rate,
                                    amplitude=0.5, params=script.ringdown)
            else:
                ring = _material_ring(model, (i1 - i0) / rate, rate, 0.3,
                                      freq_scale=ed.freq_scale)
            out[seg] += ring[:i1 - i0, None] * chan_gain[None, :]
        elif ev.kind in (SLIDE, STIR):
            texture = _bandpass_noise(i1 - i0, rate,
                                      model.texture_hz * ed.freq_scale, rng)
            env = np.ones_like(tr) if ev.kind == SLIDE \
                else 0.55 + 0.45 * np.sin(2.0 * np.pi * 2.0 * tr)
            out[seg] += (model.texture_amp * texture * env)[:, None] \
                * chan_gain[None, :]
    return t, np.clip(out * 32767.0 / 4.0, -32768, 32767).astype("<i2")


def _synth_visuotactile(script, finger, events_scales, rng):
    rate = script.rate(ModalityKind.VISUOTACTILE)
    n = int(round(script.duration_s * rate))
    t = np.arange(n) / rate
    size = 120
    bg = _background(size, _BACKGROUND_SURFACE.label())
    noise_sigma = script.noise_sigma(ModalityKind.VISUOTACTILE)

    axis = (np.arange(size) + 0.5) / size * 2.0 - 1.0
    uu, vv = np.meshgrid(axis, axis, indexing="xy")
    px = 2.0 / size
    sigma = (7.0 + IMAGE_PSF_PX) * px

    base = bg * 255.0
    active = [(ed, MATERIALS[ed.event.obj.material].imprint_depth
               * ed.depth_scale)
              for ed in events_scales
              if finger in ed.event.finger_ids and ed.event.kind != APPROACH]

    frames = np.empty((n, size, size, 3), dtype=np.uint8)
    block = 64
    for b0 in range(0, n, block):
        b1 = min(b0 + block, n)
        tb = t[b0:b1]
        att = np.ones((b1 - b0, size, size))
        for ed, depth in active:
            ev = ed.event
            if depth <= 0:
                continue
            m = (tb >= ev.t_start) & (tb < ev.t_end)
            if not np.any(m):
                continue
            tr = tb[m] - ev.t_start
            cu, cv, d = _imprint_path(ev.kind, tr, ev.t_end - ev.t_start,
                                      depth, finger)
            pos = d > 0
            if not np.any(pos):
                continue
            idx = np.nonzero(m)[0][pos]
            r2 = (uu[None, :, :] - cu[pos, None, None]) ** 2 \
                + (vv[None, :, :] - cv[pos, None, None]) ** 2
            att[idx] *= 1.0 - 0.45 * d[pos, None, None] \
                * np.exp(-0.5 * r2 / sigma ** 2)
        img = base[None, :, :, :] * att[:, :, :, None]
        noisy = img + rng.normal(0.0, noise_sigma, size=img.shape)
        frames[b0:b1] = np.clip(noisy, 0.0, 255.0).astype(np.uint8)
    return t, frames


def _synth_gas(script, finger, events_scales, rng):
    rate = script.rate(ModalityKind.GAS)
    n = max(int(round(script.duration_s * rate)), 1)
    t = np.arange(n) / rate
    out = np.tile(AMBIENT_GAS, (n, 1))
    for ed in events_scales:
        ev = ed.event
        if finger not in ev.finger_ids or ev.kind != APPROACH:
            continue
        sig = ev.obj.gas_target() + rng.normal(0.0, GAS_DRIFT)
        during = (t >= ev.t_start) & (t < ev.t_end)
        out[during] = sig[None, :] + (AMBIENT_GAS - sig)[None, :] \
            * np.exp(-(t[during] - ev.t_start) / GAS_TAU_S)[:, None]
        after = t >= ev.t_end
        if np.any(after) and np.any(during):
            level = out[during][-1]
            out[after] = AMBIENT_GAS[None, :] + (level - AMBIENT_GAS)[None, :] \
                * np.exp(-(t[after] - ev.t_end) / 10.0)[:, None]
    out += rng.normal(0.0, GAS_NOISE, size=out.shape)
    return t, out.astype("<f4")


def _synth_heat(script, finger, events_scales, rng):
    rate = script.rate(ModalityKind.HEAT)
    n = max(int(round(script.duration_s * rate)), 1)
    t = np.arange(n) / rate
    out = np.full(n, AMBIENT_TEMP_C)
    for ed in events_scales:
        ev = ed.event
        if finger not in ev.finger_ids or ev.kind == APPROACH:
            continue
        target = ev.obj.temperature()
        during = (t >= ev.t_start) & (t < ev.t_end)
        out[during] = target + (AMBIENT_TEMP_C - target) \
            * np.exp(-(t[during] - ev.t_start) / 5.0)
        after = t >= ev.t_end
        if np.any(after) and np.any(during):
            level = out[during][-1]
            out[after] = AMBIENT_TEMP_C + (level - AMBIENT_TEMP_C) \
                * np.exp(-(t[after] - ev.t_end) / 8.0)
    out = out + rng.normal(0.0, script.noise_sigma(ModalityKind.HEAT), size=n)
    return t, out.astype("<f4")[:, None]


AUDIO_BLOCK_S = 0.01


def run_scenario(script: ScenarioScript) -> RecordLog:
    """Synthesize every stream of a scenario into an in-memory RecordLog.

    One stream per (finger, modality); identical (script, seed) produce
    byte-identical logs.
    """
    script.validate()
    # Per-event randomization shared across fingers: a global amplitude
    # rescale (the material's cross-finger ratio pattern must survive it)
    # and a frequency jitter that blurs single-modality material cues.
    events_scales = []
    for i, ev in enumerate(script.events):
        ev_rng = _event_rng(script.seed, 0xE7, i)
        events_scales.append(EventDraw(
            event=ev,
            amp_scale=ev_rng.uniform(0.6, 1.4),
            freq_scale=ev_rng.uniform(0.75, 1.25),
            depth_scale=ev_rng.uniform(0.7, 1.3),
        ))

    log = RecordLog()
    samples = []
    for finger in script.fingers:
        descs = {}
        for kind in ModalityKind:
            desc = StreamDescriptor.default(
                stream_id_for(finger, kind), kind, rate_hz=script.rate(kind))
            log.add_stream(desc)
            descs[kind] = desc

        rngs = {kind: _stream_rng(script.seed, descs[kind].stream_id)
                for kind in ModalityKind}

        t_p, pressure = _synth_pressure(script, finger, events_scales,
                                        rngs[ModalityKind.SURFACE_PRESSURE])
        for i in range(t_p.size):
            samples.append(ModalitySample(
                descs[ModalityKind.SURFACE_PRESSURE].stream_id,
                int(round(t_p[i] * 1e9)), pressure[i]))

        t_i, inertial = _synth_inertial(script, finger, events_scales,
                                        rngs[ModalityKind.INERTIAL])
        for i in range(t_i.size):
            samples.append(ModalitySample(
                descs[ModalityKind.INERTIAL].stream_id,
                int(round(t_i[i] * 1e9)), inertial[i]))

        t_a, audio = _synth_audio(script, finger, events_scales,
                                  rngs[ModalityKind.SURFACE_AUDIO])
        rate_a = script.rate(ModalityKind.SURFACE_AUDIO)
        block = max(int(round(AUDIO_BLOCK_S * rate_a)), 1)
        for start in range(0, audio.shape[0], block):
            samples.append(ModalitySample(
                descs[ModalityKind.SURFACE_AUDIO].stream_id,
                int(round(t_a[start] * 1e9)), audio[start:start + block]))

        t_v, frames = _synth_visuotactile(script, finger, events_scales,
                                          rngs[ModalityKind.VISUOTACTILE])
        for i in range(t_v.size):
            samples.append(ModalitySample(
                descs[ModalityKind.VISUOTACTILE].stream_id,
                int(round(t_v[i] * 1e9)), frames[i]))

        t_g, gas = _synth_gas(script, finger, events_scales,
                              rngs[ModalityKind.GAS])
        for i in range(t_g.size):
            samples.append(ModalitySample(
                descs[ModalityKind.GAS].stream_id,
                int(round(t_g[i] * 1e9)), gas[i]))

        t_h, heat = _synth_heat(script, finger, events_scales,
                                rngs[ModalityKind.HEAT])
        for i in range(t_h.size):
            samples.append(ModalitySample(
                descs[ModalityKind.HEAT].stream_id,
                int(round(t_h[i] * 1e9)), heat[i]))

    samples.sort(key=lambda s: (s.t_ns, s.stream_id))
    for s in samples:
        log.append(s)
    return log
