"""Classification experiments on synthesized data.

Three analyses live here: the gas-sensing material classifier (per-channel
means over an integration window into a 4-64-6 network), the multimodal
action/material fusion classifier (compact per-modality feature encoders,
concatenated into a shared trunk with two output heads), and the
liquid-level analysis of container tap ring-downs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.signal

from . import errors, nn, synth
from .core import ACTIONS, MATERIALS as CLS_MATERIALS, ModalityKind, RecordLog
from .dsp import build_windows, decay_time, peak_frequency
from .synth import (
    GAS_MATERIALS,
    Event,
    ObjectSpec,
    RingdownParams,
    ScenarioScript,
    gen_gas_approach,
)

FINGER_INDEPENDENT = "finger_independent"
FINGER_DEPENDENT = "finger_dependent"

MODALITY_NAMES = ("visuotactile", "audio", "inertial", "pressure")


# --- gas sensing -----------------------------------------------------------------


@dataclass
class GasDataset:
    series: list               # list of (n, 4) arrays at 1 Hz
    labels: np.ndarray
    label_names: tuple
    rate_hz: float = 1.0


def make_gas_dataset(n_per_material: int = 60, duration_s: float = 90.0,
                     seed: int = 0, materials=GAS_MATERIALS) -> GasDataset:
    """Synthesize repeated approach runs for each material."""
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x6A5)))
    series, labels = [], []
    for label, material in enumerate(materials):
        obj = ObjectSpec(material)
        for _ in range(n_per_material):
            series.append(gen_gas_approach(obj, duration_s, rng=rng))
            labels.append(label)
    return GasDataset(series=series, labels=np.array(labels),
                      label_names=tuple(materials))


@dataclass
class GasResult:
    accuracy: float
    integration_time_s: float
    n_train: int
    n_test: int
    confusion: np.ndarray


def _split(n: int, test_frac: float, labels: np.ndarray, rng):
    """Stratified 70/30 split; strata with a single sample stay in train."""
    train_idx, test_idx = [], []
    for label in np.unique(labels):
        idx = np.nonzero(labels == label)[0]
        idx = rng.permutation(idx)
        n_test = max(int(round(test_frac * idx.size)), 1) if idx.size >= 2 else 0
        test_idx.extend(idx[:n_test])
        train_idx.extend(idx[n_test:])
    return (np.array(sorted(train_idx), dtype=np.int64),
            np.array(sorted(test_idx), dtype=np.int64))


def _zscore(train: np.ndarray, test: np.ndarray):
    mu = train.mean(axis=0)
    sd = train.std(axis=0)
    sd[sd < 1e-12] = 1.0
    return (train - mu) / sd, (test - mu) / sd


def gas_experiment(dataset: GasDataset, integration_time_s: float,
                   seed: int = 0, hidden: int = 64, lr: float = 0.1,
                   max_epochs: int = 300) -> GasResult:
    """Classify materials from per-channel means over the first
    ``integration_time_s`` seconds of each approach."""
    n_classes = len(dataset.label_names)
    if n_classes < 1:
        raise errors.EmptyDataset("no materials")
    max_dur = min(s.shape[0] for s in dataset.series) / dataset.rate_hz
    if integration_time_s > max_dur + 1e-9:
        raise ValueError(
            f"integration time {integration_time_s}s exceeds approach "
            f"duration {max_dur}s")
    n_keep = max(int(round(integration_time_s * dataset.rate_hz)), 1)
    feats = np.stack([s[:n_keep].mean(axis=0) for s in dataset.series])

    if n_classes == 1:
        return GasResult(accuracy=1.0, integration_time_s=integration_time_s,
                         n_train=len(dataset.series), n_test=0,
                         confusion=np.array([[len(dataset.series)]]))

    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x6A5E)))
    train_idx, test_idx = _split(feats.shape[0], 0.3, dataset.labels, rng)
    x_tr, x_te = _zscore(feats[train_idx], feats[test_idx])
    y_tr, y_te = dataset.labels[train_idx], dataset.labels[test_idx]

    spec = nn.MlpSpec((4, hidden, n_classes))
    cfg = nn.TrainConfig(lr=lr, max_epochs=max_epochs, seed=seed)
    result = nn.train((x_tr, y_tr), spec, cfg)

    pred = np.argmax(result.model.forward_logits(x_te), axis=1)
    confusion = np.zeros((n_classes, n_classes), dtype=int)
    for t, p in zip(y_te, pred):
        confusion[t, p] += 1
    return GasResult(accuracy=float(np.mean(pred == y_te)),
                     integration_time_s=integration_time_s,
                     n_train=len(train_idx), n_test=len(test_idx),
                     confusion=confusion)


def gas_integration_sweep(integration_times, n_seeds: int = 10,
                          n_per_material: int = 40,
                          duration_s: float = 90.0) -> dict:
    """Mean test accuracy per integration time, averaged over seeds."""
    times = list(integration_times)
    acc = np.zeros((n_seeds, len(times)))
    for s in range(n_seeds):
        data = make_gas_dataset(n_per_material=n_per_material,
                                duration_s=duration_s, seed=s)
        for j, t in enumerate(times):
            acc[s, j] = gas_experiment(data, t, seed=s).accuracy
    return {"integration_times": times, "mean_accuracy": acc.mean(axis=0),
            "per_seed": acc}


# --- fusion feature encoders --------------------------------------------------------


def _pool2d(frames: np.ndarray, grid: int = 4) -> np.ndarray:
    """Block-mean pooling of (t, h, w) down to (t, grid, grid)."""
    t, h, w = frames.shape
    bh, bw = h // grid, w // grid
    return frames[:, :grid * bh, :grid * bw] \
        .reshape(t, grid, bh, grid, bw).mean(axis=(2, 4))


def encode_visuotactile(vt: np.ndarray) -> np.ndarray:
    gray = vt.astype(np.float64).mean(axis=3) / 255.0  # (10, 120, 120)
    pooled = _pool2d(gray)                              # (10, 6, 6)
    motion = np.abs(np.diff(pooled, axis=0)).mean(axis=0)
    return np.concatenate([pooled.mean(axis=0).ravel(),
                           pooled.std(axis=0).ravel(),
                           motion.ravel()])


def encode_audio(audio: np.ndarray) -> np.ndarray:
    tiles = audio[:, :, 0].reshape(4, 10, 64)  # (channel, time, band)
    feats = []
    for c in range(4):
        bands = tiles[c].mean(axis=0)                       # (64,)
        grouped = bands.reshape(8, 8).mean(axis=1)           # (8,)
        envelope = tiles[c].mean(axis=1)                     # (10,)
        feats.append(np.concatenate([grouped, envelope]))
    return np.concatenate(feats)


def _series_moments(x: np.ndarray) -> np.ndarray:
    """Per-column mean, std, min, max, mean |diff| of a (t, c) series."""
    d = np.abs(np.diff(x, axis=0)).mean(axis=0) if x.shape[0] > 1 \
        else np.zeros(x.shape[1])
    return np.concatenate([x.mean(axis=0), x.std(axis=0), x.min(axis=0),
                           x.max(axis=0), d])


def encode_inertial(inertial: np.ndarray) -> np.ndarray:
    x = inertial.astype(np.float64)
    mom = _series_moments(x)
    centered = x - x.mean(axis=0)
    sd = x.std(axis=0)
    sd[sd < 1e-12] = 1.0
    corr = [
        float((centered[:, i] * centered[:, j]).mean() / (sd[i] * sd[j]))
        for i, j in ((0, 1), (1, 2), (0, 2))
    ]
    return np.concatenate([mom, corr])


def encode_pressure(pressure: np.ndarray) -> np.ndarray:
    return _series_moments(pressure.astype(np.float64))


ENCODERS = {
    "visuotactile": lambda w: encode_visuotactile(w.visuotactile),
    "audio": lambda w: encode_audio(w.audio),
    "inertial": lambda w: encode_inertial(w.inertial),
    "pressure": lambda w: encode_pressure(w.pressure),
}


def encode_window(window) -> dict:
    return {name: enc(window) for name, enc in ENCODERS.items()}


# --- fusion dataset --------------------------------------------------------------


def fusion_trial_script(action: str, material: str, seed: int,
                        duration_s: float = 2.66, rates=None) -> ScenarioScript:
    """One labelled trial: a single action class against one material."""
    obj = ObjectSpec(material)
    events = []
    if action == "tap":
        t = 0.15
        while t + 0.08 < duration_s - 0.05:
            events.append(Event(t, t + 0.08, synth.TAP, obj))
            t += 0.45
    else:
        kind = synth.SLIDE if action == "slide" else synth.STIR
        events.append(Event(0.05, duration_s - 0.05, kind, obj))
    default_rates = {ModalityKind.VISUOTACTILE: 60.0,
                     ModalityKind.SURFACE_AUDIO: 24_000.0}
    if rates:
        default_rates.update(rates)
    return ScenarioScript(seed=seed, duration_s=duration_s, events=events,
                          rates=default_rates)


def iter_fusion_windows(trials_per_class: int = 12, seed: int = 0,
                        duration_s: float = 2.66,
                        stride_s: float = 0.665, rates=None):
    """Yield (trial_index, WindowSample) lazily, one scenario at a time.

    Windows are produced per trial and the trial log is dropped right
    after, keeping memory flat.
    """
    trial = 0
    for ai, action in enumerate(ACTIONS):
        for mi, material in enumerate(CLS_MATERIALS):
            for k in range(trials_per_class):
                trial_seed = int(np.random.SeedSequence(
                    (seed, ai, mi, k)).generate_state(1)[0])
                script = fusion_trial_script(
                    action, material, seed=trial_seed,
                    duration_s=duration_s, rates=rates)
                log = synth.run_scenario(script)
                for w in build_windows(log, stride_s=stride_s,
                                       labels={"action": action,
                                               "material": material}):
                    yield trial, w
                trial += 1


# --- two-head fusion model ---------------------------------------------------------


class MultiHeadClassifier:
    """Shared ReLU trunk with two softmax output heads."""

    def __init__(self, in_dim: int, n_action: int = 3, n_material: int = 3,
                 hidden=(96, 48), seed: int = 0):
        rng = np.random.default_rng(seed)
        sizes = (in_dim,) + tuple(hidden)
        self.trunk_w = []
        self.trunk_b = []
        for a, b in zip(sizes[:-1], sizes[1:]):
            self.trunk_w.append(rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b)))
            self.trunk_b.append(np.zeros(b))
        top = sizes[-1]
        self.head_a = [rng.normal(0.0, np.sqrt(1.0 / top), size=(top, n_action)),
                       np.zeros(n_action)]
        self.head_m = [rng.normal(0.0, np.sqrt(1.0 / top), size=(top, n_material)),
                       np.zeros(n_material)]

    def params(self):
        return (self.trunk_w + self.trunk_b
                + [self.head_a[0], self.head_a[1], self.head_m[0], self.head_m[1]])

    def _trunk(self, x: np.ndarray, cache=None):
        h = x
        for w, b in zip(self.trunk_w, self.trunk_b):
            z = h @ w + b
            if cache is not None:
                cache.append((h, z))
            h = np.maximum(z, 0.0)
        return h

    def forward(self, x: np.ndarray):
        h = self._trunk(x)
        return h @ self.head_a[0] + self.head_a[1], \
            h @ self.head_m[0] + self.head_m[1]

    def predict(self, x: np.ndarray):
        la, lm = self.forward(x)
        return np.argmax(la, axis=1), np.argmax(lm, axis=1)

    def loss_grads(self, x: np.ndarray, y_action: np.ndarray,
                   y_material: np.ndarray):
        cache = []
        h = self._trunk(x, cache)
        la = h @ self.head_a[0] + self.head_a[1]
        lm = h @ self.head_m[0] + self.head_m[1]
        loss_a, dla = nn.cross_entropy_loss(la, y_action)
        loss_m, dlm = nn.cross_entropy_loss(lm, y_material)

        g_ha_w = h.T @ dla
        g_ha_b = dla.sum(axis=0)
        g_hm_w = h.T @ dlm
        g_hm_b = dlm.sum(axis=0)
        dh = dla @ self.head_a[0].T + dlm @ self.head_m[0].T

        gw = [None] * len(self.trunk_w)
        gb = [None] * len(self.trunk_b)
        grad = dh
        for i in range(len(self.trunk_w) - 1, -1, -1):
            h_in, z = cache[i]
            grad = grad * (z > 0.0)
            gw[i] = h_in.T @ grad
            gb[i] = grad.sum(axis=0)
            grad = grad @ self.trunk_w[i].T
        return loss_a + loss_m, gw + gb + [g_ha_w, g_ha_b, g_hm_w, g_hm_b]


def _train_multihead(x, ya, ym, seed, lr, max_epochs):
    model = MultiHeadClassifier(x.shape[1], seed=seed)
    cfg = nn.TrainConfig(lr=lr, max_epochs=1)  # Adam hyperparameters only
    opt = nn.AdamState(model.params())
    losses = []
    for _ in range(max_epochs):
        loss, grads = model.loss_grads(x, ya, ym)
        opt.step(model.params(), grads, cfg)
        losses.append(loss)
    return model, losses


@dataclass
class FusionResult:
    action_accuracy: float
    material_accuracy: float
    mode: str
    modalities: tuple
    lr: float
    n_train: int
    n_test: int
    confusion_action: np.ndarray
    confusion_material: np.ndarray

    @property
    def mean_accuracy(self) -> float:
        return 0.5 * (self.action_accuracy + self.material_accuracy)


LR_GRID = (0.003, 0.01, 0.03)


def fusion_experiment(windows, mode: str = FINGER_DEPENDENT,
                      modalities=MODALITY_NAMES, seed: int = 0,
                      max_epochs: int = 200, lr_grid=LR_GRID,
                      shuffle_labels: bool = False) -> FusionResult:
    """Action/material classification from encoded windows.

    ``windows`` is an iterable of WindowSample or (trial, WindowSample)
    pairs.  Finger-independent mode treats each finger's window as its own
    sample; finger-dependent mode concatenates the four fingers' features
    per (trial, window-start).  Selects the Adam learning rate by a grid
    search on a validation split of the training set, retrains on the full
    training set, and reports held-out accuracies plus confusion matrices.
    """
    modalities = tuple(modalities)
    if not modalities:
        raise errors.MissingModality("need at least one modality")
    unknown = set(modalities) - set(MODALITY_NAMES)
    if unknown:
        raise errors.MissingModality(f"unknown modalities {sorted(unknown)}")

    feats = {}
    labels = {}
    for item in windows:
        trial, w = item if isinstance(item, tuple) else (0, item)
        enc = encode_window(w)
        vec = np.concatenate([enc[m] for m in modalities])
        key = (trial, w.window_start_ns)
        feats.setdefault(key, {})[w.finger_id] = vec
        labels[key] = (ACTIONS.index(w.action_label),
                       CLS_MATERIALS.index(w.material_label))
    if not feats:
        raise errors.EmptyDataset("no windows supplied")

    x_rows, ya, ym = [], [], []
    if mode == FINGER_DEPENDENT:
        for key in sorted(feats):
            by_finger = feats[key]
            row = np.concatenate([by_finger[f] for f in sorted(by_finger)])
            x_rows.append(row)
            ya.append(labels[key][0])
            ym.append(labels[key][1])
    elif mode == FINGER_INDEPENDENT:
        for key in sorted(feats):
            for f in sorted(feats[key]):
                x_rows.append(feats[key][f])
                ya.append(labels[key][0])
                ym.append(labels[key][1])
    else:
        raise ValueError(f"unknown mode {mode!r}")

    x = np.stack(x_rows)
    ya = np.array(ya)
    ym = np.array(ym)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xF0510)))
    if shuffle_labels:
        perm = rng.permutation(ya.size)
        ya = ya[perm]
        perm = rng.permutation(ym.size)
        ym = ym[perm]

    strata = ya * len(CLS_MATERIALS) + ym
    train_idx, test_idx = _split(x.shape[0], 0.3, strata, rng)
    x_tr, x_te = _zscore(x[train_idx], x[test_idx])

    # Learning-rate grid search on a split of the training set.
    val_rng = np.random.default_rng(np.random.SeedSequence((seed, 0xF051)))
    tr2, val = _split(len(train_idx), 0.25, strata[train_idx], val_rng)
    best_lr, best_acc = lr_grid[0], -1.0
    if val.size and len(lr_grid) > 1:
        for lr in lr_grid:
            model, _ = _train_multihead(x_tr[tr2], ya[train_idx][tr2],
                                        ym[train_idx][tr2], seed, lr, max_epochs)
            pa, pm = model.predict(x_tr[val])
            acc = 0.5 * (np.mean(pa == ya[train_idx][val])
                         + np.mean(pm == ym[train_idx][val]))
            if acc > best_acc:
                best_lr, best_acc = lr, acc

    model, _ = _train_multihead(x_tr, ya[train_idx], ym[train_idx], seed,
                                best_lr, max_epochs)
    pa, pm = model.predict(x_te)
    conf_a = np.zeros((len(ACTIONS), len(ACTIONS)), dtype=int)
    conf_m = np.zeros((len(CLS_MATERIALS), len(CLS_MATERIALS)), dtype=int)
    for t, p in zip(ya[test_idx], pa):
        conf_a[t, p] += 1
    for t, p in zip(ym[test_idx], pm):
        conf_m[t, p] += 1
    return FusionResult(
        action_accuracy=float(np.mean(pa == ya[test_idx])),
        material_accuracy=float(np.mean(pm == ym[test_idx])),
        mode=mode, modalities=modalities, lr=best_lr,
        n_train=len(train_idx), n_test=len(test_idx),
        confusion_action=conf_a, confusion_material=conf_m)


def confusion_csv(matrix: np.ndarray, labels) -> str:
    """Render a confusion matrix (rows = truth) as CSV text."""
    labels = list(labels)
    lines = ["truth\\predicted," + ",".join(labels)]
    for name, row in zip(labels, matrix):
        lines.append(name + "," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"


# --- liquid level ---------------------------------------------------------------


@dataclass
class TapFeatures:
    t_start_s: float
    peak_hz: float
    tau_s: float
    predicted_fill: str


FILL_LEVELS = {"empty": 0.0, "half": 0.5, "full": 1.0}


def find_tap_episodes(audio: np.ndarray, rate_hz: float,
                      threshold_rel: float = 6.0, min_gap_s: float = 0.1):
    """Locate ring-down episodes from the smoothed envelope."""
    env = np.abs(scipy.signal.hilbert(audio))
    win = max(int(rate_hz * 0.002), 1)
    kernel = np.ones(win) / win
    env = np.convolve(env, kernel, mode="same")
    floor = np.median(env)
    thresh = max(threshold_rel * floor, 1e-9)
    above = env > thresh
    episodes = []
    i = 0
    n = above.size
    min_gap = int(min_gap_s * rate_hz)
    while i < n:
        if above[i]:
            j = i
            quiet = 0
            while j < n and quiet < min_gap:
                quiet = quiet + 1 if not above[j] else 0
                j += 1
            episodes.append((i, min(j, n)))
            i = j
        else:
            i += 1
    return episodes


def classify_fill(peak_hz: float,
                  params: RingdownParams = synth.DEFAULT_RINGDOWN) -> str:
    """Nearest-centroid fill classification from the ring-down frequency."""
    best, best_err = None, np.inf
    for name, fill in FILL_LEVELS.items():
        err = abs(peak_hz - params.frequency(fill))
        if err < best_err:
            best, best_err = name, err
    return best


def analyze_liquid(log: RecordLog, finger_id: int = 0,
                   params: RingdownParams = synth.DEFAULT_RINGDOWN) -> list:
    """Per-tap ring-down features and fill-level prediction from a recorded
    log's audio stream."""
    descs = log.streams_of_kind(ModalityKind.SURFACE_AUDIO)
    descs = [d for d in descs if d.stream_id // 8 == finger_id]
    if not descs:
        raise errors.MissingModality(f"no audio stream for finger {finger_id}")
    desc = descs[0]
    blocks = [s.payload[:, 0] for s in log.stream_samples(desc.stream_id)]
    if not blocks:
        raise errors.NoTapsFound("audio stream is empty")
    audio = np.concatenate(blocks).astype(np.float64)
    episodes = find_tap_episodes(audio, desc.rate_hz)
    results = []
    for i0, i1 in episodes:
        pad = int(0.005 * desc.rate_hz)
        seg = audio[max(i0 - pad, 0):i1]
        if seg.size < 256:
            continue
        try:
            f = peak_frequency(seg, desc.rate_hz)
            tau = decay_time(seg, desc.rate_hz)
        except (errors.NoOnset, errors.NonDecaying, errors.TooShort):
            continue
        results.append(TapFeatures(
            t_start_s=i0 / desc.rate_hz, peak_hz=f, tau_s=tau,
            predicted_fill=classify_fill(f, params)))
    if not results:
        raise errors.NoTapsFound("no tap ring-downs found in the log")
    return results
