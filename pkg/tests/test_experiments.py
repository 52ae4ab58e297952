import numpy as np
import pytest

from touchlab import errors
from touchlab.core import ModalityKind
from touchlab.experiments import (
    FINGER_DEPENDENT,
    FINGER_INDEPENDENT,
    MultiHeadClassifier,
    analyze_liquid,
    classify_fill,
    encode_window,
    find_tap_episodes,
    fusion_experiment,
    gas_experiment,
    iter_fusion_windows,
    make_gas_dataset,
)
from touchlab.synth import Event, ObjectSpec, ScenarioScript, run_scenario

FAST_RATES = {ModalityKind.VISUOTACTILE: 30.0,
              ModalityKind.SURFACE_AUDIO: 16_000.0}


class TestGasExperiment:
    def test_dataset_shapes(self):
        data = make_gas_dataset(n_per_material=5, duration_s=30.0, seed=0)
        assert len(data.series) == 30
        assert all(s.shape == (30, 4) for s in data.series)
        assert len(data.label_names) == 6

    def test_full_integration_accuracy(self):
        data = make_gas_dataset(n_per_material=40, duration_s=90.0, seed=0)
        res = gas_experiment(data, 90.0, seed=0)
        assert res.accuracy >= 0.90

    def test_short_integration_between_chance_and_full(self):
        data = make_gas_dataset(n_per_material=40, duration_s=90.0, seed=0)
        full = gas_experiment(data, 90.0, seed=0).accuracy
        short = gas_experiment(data, 6.0, seed=0).accuracy
        assert 1.0 / 6.0 < short < full

    def test_single_class_trivial(self):
        data = make_gas_dataset(n_per_material=5, duration_s=10.0, seed=0,
                                materials=("cheese",))
        assert gas_experiment(data, 10.0).accuracy == 1.0

    def test_integration_beyond_duration_rejected(self):
        data = make_gas_dataset(n_per_material=4, duration_s=10.0, seed=0)
        with pytest.raises(ValueError):
            gas_experiment(data, 20.0)

    def test_confusion_matrix_sums(self):
        data = make_gas_dataset(n_per_material=10, duration_s=30.0, seed=1)
        res = gas_experiment(data, 30.0, seed=1)
        assert res.confusion.sum() == res.n_test

    def test_confusion_csv(self):
        from touchlab.experiments import confusion_csv
        text = confusion_csv(np.array([[3, 1], [0, 4]]), ("a", "b"))
        lines = text.strip().split("\n")
        assert lines[0] == "truth\\predicted,a,b"
        assert lines[1] == "a,3,1"
        assert lines[2] == "b,0,4"


@pytest.fixture(scope="module")
def windows():
    return list(iter_fusion_windows(trials_per_class=1, seed=0,
                                    duration_s=2.0, stride_s=0.665))


class TestFusionExperiment:

    def test_runs_both_modes(self, windows):
        dep = fusion_experiment(windows, mode=FINGER_DEPENDENT, max_epochs=40)
        ind = fusion_experiment(windows, mode=FINGER_INDEPENDENT, max_epochs=40)
        assert 0.0 <= dep.action_accuracy <= 1.0
        assert ind.n_test > dep.n_test

    def test_modality_subset(self, windows):
        res = fusion_experiment(windows, modalities=("pressure",), max_epochs=40)
        assert res.modalities == ("pressure",)

    def test_unknown_modality(self, windows):
        with pytest.raises(errors.MissingModality):
            fusion_experiment(windows, modalities=("sonar",))

    def test_empty_windows(self):
        with pytest.raises(errors.EmptyDataset):
            fusion_experiment([])

    def test_encoders_shapes(self, windows):
        enc = encode_window(windows[0][1])
        assert enc["visuotactile"].shape == (48,)
        assert enc["audio"].shape == (72,)
        assert enc["inertial"].shape == (18,)
        assert enc["pressure"].shape == (20,)

    def test_confusion_matrices(self, windows):
        res = fusion_experiment(windows, max_epochs=40)
        assert res.confusion_action.sum() == res.n_test
        assert res.confusion_material.sum() == res.n_test


class TestMultiHeadGradients:
    def test_against_finite_differences(self):
        rng = np.random.default_rng(0)
        model = MultiHeadClassifier(in_dim=5, hidden=(6, 4), seed=1)
        x = rng.normal(size=(3, 5))
        ya = np.array([0, 1, 2])
        ym = np.array([2, 0, 1])
        loss, grads = model.loss_grads(x, ya, ym)
        params = model.params()
        h = 1e-6
        for p, g in zip(params, grads):
            flat = p.reshape(-1)
            gflat = np.asarray(g).reshape(-1)
            for i in range(0, flat.size, max(flat.size // 5, 1)):
                orig = flat[i]
                flat[i] = orig + h
                hi, _ = model.loss_grads(x, ya, ym)
                flat[i] = orig - h
                lo, _ = model.loss_grads(x, ya, ym)
                flat[i] = orig
                num = (hi - lo) / (2 * h)
                assert num == pytest.approx(gflat[i], rel=1e-3, abs=1e-6)


def make_bottle_log(fill, seed=0, finger=0, taps=(0.4, 1.0, 1.6)):
    obj = ObjectSpec("liquid-coffee", fill_fraction=fill)
    events = [Event(t, t + 0.05, "tap", obj, (finger,)) for t in taps]
    script = ScenarioScript(seed=seed, duration_s=2.2, events=events,
                            fingers=(finger,),
                            rates={ModalityKind.VISUOTACTILE: 30.0,
                                   ModalityKind.SURFACE_AUDIO: 48_000.0})
    return run_scenario(script)


class TestLiquidLevel:
    def test_three_fills_classified(self):
        for fill, name in ((0.0, "empty"), (0.5, "half"), (1.0, "full")):
            log = make_bottle_log(fill, seed=3)
            taps = analyze_liquid(log)
            assert len(taps) == 3
            assert all(t.predicted_fill == name for t in taps)

    def test_full_peak_below_empty_peak(self):
        f_empty = np.mean([t.peak_hz for t in analyze_liquid(make_bottle_log(0.0))])
        f_full = np.mean([t.peak_hz for t in analyze_liquid(make_bottle_log(1.0))])
        assert f_full < f_empty

    def test_no_taps_found(self):
        script = ScenarioScript(seed=0, duration_s=1.0, events=[], fingers=(0,),
                                rates=FAST_RATES)
        with pytest.raises(errors.NoTapsFound):
            analyze_liquid(run_scenario(script))

    def test_position_invariance_and_tau_contrast(self):
        log_near = make_bottle_log(0.5, seed=5, finger=0)
        log_far = make_bottle_log(0.5, seed=5, finger=3)
        taps_near = analyze_liquid(log_near, finger_id=0)
        taps_far = analyze_liquid(log_far, finger_id=3)
        f_near = np.mean([t.peak_hz for t in taps_near])
        f_far = np.mean([t.peak_hz for t in taps_far])
        assert abs(f_near - f_far) <= 4.0
        tau_near = np.mean([t.tau_s for t in taps_near])
        tau_far = np.mean([t.tau_s for t in taps_far])
        assert abs(tau_near - tau_far) / min(tau_near, tau_far) > 0.2

    def test_classify_fill_centroids(self):
        assert classify_fill(800.0) == "empty"
        assert classify_fill(680.0) == "half"
        assert classify_fill(560.0) == "full"

    def test_find_tap_episodes(self):
        rate = 48_000.0
        t = np.arange(int(2.0 * rate)) / rate
        x = 0.001 * np.sin(2 * np.pi * 50 * t)
        for t0 in (0.5, 1.3):
            sel = (t >= t0) & (t < t0 + 0.2)
            x[sel] += np.exp(-(t[sel] - t0) / 0.05) * np.sin(
                2 * np.pi * 700 * (t[sel] - t0))
        episodes = find_tap_episodes(x, rate)
        assert len(episodes) == 2
