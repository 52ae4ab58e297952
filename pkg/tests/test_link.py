import numpy as np
import pytest

from touchlab import errors
from touchlab.link import (
    DEFAULT_BUDGET_US,
    DEVICE_PATH,
    HOST_PATH,
    LinkProfile,
    StageTimings,
    Topology,
    Workload,
    jitter_stats,
    latency_budget_check,
    mlp_depth_sweep,
    mlp_inference_us,
    run_pipeline,
    simulate_transfer,
)


class TestSimulateTransfer:
    def test_zero_bytes_zero_jitter(self):
        link = LinkProfile(base_latency_us=42.0)
        assert simulate_transfer(link, 0, np.random.default_rng(0)) == 42.0

    def test_frame_at_full_bandwidth(self):
        # 640x480x3 frame at 148 MB/s: bytes / bandwidth arithmetic oracle.
        link = LinkProfile()
        got = simulate_transfer(link, 921_600, np.random.default_rng(0))
        assert got == pytest.approx(921_600 / 148e6 * 1e6, abs=1.0)
        assert got == pytest.approx(6227.0, abs=1.0)

    def test_jitter_mean_matches_analytic(self):
        link = LinkProfile(jitter_mu=np.log(100.0), jitter_sigma=0.3)
        rng = np.random.default_rng(1)
        draws = np.array([simulate_transfer(link, 0, rng) for _ in range(10_000)])
        assert draws.mean() == pytest.approx(link.jitter_mean_us(), rel=0.02)

    def test_monotone_in_bytes(self):
        link = LinkProfile(jitter_mu=np.log(10.0), jitter_sigma=0.2)
        for n in (0, 10, 1000, 100_000):
            a = simulate_transfer(link, n, np.random.default_rng(7))
            b = simulate_transfer(link, n + 1024, np.random.default_rng(7))
            assert b >= a


class TestRunPipeline:
    def test_host_defaults_member_means(self):
        stats = run_pipeline(HOST_PATH, Workload(), n_runs=10_000, seed=0)
        assert stats.stats["total"]["mean"] == pytest.approx(3146.0, rel=0.10)
        for name, want in (("transfer", 1600.0), ("subsample", 6.0),
                           ("action_transfer", 530.0), ("action", 1010.0)):
            assert stats.stats[name]["mean"] == pytest.approx(want, rel=0.10)

    def test_device_defaults(self):
        stats = run_pipeline(DEVICE_PATH, Workload(), n_runs=10_000, seed=0)
        assert stats.stats["total"]["mean"] == pytest.approx(683.0, rel=0.10)

    def test_no_jitter_single_run_exact(self):
        stats = run_pipeline(HOST_PATH.without_jitter(), Workload(), n_runs=1)
        assert stats.stats["total"]["mean"] == pytest.approx(3146.0, abs=1e-9)

    def test_decomposition_consistency(self):
        stats = run_pipeline(HOST_PATH, Workload(rate_hz=240.0, inference_us=300.0),
                             n_runs=5000, seed=3)
        assert stats.max_decomposition_error_us <= 1.0

    def test_acquisition_phase_model(self):
        stats = run_pipeline(DEVICE_PATH, Workload(rate_hz=240.0), n_runs=20_000,
                             seed=1)
        acq = stats.stages["acquisition"]
        assert acq.max() <= 1e6 / 240.0
        assert acq.mean() == pytest.approx(0.5e6 / 240.0, rel=0.03)

    def test_device_dominates_host_per_matched_trial(self):
        n = 5000
        host = run_pipeline(HOST_PATH, Workload(), n_runs=n, seed=11)
        dev = run_pipeline(DEVICE_PATH, Workload(), n_runs=n, seed=11)
        assert np.all(dev.totals < host.totals)
        for p in ("p50", "p95", "p99"):
            assert dev.stats["total"][p] < host.stats["total"][p]

    def test_determinism(self):
        a = run_pipeline(HOST_PATH, Workload(), n_runs=100, seed=5)
        b = run_pipeline(HOST_PATH, Workload(), n_runs=100, seed=5)
        assert np.array_equal(a.totals, b.totals)


class TestJitterStats:
    def test_constant_samples(self):
        s = jitter_stats(np.full(10, 3.0))
        assert s["std"] == 0.0

    def test_direct_arithmetic(self):
        s = jitter_stats([1.0, 2.0, 3.0, 4.0, 5.0])
        assert s["mean"] == pytest.approx(3.0)
        assert s["std"] == pytest.approx(np.sqrt(2.0))

    def test_device_jitter_below_host(self):
        host = run_pipeline(HOST_PATH, Workload(), n_runs=10_000, seed=2)
        dev = run_pipeline(DEVICE_PATH, Workload(), n_runs=10_000, seed=2)
        assert jitter_stats(dev.totals)["std"] < jitter_stats(host.totals)["std"]

    def test_too_few_samples(self):
        with pytest.raises(errors.TooFewSamples):
            jitter_stats([1.0])


class TestBudgetCheck:
    def test_device_with_inference_passes(self):
        # Arithmetic on the fixed stage means: 683 + 500 = 1183 <= 2463.
        stats = run_pipeline(DEVICE_PATH.without_jitter(),
                             Workload(inference_us=500.0), n_runs=1)
        check = latency_budget_check(stats)
        assert check.passed
        assert check.total_us == pytest.approx(1183.0)

    def test_host_fails(self):
        stats = run_pipeline(HOST_PATH.without_jitter(), Workload(), n_runs=1)
        check = latency_budget_check(stats)
        assert not check.passed
        assert check.total_us == pytest.approx(3146.0)

    def test_boundary_inclusive(self):
        assert latency_budget_check(DEFAULT_BUDGET_US).passed
        assert not latency_budget_check(DEFAULT_BUDGET_US + 1e-9).passed

    def test_stage_timings_total(self):
        t = StageTimings(100.0, 200.0, 6.0, 0.0, 40.0, 2.0)
        assert t.total_us == pytest.approx(348.0)
        assert latency_budget_check(t).passed


class TestDepthSweep:
    def test_crossover_without_acceleration(self):
        sweep = mlp_depth_sweep(depths=range(0, 16), hw_accel=False)
        assert sweep["first_exceeding_depth"] == 10

    def test_depth_60_with_acceleration(self):
        sweep = mlp_depth_sweep(depths=(0, 10, 30, 60), hw_accel=True)
        rows = {r["depth"]: r for r in sweep["rows"]}
        assert rows[60]["within_budget"]
        assert sweep["first_exceeding_depth"] is None

    def test_depth_zero_costs_nothing(self):
        assert mlp_inference_us(0) == 0.0
        sweep = mlp_depth_sweep(depths=(0,), hw_accel=False)
        assert sweep["rows"][0]["within_budget"]

    def test_monotone_in_depth(self):
        sweep = mlp_depth_sweep(depths=range(0, 30, 3), hw_accel=False)
        totals = [r["total_mean_us"] for r in sweep["rows"]]
        assert all(b > a for a, b in zip(totals, totals[1:]))


class TestTopology:
    def test_host_route_via_host(self):
        topo = Topology()
        hops = topo.route("host")
        assert [h[:2] for h in hops] == [("fingertip", "host"),
                                         ("host", "manipulator")]

    def test_device_route_direct(self):
        hops = Topology().route("device")
        assert [h[:2] for h in hops] == [("fingertip", "manipulator")]
