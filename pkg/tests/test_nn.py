import numpy as np
import pytest

from touchlab import errors
from touchlab.nn import (
    CONV,
    DSCONV,
    MSE,
    ConvCostSpec,
    ConvLayer,
    DeviceProfile,
    GradCheckResult,
    MlpModel,
    MlpSpec,
    TrainConfig,
    accuracy,
    conv_cost,
    grad_check,
    mlp_macs,
    train,
)


class TestForward:
    def test_identity_linear(self):
        spec = MlpSpec((2, 2), head="linear")
        model = MlpModel(spec, seed=0)
        model.weights[0] = np.eye(2)
        model.biases[0] = np.zeros(2)
        out = model.forward(np.array([3.0, 4.0]))
        assert np.allclose(out, [3.0, 4.0])

    def test_softmax_symmetry(self):
        spec = MlpSpec((3, 3), head="softmax")
        model = MlpModel(spec, seed=0)
        model.weights[0] = np.zeros((3, 3))
        out = model.forward(np.array([1.0, -2.0, 0.5]))
        assert np.allclose(out, [1 / 3, 1 / 3, 1 / 3])

    def test_matches_naive_matmul_oracle(self):
        spec = MlpSpec((4, 5, 3), activation="tanh", head="linear")
        model = MlpModel(spec, seed=11)
        rng = np.random.default_rng(1)
        x = rng.normal(size=4)
        # Independent hand-rolled forward pass.
        h = np.tanh(np.array([
            sum(x[i] * model.weights[0][i, j] for i in range(4))
            + model.biases[0][j] for j in range(5)
        ]))
        y = np.array([
            sum(h[i] * model.weights[1][i, j] for i in range(5))
            + model.biases[1][j] for j in range(3)
        ])
        assert np.allclose(model.forward(x), y, atol=1e-9)

    def test_softmax_normalization(self):
        rng = np.random.default_rng(2)
        model = MlpModel(MlpSpec((6, 10, 4)), seed=3)
        for _ in range(20):
            out = model.forward(rng.normal(size=6) * 100)
            assert abs(out.sum() - 1.0) <= 1e-9
            assert np.all(out >= 0)

    def test_shape_mismatch(self):
        model = MlpModel(MlpSpec((4, 2)))
        with pytest.raises(errors.ShapeMismatch):
            model.forward(np.zeros(5))


class TestTrain:
    def xor_data(self):
        x = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]])
        y = np.array([0, 1, 1, 0])
        return x, y

    def test_xor_converges(self):
        x, y = self.xor_data()
        spec = MlpSpec((2, 8, 2))
        cfg = TrainConfig(lr=0.05, max_epochs=2000, seed=0)
        res = train((x, y), spec, cfg)
        assert accuracy(res.model, x, y) == 1.0

    def test_linearly_separable_blobs(self):
        rng = np.random.default_rng(4)
        a = rng.normal(loc=[-2.0, 0.0], scale=0.5, size=(60, 2))
        b = rng.normal(loc=[2.0, 0.0], scale=0.5, size=(60, 2))
        x = np.vstack([a, b])
        y = np.array([0] * 60 + [1] * 60)
        res = train((x, y), MlpSpec((2, 8, 2)), TrainConfig(lr=0.05, max_epochs=300))
        # Centroid-classifier oracle: the blobs are separable by a midpoint
        # rule, so the trained model must reach at least that accuracy band.
        centroid_acc = np.mean((x[:, 0] > 0).astype(int) == y)
        assert accuracy(res.model, x, y) >= 0.99
        assert centroid_acc >= 0.99

    def test_zero_lr_freezes_weights(self):
        x, y = self.xor_data()
        spec = MlpSpec((2, 4, 2))
        cfg = TrainConfig(lr=0.0, max_epochs=50, seed=5)
        w0 = MlpModel(spec, seed=cfg.seed).weights[0].copy()
        res = train((x, y), spec, cfg)
        assert np.array_equal(res.model.weights[0], w0)

    def test_empty_dataset(self):
        with pytest.raises(errors.EmptyDataset):
            train((np.zeros((0, 2)), np.zeros(0)), MlpSpec((2, 2)))

    def test_label_out_of_range(self):
        x = np.zeros((4, 2))
        y = np.array([0, 1, 2, 3])
        with pytest.raises(errors.LabelOutOfRange):
            train((x, y), MlpSpec((2, 4, 2)))

    def test_bitwise_determinism(self):
        x, y = self.xor_data()
        cfg = TrainConfig(lr=0.03, max_epochs=100, seed=9, batch_size=2)
        r1 = train((x, y), MlpSpec((2, 6, 2)), cfg)
        r2 = train((x, y), MlpSpec((2, 6, 2)), cfg)
        for w1, w2 in zip(r1.model.parameters(), r2.model.parameters()):
            assert np.array_equal(w1, w2)
        assert r1.losses == r2.losses

    def test_loss_decreases_on_average(self):
        x, y = self.xor_data()
        res = train((x, y), MlpSpec((2, 8, 2)), TrainConfig(lr=0.05, max_epochs=400))
        first = np.mean(res.losses[:40])
        last = np.mean(res.losses[-40:])
        assert last < first


class TestGradCheck:
    def test_small_random_models(self):
        for seed in range(12):
            rng = np.random.default_rng(seed)
            n_hidden = int(rng.integers(1, 5))
            sizes = (3,) + tuple(int(rng.integers(2, 7)) for _ in range(n_hidden)) + (3,)
            act = "relu" if seed % 2 == 0 else "tanh"
            model = MlpModel(MlpSpec(sizes, activation=act), seed=seed)
            x = rng.normal(size=3)
            res = grad_check(model, x, int(rng.integers(0, 3)))
            assert isinstance(res, GradCheckResult)
            assert res.max_rel_error < 1e-4
            assert res.n_checked > 0

    def test_linear_mse_nearly_exact(self):
        model = MlpModel(MlpSpec((3, 2), head="linear"), seed=0)
        res = grad_check(model, np.array([0.3, -1.2, 0.7]), np.array([1.0, -1.0]))
        assert res.max_rel_error < 1e-7

    def test_relu_kink_excluded_not_failed(self):
        # Force a pre-activation exactly onto the kink: weights such that
        # z = 0 for the given input.
        model = MlpModel(MlpSpec((2, 2, 2)), seed=0)
        model.weights[0] = np.array([[1.0, 0.5], [-1.0, 0.5]])
        model.biases[0] = np.array([0.0, -1.0])
        x = np.array([1.0, 1.0])  # z = [0, 0] at both hidden units
        res = grad_check(model, x, 0)
        assert len(res.excluded) > 0
        assert res.max_rel_error < 1e-4


class TestConvCost:
    def test_single_1x1_conv(self):
        # Closed-form layer arithmetic oracle: H * W * K^2 * C_in * C_out.
        spec = ConvCostSpec(layers=(ConvLayer(CONV, 1, 8, 8),), input_size=64)
        assert conv_cost(spec)["macs"] == 64 * 64 * 8 * 8 == 262_144

    def test_quadratic_spatial_scaling(self):
        layers = (ConvLayer(CONV, 3, 3, 16), ConvLayer(DSCONV, 3, 16, 32))
        small = conv_cost(ConvCostSpec(layers=layers, input_size=64))["macs"]
        big = conv_cost(ConvCostSpec(layers=layers, input_size=96))["macs"]
        assert big / small == pytest.approx((96 / 64) ** 2)

    def test_empty_stack(self):
        assert conv_cost(ConvCostSpec(layers=(), input_size=64))["macs"] == 0

    def test_depthwise_separable_arithmetic(self):
        spec = ConvCostSpec(layers=(ConvLayer(DSCONV, 3, 8, 16),), input_size=32)
        want = 32 * 32 * 9 * 8 + 32 * 32 * 8 * 16
        assert conv_cost(spec)["macs"] == want

    def test_latency_estimate(self):
        spec = ConvCostSpec(layers=(ConvLayer(CONV, 1, 8, 8),), input_size=64)
        profile = DeviceProfile("dev", macs_per_us=1000.0, per_layer_overhead_us=5.0)
        got = conv_cost(spec, profile)["est_latency_us"]
        assert got == pytest.approx(262_144 / 1000.0 + 5.0)

    def test_mlp_macs(self):
        assert mlp_macs((64, 64, 64)) == 2 * 64 * 64


class TestWeightSerialization:
    def test_round_trip(self, tmp_path):
        from touchlab.nn import load_model, save_model

        model = MlpModel(MlpSpec((5, 7, 3), activation="tanh", head="linear"),
                         seed=9)
        path = tmp_path / "model.tlnn"
        n = save_model(model, path)
        assert n == path.stat().st_size
        back = load_model(path)
        assert back.spec == model.spec
        for a, b in zip(model.parameters(), back.parameters()):
            assert np.array_equal(a, b)
        x = np.random.default_rng(0).normal(size=5)
        assert np.array_equal(model.forward(x), back.forward(x))

    def test_bad_magic(self, tmp_path):
        from touchlab import errors
        from touchlab.nn import load_model

        path = tmp_path / "junk.tlnn"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(errors.BadMagic):
            load_model(path)

    def test_version_check(self, tmp_path):
        from touchlab import errors
        from touchlab.nn import load_model, save_model

        model = MlpModel(MlpSpec((2, 2)), seed=0)
        path = tmp_path / "model.tlnn"
        save_model(model, path)
        data = bytearray(path.read_bytes())
        data[4:6] = (9).to_bytes(2, "little")
        path.write_bytes(bytes(data))
        with pytest.raises(errors.VersionMismatch):
            load_model(path)
