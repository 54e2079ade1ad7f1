import numpy as np
import pytest

from gradcheck import central_diff
from labelbridge import (DataBundle, FeatureProvider, LabelVocabulary, OptimizerState,
                         SyntheticSpec, TrainConfig, build_correlation_graph,
                         count_cooccurrence, generate_synthetic_dataset,
                         load_checkpoint, multilabel_loss, multilabel_loss_batch,
                         network_from_checkpoint, save_checkpoint, sgd_step,
                         split_dataset, synthetic_embeddings, train)
from labelbridge.errors import InputError, NumericalError, ShapeError
from labelbridge.metrics import sigmoid


class TestLoss:
    def test_zero_logits_give_ln2_for_any_labels(self):
        for labels in ([1, 0, 1], [0, 0, 0], [1, 1, 1]):
            loss, _ = multilabel_loss(np.zeros(len(labels)), np.array(labels))
            assert loss == pytest.approx(np.log(2.0), abs=1e-12)

    def test_closed_form_softplus_value(self):
        loss, _ = multilabel_loss(np.array([10.0, -10.0]), np.array([1, 0]))
        assert loss == pytest.approx(np.log1p(np.exp(-10.0)), abs=1e-18)

    def test_gradient_identity_exact(self):
        rng = np.random.Generator(np.random.PCG64(0))
        o = rng.standard_normal(6)
        l = rng.integers(0, 2, size=6)
        _, grad = multilabel_loss(o, l)
        assert np.array_equal(grad, (sigmoid(o) - l) / 6.0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.Generator(np.random.PCG64(1))
        o = rng.standard_normal(5)
        l = rng.integers(0, 2, size=5)
        _, grad = multilabel_loss(o, l)
        numeric = central_diff(lambda: multilabel_loss(o, l)[0], [o])[0]
        assert np.max(np.abs(grad - numeric)) < 1e-6

    def test_stable_at_extreme_logits(self):
        loss, grad = multilabel_loss(np.array([1e4, -1e4]), np.array([0, 1]))
        assert np.isfinite(loss) and np.all(np.isfinite(grad))
        assert loss == pytest.approx(1e4, rel=1e-12)

    def test_batch_mean_and_scaled_gradient(self):
        o = np.array([[0.0, 0.0], [10.0, -10.0]])
        l = np.array([[1, 0], [1, 0]])
        loss, grad = multilabel_loss_batch(o, l)
        expected = (np.log(2.0) + np.log1p(np.exp(-10.0))) / 2.0
        assert loss == pytest.approx(expected, abs=1e-15)
        _, row_grad = multilabel_loss(o[0], l[0])
        assert np.allclose(grad[0], row_grad / 2.0, atol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            multilabel_loss(np.zeros(3), np.zeros(4))


def single_param_state(name="p", **kw):
    defaults = dict(momentum=0.9, weight_decay=5e-5, lr_lce=0.01, lr_main=0.001,
                    decay_factor=0.1, decay_every=10)
    defaults.update(kw)
    return OptimizerState(momentum_buffers={name: np.zeros(1)},
                          groups={name: "main"}, **defaults)


class TestSgd:
    def test_plain_gradient_descent(self):
        params = {"p": np.array([1.0])}
        state = single_param_state(momentum=0.0, weight_decay=0.0, lr_main=0.5)
        sgd_step(params, {"p": np.array([0.2])}, state, epoch=0)
        assert params["p"][0] == pytest.approx(0.9, abs=1e-15)

    def test_zero_gradient_zero_decay_is_noop(self):
        params = {"p": np.array([1.5])}
        state = single_param_state(weight_decay=0.0)
        sgd_step(params, {"p": np.zeros(1)}, state, epoch=0)
        assert params["p"][0] == 1.5

    def test_momentum_recurrence(self):
        params = {"p": np.array([0.0])}
        state = single_param_state(momentum=0.9, weight_decay=0.0, lr_main=0.1)
        sgd_step(params, {"p": np.array([1.0])}, state, epoch=0)
        assert params["p"][0] == pytest.approx(-0.1, abs=1e-15)
        sgd_step(params, {"p": np.array([1.0])}, state, epoch=0)
        assert params["p"][0] == pytest.approx(-0.29, abs=1e-15)  # -0.1 + -0.19

    def test_weight_decay_shrinks_norm_monotonically(self):
        params = {"p": np.array([2.0, -3.0])}
        state = OptimizerState(momentum_buffers={"p": np.zeros(2)},
                               groups={"p": "main"}, momentum=0.0,
                               weight_decay=0.01, lr_main=0.1)
        norms = [np.linalg.norm(params["p"])]
        for _ in range(5):
            sgd_step(params, {"p": np.zeros(2)}, state, epoch=0)
            norms.append(np.linalg.norm(params["p"]))
        assert all(b < a for a, b in zip(norms, norms[1:]))

    def test_lr_schedule_two_decays_at_epoch_25(self):
        state = single_param_state()
        assert state.lr(25, "lce") == pytest.approx(0.01 * 0.01)
        assert state.lr(25, "main") == pytest.approx(0.001 * 0.01)
        assert state.lr(0, "lce") == 0.01
        assert state.lr(9, "lce") == 0.01
        assert state.lr(10, "lce") == pytest.approx(0.001)


def training_setup(n_samples=60, epochs=3, seed=5, noise=0.4, lr_main=0.001,
                   lr_lce=0.01, provider="precomputed", batch_size=8):
    c, d1 = 4, 8
    spec = SyntheticSpec(num_labels=c, feature_dim=d1, n_samples=n_samples,
                         dependency_edges=[(0, 1, 0.8)],
                         base_rates=[0.4, 0.1, 0.3, 0.3],
                         noise_sigma=noise, seed=seed)
    samples, records = generate_synthetic_dataset(spec)
    vocab = LabelVocabulary([f"L{j}" for j in range(c)])
    train_s, val_s, _ = split_dataset(samples, (0.7, 0.1, 0.2), seed)
    graph = build_correlation_graph(count_cooccurrence(train_s, c), 0.3, 0.2)
    config = TrainConfig(gcn_dims=[6, 8, 6], d3=8, groups=2, group_size=4, d1=d1,
                         epochs=epochs, batch_size=batch_size, seed=seed,
                         lr_main=lr_main, lr_lce=lr_lce, provider=provider,
                         toy_hidden=6)
    emb = synthetic_embeddings(vocab, 6, seed)
    bundle = DataBundle(vocab=vocab, train_samples=train_s, val_samples=val_s,
                        provider=FeatureProvider(records, kind="synthetic"))
    return config, bundle, graph, emb


class TestTrainLoop:
    def test_smoke_one_epoch(self):
        config, bundle, graph, emb = training_setup(n_samples=8, epochs=1)
        result = train(config, bundle, graph, emb)
        assert len(result.history) == 1
        assert np.isfinite(result.history[0]["train_loss"])

    def test_same_seed_identical_parameters(self):
        config, bundle, graph, emb = training_setup(epochs=2)
        a = train(config, bundle, graph, emb)
        config2, bundle2, graph2, emb2 = training_setup(epochs=2)
        b = train(config2, bundle2, graph2, emb2)
        for name, arr in a.network.parameters().items():
            assert np.array_equal(arr, b.network.parameters()[name]), name

    def test_loss_decreases_on_learnable_problem(self):
        config, bundle, graph, emb = training_setup(n_samples=120, epochs=5,
                                                    noise=0.2, lr_main=0.01)
        result = train(config, bundle, graph, emb)
        losses = [row["train_loss"] for row in result.history]
        assert all(b < a for a, b in zip(losses, losses[1:])), losses

    def test_nan_loss_aborts_with_diagnostic(self):
        config, bundle, graph, emb = training_setup(epochs=4, lr_main=1e18,
                                                    lr_lce=1e18)
        with np.errstate(all="ignore"), pytest.raises(NumericalError, match="epoch"):
            train(config, bundle, graph, emb)

    def test_toy_backbone_trains(self):
        config, bundle, graph, emb = training_setup(n_samples=20, epochs=1,
                                                    provider="toy_mlp")
        result = train(config, bundle, graph, emb)
        assert "backbone.w1" in result.network.parameters()


class TestCheckpoint:
    def test_round_trip_forward_bit_identical(self, tmp_path):
        config, bundle, graph, emb = training_setup(epochs=2)
        result = train(config, bundle, graph, emb)
        path = tmp_path / "ckpt.bin"
        save_checkpoint(path, result)
        ckpt = load_checkpoint(path)
        network = network_from_checkpoint(ckpt)
        rng = np.random.Generator(np.random.PCG64(8))
        x = rng.standard_normal((6, 8))
        assert np.array_equal(network.predict_logits(x),
                              result.network.predict_logits(x))

    def test_save_is_deterministic(self, tmp_path):
        config, bundle, graph, emb = training_setup(epochs=1)
        result = train(config, bundle, graph, emb)
        p1, p2 = tmp_path / "a.bin", tmp_path / "b.bin"
        save_checkpoint(p1, result)
        save_checkpoint(p2, result)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_payload_fatal(self, tmp_path):
        config, bundle, graph, emb = training_setup(epochs=1)
        result = train(config, bundle, graph, emb)
        path = tmp_path / "ckpt.bin"
        save_checkpoint(path, result)
        data = path.read_bytes()
        path.write_bytes(data[:-16])
        with pytest.raises(InputError, match="truncated|mismatch"):
            load_checkpoint(path)

    def test_corrupt_header_fatal(self, tmp_path):
        path = tmp_path / "ckpt.bin"
        path.write_bytes(b"{not json\n\x00\x01")
        with pytest.raises(InputError, match="corrupt"):
            load_checkpoint(path)

    def test_wrong_format_fatal(self, tmp_path):
        path = tmp_path / "ckpt.bin"
        path.write_bytes(b'{"format":"other","version":1,"tensors":[]}\n')
        with pytest.raises(InputError, match="not a checkpoint"):
            load_checkpoint(path)

    def test_version_mismatch_fatal(self, tmp_path):
        config, bundle, graph, emb = training_setup(epochs=1)
        result = train(config, bundle, graph, emb)
        path = tmp_path / "ckpt.bin"
        save_checkpoint(path, result)
        header, _, payload = path.read_bytes().partition(b"\n")
        path.write_bytes(header.replace(b'"version":1', b'"version":99') + b"\n" + payload)
        with pytest.raises(InputError, match="version"):
            load_checkpoint(path)

    def test_label_count_mismatch_names_problem(self, tmp_path):
        config, bundle, graph, emb = training_setup(epochs=1)
        result = train(config, bundle, graph, emb)
        path = tmp_path / "ckpt.bin"
        save_checkpoint(path, result)
        ckpt = load_checkpoint(path)
        ckpt.labels.append("extra")
        with pytest.raises(ShapeError, match="labels"):
            network_from_checkpoint(ckpt)


class TestDefaultScale:
    def test_default_dimensions_train_one_step(self):
        """The documented full-scale configuration (C=14, 768-d features,
        GCN 300->1024->768, D3=384, G=64, g=6) runs forward and backward."""
        c = 14
        spec = SyntheticSpec(num_labels=c, feature_dim=768, n_samples=12,
                             dependency_edges=[(0, 1, 0.8)],
                             base_rates=[0.3] * c, noise_sigma=0.5, seed=1)
        samples, records = generate_synthetic_dataset(spec)
        vocab = LabelVocabulary([f"P{j:02d}" for j in range(c)])
        train_s, val_s, _ = split_dataset(samples, (0.7, 0.1, 0.2), 1)
        graph = build_correlation_graph(count_cooccurrence(train_s, c), 0.3, 0.2)
        config = TrainConfig(epochs=1, batch_size=8, seed=1)
        emb = synthetic_embeddings(vocab, 300, 1)
        bundle = DataBundle(vocab=vocab, train_samples=train_s, val_samples=val_s,
                            provider=FeatureProvider(records, kind="synthetic"))
        result = train(config, bundle, graph, emb)
        assert np.isfinite(result.history[0]["train_loss"])
        shapes = {name: arr.shape for name, arr in result.network.parameters().items()}
        assert shapes["gcn.theta0"] == (300, 1024)
        assert shapes["gcn.theta1"] == (1024, 768)
        assert shapes["fusion.u_tilde"] == (384, 384)
        assert shapes["fusion.fc3_w"] == (64,)


class TestTrainConfig:
    def test_defaults_match_documented_values(self):
        config = TrainConfig()
        assert (config.epsilon, config.delta) == (0.3, 0.2)
        assert (config.groups, config.group_size, config.d3) == (64, 6, 384)
        assert config.gcn_dims == [300, 1024, 768]
        assert config.d1 == 768
        assert (config.lr_lce, config.lr_main) == (0.01, 0.001)
        assert (config.momentum, config.weight_decay) == (0.9, 5e-5)
        assert (config.decay_every, config.decay_factor) == (10, 0.1)
        assert (config.epochs, config.batch_size) == (30, 32)

    def test_key_mapping_for_G_and_g(self):
        config = TrainConfig.from_dict({"G": 8, "g": 3})
        assert config.groups == 8 and config.group_size == 3
        echo = config.to_dict()
        assert echo["G"] == 8 and echo["g"] == 3

    def test_unknown_key_rejected(self):
        with pytest.raises(InputError, match="unknown config key"):
            TrainConfig.from_dict({"epsilonn": 0.3})

    def test_range_validation(self):
        with pytest.raises(InputError):
            TrainConfig.from_dict({"epsilon": 1.5})
        with pytest.raises(InputError):
            TrainConfig.from_dict({"delta": 1.0})
        with pytest.raises(InputError):
            TrainConfig.from_dict({"ratios": [0.5, 0.5, 0.5]})
        with pytest.raises(InputError):
            TrainConfig.from_dict({"uncertain_policy": "maybe"})
        with pytest.raises(InputError):
            TrainConfig.from_dict({"provider": "resnet"})
