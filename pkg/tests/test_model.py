"""Forecaster architecture, distillation, decoding, anomaly scorer."""

import numpy as np
import pytest

import cotn.tensor as te
from cotn.activation import IdentityActivation
from cotn.model import (
    ActivationMode,
    Autoencoder,
    Forecaster,
    ModelConfig,
    anomaly_score,
    causal_mask,
    distill_layer,
    distill_loss,
    load_autoencoder,
    load_forecaster,
    multi_head_attention,
    save_autoencoder,
    save_forecaster,
    sinusoidal_position_encoding,
)

RNG = np.random.default_rng(123)


def tiny_cfg(**kw):
    base = dict(d_model=8, n_heads=2, n_enc_layers=2, n_dec_layers=1,
                d_ff=16, enc_len=12, label_len=6, horizon=4, n_features=3)
    base.update(kw)
    return ModelConfig(**base)


def batch_for(cfg, n=2, seed=0):
    rng = np.random.default_rng(seed)
    enc = rng.standard_normal((n, cfg.enc_len, cfg.n_features))
    dec = np.zeros((n, cfg.label_len + cfg.horizon, cfg.n_features))
    dec[:, : cfg.label_len] = rng.standard_normal(
        (n, cfg.label_len, cfg.n_features))
    return enc, dec


class TestConfig:
    def test_head_divisibility(self):
        with pytest.raises(ValueError):
            tiny_cfg(d_model=10, n_heads=4)

    def test_label_len_bounded_by_enc_len(self):
        with pytest.raises(ValueError):
            tiny_cfg(label_len=13)

    def test_distill_needs_enough_rows(self):
        with pytest.raises(ValueError):
            tiny_cfg(enc_len=3, label_len=2, n_enc_layers=3)
        # Without distillation the same geometry is fine.
        tiny_cfg(enc_len=3, label_len=2, n_enc_layers=3, distill=False)

    def test_activation_mode_validation(self):
        with pytest.raises(ValueError):
            ActivationMode(kind="relu")
        with pytest.raises(ValueError):
            ActivationMode(kind="gated", lam=1.5)

    def test_mode_build_kinds(self):
        assert ActivationMode(kind="gelu").build().name == "gelu"
        gated = ActivationMode(kind="gated", type_id=4, lam=0.25).build()
        assert "type=4" in gated.name


class TestPositionEncoding:
    def test_shape_and_first_row(self):
        pe = sinusoidal_position_encoding(10, 8)
        assert pe.shape == (10, 8)
        np.testing.assert_allclose(pe[0, 0::2], np.zeros(4), atol=0)
        np.testing.assert_allclose(pe[0, 1::2], np.ones(4), atol=0)

    def test_first_pair_is_plain_sin_cos(self):
        pe = sinusoidal_position_encoding(6, 4)
        pos = np.arange(6.0)
        np.testing.assert_allclose(pe[:, 0], np.sin(pos), rtol=1e-15)
        np.testing.assert_allclose(pe[:, 1], np.cos(pos), rtol=1e-15)


class TestCausalMask:
    def test_structure(self):
        m = causal_mask(5)
        for i in range(5):
            for j in range(5):
                if j <= i:
                    assert m[i, j] == 0.0
                else:
                    assert m[i, j] == te.NEG_INF


class TestAttention:
    def _weights(self, d, seed=0):
        rng = np.random.default_rng(seed)
        return [te.parameter(rng.standard_normal((d, d)) * 0.3)
                for _ in range(4)]

    def test_output_shape(self):
        d = 8
        wq, wk, wv, wo = self._weights(d)
        q = te.constant(RNG.standard_normal((2, 5, d)))
        kv = te.constant(RNG.standard_normal((2, 9, d)))
        out = multi_head_attention(q, kv, kv, 2, wq, wk, wv, wo)
        assert out.shape == (2, 5, d)

    def test_single_head_equals_merged_path(self):
        d = 4
        wq, wk, wv, wo = self._weights(d, seed=3)
        x = te.constant(RNG.standard_normal((1, 6, d)))
        out = multi_head_attention(x, x, x, 1, wq, wk, wv, wo)
        assert out.shape == (1, 6, d)

    def test_causal_mask_blocks_future(self):
        d = 8
        wq, wk, wv, wo = self._weights(d, seed=5)
        x = RNG.standard_normal((1, 7, d))
        mask = causal_mask(7)
        base = multi_head_attention(
            te.constant(x), te.constant(x), te.constant(x),
            2, wq, wk, wv, wo, mask=mask).data
        x2 = x.copy()
        x2[0, 5] += 10.0
        pert = multi_head_attention(
            te.constant(x2), te.constant(x2), te.constant(x2),
            2, wq, wk, wv, wo, mask=mask).data
        assert np.array_equal(base[0, :5], pert[0, :5])
        assert not np.allclose(base[0, 5:], pert[0, 5:])

    def test_validation(self):
        d = 8
        wq, wk, wv, wo = self._weights(d)
        x = te.constant(RNG.standard_normal((1, 4, d)))
        with pytest.raises(ValueError):
            multi_head_attention(x, x, x, 3, wq, wk, wv, wo)
        bad = te.parameter(np.zeros((d, d + 1)))
        with pytest.raises(ValueError):
            multi_head_attention(x, x, x, 2, bad, wk, wv, wo)


class TestDistill:
    def test_conv_mixing_matches_manual(self):
        # Identity activation isolates the depthwise convolution.
        c = 2
        h = np.arange(12.0).reshape(1, 6, c)
        w_prev = np.array([0.5, -1.0])
        w_cur = np.array([2.0, 0.25])
        w_next = np.array([-0.5, 1.5])
        bias = np.array([0.1, -0.2])
        out = distill_layer(
            te.constant(h), te.constant(w_prev), te.constant(w_cur),
            te.constant(w_next), te.constant(bias), gelu=IdentityActivation(),
        ).data
        padded = np.zeros((1, 8, c))
        padded[:, 1:7] = h
        mixed = (padded[:, :6] * w_prev + padded[:, 1:7] * w_cur
                 + padded[:, 2:8] * w_next + bias)
        want = np.maximum(mixed[:, 0::2], mixed[:, 1::2])
        np.testing.assert_allclose(out, want, rtol=0, atol=0)

    def test_output_length_is_ceil_half(self):
        for length in (2, 5, 6, 7, 48):
            h = te.constant(RNG.standard_normal((2, length, 3)))
            ones = te.constant(np.ones(3))
            zeros = te.constant(np.zeros(3))
            out = distill_layer(h, ones, ones, ones, zeros)
            assert out.shape == (2, (length + 1) // 2, 3)

    def test_too_short_rejected(self):
        h = te.constant(RNG.standard_normal((1, 1, 2)))
        ones = te.constant(np.ones(2))
        with pytest.raises(ValueError):
            distill_layer(h, ones, ones, ones, ones)

    def test_loss_equal_length(self):
        x = RNG.standard_normal((2, 6, 3))
        y = RNG.standard_normal((2, 6, 3))
        got = distill_loss(te.constant(x), te.constant(y)).item()
        assert got == pytest.approx(((x - y) ** 2).mean(), rel=1e-12)

    def test_loss_half_length_expands(self):
        x = RNG.standard_normal((1, 5, 2))
        y = RNG.standard_normal((1, 3, 2))
        got = distill_loss(te.constant(x), te.constant(y)).item()
        expanded = np.repeat(y, 2, axis=1)[:, :5]
        assert got == pytest.approx(((x - expanded) ** 2).mean(), rel=1e-12)

    def test_loss_rejects_other_lengths(self):
        x = te.constant(RNG.standard_normal((1, 6, 2)))
        y = te.constant(RNG.standard_normal((1, 4, 2)))
        with pytest.raises(ValueError):
            distill_loss(x, y)


class TestForecaster:
    def test_seed_determinism(self):
        cfg = tiny_cfg()
        a, b = Forecaster(cfg, seed=7), Forecaster(cfg, seed=7)
        c = Forecaster(cfg, seed=8)
        for name in a.params:
            assert np.array_equal(a.params[name].data, b.params[name].data)
        assert any(not np.array_equal(a.params[n].data, c.params[n].data)
                   for n in a.params)

    def test_param_inventory(self):
        cfg = tiny_cfg()
        names = set(Forecaster(cfg).params)
        for expected in (
            "enc.embed.w", "enc.embed.b", "dec.embed.w", "dec.embed.b",
            "enc.0.attn.wq", "enc.1.ln2.beta", "enc.0.pool.w_prev",
            "dec.0.self.wo", "dec.0.cross.wk", "dec.0.ln3.gamma",
            "dec.0.ff1.w", "head.w", "head.b",
        ):
            assert expected in names, expected
        # Only stages before the last encoder layer own pooling taps.
        assert "enc.1.pool.w_prev" not in names

    def test_no_distill_drops_pool_params(self):
        names = set(Forecaster(tiny_cfg(distill=False)).params)
        assert not any(".pool." in n for n in names)

    def test_encode_shapes(self):
        cfg = tiny_cfg()
        model = Forecaster(cfg, seed=0)
        enc, _ = batch_for(cfg)
        memory, pairs = model.encode(enc)
        assert memory.shape == (2, 6, cfg.d_model)
        assert len(pairs) == 1
        assert pairs[0][0].shape == (2, 12, cfg.d_model)
        assert pairs[0][1].shape == (2, 6, cfg.d_model)

    def test_encode_without_distill_keeps_length(self):
        cfg = tiny_cfg(distill=False)
        model = Forecaster(cfg, seed=0)
        enc, _ = batch_for(cfg)
        memory, pairs = model.encode(enc)
        assert memory.shape == (2, cfg.enc_len, cfg.d_model)
        assert pairs == []

    def test_predict_shape_and_decode_counter(self):
        cfg = tiny_cfg()
        model = Forecaster(cfg, seed=1)
        enc, dec = batch_for(cfg)
        assert model.decode_calls == 0
        out = model.predict(enc, dec)
        assert out.shape == (2, cfg.horizon, 1)
        assert model.decode_calls == 1
        model.predict(enc, dec)
        assert model.decode_calls == 2

    def test_placeholder_rows_must_be_zero(self):
        cfg = tiny_cfg()
        model = Forecaster(cfg, seed=1)
        enc, dec = batch_for(cfg)
        dec[0, cfg.label_len + 1, 0] = 0.5
        with pytest.raises(ValueError):
            model.predict(enc, dec)

    def test_decoder_self_attention_is_causal(self):
        cfg = tiny_cfg()
        model = Forecaster(cfg, seed=2)
        enc, dec = batch_for(cfg)
        memory, _ = model.encode(enc)
        cap_a, cap_b = {}, {}
        model.parallel_decode(memory, dec, capture=cap_a)
        j = 4  # perturb a later label row; earlier rows must not move
        dec2 = dec.copy()
        dec2[:, j] += 3.0
        model.parallel_decode(memory, dec2, capture=cap_b)
        a, b = cap_a["self_attn_0"], cap_b["self_attn_0"]
        assert a.shape == (2, cfg.label_len + cfg.horizon, cfg.d_model)
        assert np.array_equal(a[:, :j], b[:, :j])
        assert not np.allclose(a[:, j], b[:, j])

    def test_gated_mode_runs_and_differs_from_gelu(self):
        cfg = tiny_cfg()
        enc, dec = batch_for(cfg)
        base = Forecaster(cfg, seed=3).predict(enc, dec)
        gated_cfg = tiny_cfg(
            activation=ActivationMode(kind="gated", type_id=1, lam=0.5))
        gated = Forecaster(gated_cfg, seed=3).predict(enc, dec)
        assert base.shape == gated.shape
        assert not np.allclose(base, gated)

    def test_set_activation_keeps_parameters(self):
        cfg = tiny_cfg()
        model = Forecaster(cfg, seed=4)
        before = {n: p.data.copy() for n, p in model.params.items()}
        model.set_activation(ActivationMode(kind="gated", type_id=2, lam=0.5))
        assert model.cfg.activation.kind == "gated"
        for n, arr in before.items():
            assert np.array_equal(model.params[n].data, arr)

    def test_init_independent_of_activation_mode(self):
        enc, dec = batch_for(tiny_cfg())
        a = Forecaster(tiny_cfg(), seed=5)
        b = Forecaster(tiny_cfg(
            activation=ActivationMode(kind="gated", type_id=1, lam=0.5)), seed=5)
        for n in a.params:
            assert np.array_equal(a.params[n].data, b.params[n].data)
        # Same weights, same inputs: swapping modes reproduces the other
        # model's forecast exactly.
        b.set_activation(ActivationMode(kind="gelu"))
        assert np.array_equal(a.predict(enc, dec), b.predict(enc, dec))

    def test_state_round_trip(self):
        cfg = tiny_cfg()
        model = Forecaster(cfg, seed=6)
        state = model.state_arrays()
        other = Forecaster(cfg, seed=99)
        other.load_state_arrays(state)
        enc, dec = batch_for(cfg)
        assert np.array_equal(model.predict(enc, dec), other.predict(enc, dec))

    def test_load_rejects_bad_state(self):
        cfg = tiny_cfg()
        model = Forecaster(cfg, seed=0)
        state = model.state_arrays()
        state.pop("head.b")
        with pytest.raises(ValueError):
            Forecaster(cfg).load_state_arrays(state)
        state = model.state_arrays()
        state["head.w"] = np.zeros((3, 3))
        with pytest.raises(ValueError):
            Forecaster(cfg).load_state_arrays(state)

    def test_zero_grad_clears(self):
        cfg = tiny_cfg()
        model = Forecaster(cfg, seed=0)
        enc, dec = batch_for(cfg)
        pred, _ = model.forward(enc, dec)
        grads = te.backward(te.mean_all(te.mul(pred, pred)))
        some_param = model.params["head.w"]
        assert some_param in grads
        model.zero_grad()
        for p in model.params.values():
            assert p.grad is None

    def test_checkpoint_round_trip(self, tmp_path):
        cfg = tiny_cfg(activation=ActivationMode(kind="gated", type_id=3,
                                                 lam=0.25))
        model = Forecaster(cfg, seed=11)
        enc, dec = batch_for(cfg)
        want = model.predict(enc, dec)
        path = tmp_path / "model.bin"
        save_forecaster(path, model,
                        extra_tensors={"norm.mean": np.arange(3.0)},
                        extra_meta={"data.schema": "ett"})
        back, extra, meta = load_forecaster(path)
        assert back.cfg == cfg
        assert meta["data.schema"] == "ett"
        assert np.array_equal(extra["norm.mean"], np.arange(3.0))
        assert np.array_equal(back.predict(enc, dec), want)


class TestAutoencoder:
    def _fitted(self, n=40, length=8, feats=2, seed=0):
        rng = np.random.default_rng(seed)
        windows = rng.standard_normal((n, length, feats))
        ae = Autoencoder(length, feats, hidden=16, bottleneck=4, seed=1)
        ae.fit_threshold(windows)
        return ae, windows

    def test_step_errors_shape_and_value(self):
        ae, windows = self._fitted()
        errs = ae.step_errors(windows)
        assert errs.shape == (40, 8)
        flat = windows.reshape(40, -1)
        recon = ae.reconstruct(te.constant(flat)).data
        manual = ((flat - recon) ** 2).reshape(40, 8, 2).mean(axis=2)
        np.testing.assert_allclose(errs, manual, rtol=0, atol=0)

    def test_threshold_is_95th_percentile(self):
        ae, windows = self._fitted()
        assert ae.tau == np.percentile(ae.step_errors(windows), 95.0)

    def test_weights_in_unit_interval(self):
        ae, windows = self._fitted()
        w = ae.weights(windows)
        assert w.shape == (40,)
        assert np.all(w > 0.0) and np.all(w <= 1.0)

    def test_weights_fall_with_error(self):
        ae, windows = self._fitted()
        spiked = windows.copy()
        spiked[:, 3, 0] += 25.0
        assert np.all(ae.weights(spiked) < ae.weights(windows))

    def test_unfitted_refuses_weights(self):
        ae = Autoencoder(8, 2)
        with pytest.raises(RuntimeError):
            ae.weights(np.zeros((1, 8, 2)))

    def test_window_shape_validation(self):
        ae = Autoencoder(8, 2)
        with pytest.raises(ValueError):
            ae.step_errors(np.zeros((3, 7, 2)))

    def test_anomaly_score_single_window(self):
        ae, windows = self._fitted()
        score = anomaly_score(windows[0], ae)
        assert score.step_errors.shape == (8,)
        assert 0.0 < score.weight <= 1.0
        spiked = windows[0].copy()
        spiked[2, 1] += 30.0
        worse = anomaly_score(spiked, ae)
        assert worse.weight < score.weight
        assert worse.step_errors.argmax() == 2

    def test_checkpoint_round_trip(self, tmp_path):
        ae, windows = self._fitted()
        path = tmp_path / "ae.bin"
        save_autoencoder(path, ae)
        back = load_autoencoder(path)
        assert back.tau == ae.tau
        assert back.window_len == ae.window_len
        np.testing.assert_allclose(back.step_errors(windows),
                                   ae.step_errors(windows), rtol=0, atol=0)

    def test_unfitted_checkpoint_refused(self, tmp_path):
        ae = Autoencoder(8, 2)
        with pytest.raises(RuntimeError):
            save_autoencoder(tmp_path / "ae.bin", ae)
