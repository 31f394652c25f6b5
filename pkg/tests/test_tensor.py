"""Reverse-mode tape: values, gradients, persistence."""

import numpy as np
import pytest

import cotn.tensor as te
from cotn.activation import GeluActivation, TanhActivation
from cotn.tensor import (
    NEG_INF,
    Tensor,
    apply_activation,
    backward,
    concat_last,
    constant,
    glorot_uniform,
    layer_norm,
    load_tensors,
    matmul,
    maxpool_time2,
    mean_all,
    parameter,
    repeat_time2,
    save_tensors,
    scale,
    shift_time,
    slice_last,
    slice_time,
    softmax_last_axis,
    sum_all,
    topo_order,
    transpose_last2,
)

RNG = np.random.default_rng(42)


def fd_grad(fn, arrays, idx, h=1e-6):
    """Central finite differences of fn(arrays) w.r.t. arrays[idx]."""
    base = [a.copy() for a in arrays]
    g = np.zeros_like(base[idx])
    it = np.nditer(base[idx], flags=["multi_index"])
    for _ in it:
        mi = it.multi_index
        plus = [a.copy() for a in base]
        minus = [a.copy() for a in base]
        plus[idx][mi] += h
        minus[idx][mi] -= h
        g[mi] = (fn(plus) - fn(minus)) / (2 * h)
    return g


def check_op(build, shapes, rtol=1e-6, atol=1e-8, seed=0):
    """Compare backward() against finite differences of sum_all(op)."""
    rng = np.random.default_rng(seed)
    arrays = [rng.standard_normal(s) for s in shapes]

    def value(arrs):
        ts = [parameter(a) for a in arrs]
        return sum_all(build(*ts)).item()

    ts = [parameter(a) for a in arrays]
    loss = sum_all(build(*ts))
    grads = backward(loss)
    for i, t in enumerate(ts):
        fd = fd_grad(lambda arrs: value(arrs), arrays, i)
        np.testing.assert_allclose(grads[t], fd, rtol=rtol, atol=atol,
                                   err_msg=f"input {i}")


class TestBasics:
    def test_tensor_wraps_float64(self):
        t = constant([[1, 2], [3, 4]])
        assert t.data.dtype == np.float64
        assert t.shape == (2, 2) and t.ndim == 2 and t.size == 4
        assert not t.requires_grad

    def test_parameter_requires_grad(self):
        assert parameter(np.zeros(3)).requires_grad

    def test_item_requires_scalar(self):
        assert constant(2.5).item() == 2.5
        with pytest.raises(ValueError):
            constant([1.0, 2.0]).item()

    def test_glorot_bounds_and_determinism(self):
        w1 = glorot_uniform(np.random.default_rng(9), 40, 60, (40, 60))
        w2 = glorot_uniform(np.random.default_rng(9), 40, 60, (40, 60))
        limit = np.sqrt(6.0 / 100.0)
        assert np.array_equal(w1, w2)
        assert np.all(np.abs(w1) <= limit)
        assert w1.std() > 0


class TestArithmeticGrads:
    def test_add(self):
        check_op(lambda a, b: a + b, [(3, 4), (3, 4)])

    def test_add_broadcast(self):
        check_op(lambda a, b: a + b, [(2, 3, 4), (4,)])

    def test_sub_broadcast(self):
        check_op(lambda a, b: a - b, [(3, 4), (1, 4)])

    def test_mul(self):
        check_op(lambda a, b: a * b, [(5,), (5,)])

    def test_mul_broadcast(self):
        check_op(lambda a, b: a * b, [(2, 5, 3), (5, 1)])

    def test_scale_and_neg(self):
        check_op(lambda a: scale(a, -2.5), [(4, 2)])
        check_op(lambda a: -a, [(6,)])

    def test_scalar_operands(self):
        check_op(lambda a: a + 1.5, [(3,)])
        check_op(lambda a: 2.0 - a, [(3,)])
        check_op(lambda a: a * 3.0, [(3,)])

    def test_matmul_2d(self):
        check_op(lambda a, b: a @ b, [(3, 4), (4, 5)])

    def test_matmul_batched(self):
        check_op(lambda a, b: a @ b, [(2, 3, 4), (2, 4, 5)])

    def test_matmul_broadcast_rhs(self):
        check_op(lambda a, b: a @ b, [(2, 3, 4), (4, 5)])

    def test_transpose_last2(self):
        check_op(lambda a: transpose_last2(a) @ a, [(3, 4)])


class TestNonlinearGrads:
    def test_softmax(self):
        check_op(softmax_last_axis, [(2, 3, 5)])

    def test_softmax_rows_sum_to_one(self):
        y = softmax_last_axis(constant(RNG.standard_normal((4, 7))))
        np.testing.assert_allclose(y.data.sum(-1), np.ones(4), rtol=1e-12)

    def test_softmax_mask_zeroes_positions(self):
        x = constant(np.zeros((2, 4)))
        mask = np.array([[0.0, NEG_INF, 0.0, NEG_INF],
                         [0.0, 0.0, 0.0, NEG_INF]])
        y = softmax_last_axis(x, mask=mask).data
        assert y[0, 1] == 0.0 and y[0, 3] == 0.0 and y[1, 3] == 0.0
        np.testing.assert_allclose(y.sum(-1), np.ones(2), rtol=1e-12)
        np.testing.assert_allclose(y[0, 0], 0.5, rtol=1e-12)

    def test_softmax_masked_grad(self):
        mask = np.zeros((3, 6))
        mask[:, 4:] = NEG_INF
        check_op(lambda a: softmax_last_axis(a, mask=mask), [(3, 6)])

    def test_softmax_extreme_logits_stable(self):
        y = softmax_last_axis(constant(np.array([[1000.0, 0.0, -1000.0]])))
        assert np.all(np.isfinite(y.data))
        np.testing.assert_allclose(y.data[0, 0], 1.0, rtol=1e-12)

    def test_layer_norm(self):
        d = 6
        check_op(
            lambda x, g, b: layer_norm(x, g, b),
            [(2, 3, d), (d,), (d,)],
            rtol=1e-5, atol=1e-7,
        )

    def test_layer_norm_standardizes(self):
        x = constant(RNG.standard_normal((5, 8)) * 3 + 2)
        y = layer_norm(x, constant(np.ones(8)), constant(np.zeros(8))).data
        np.testing.assert_allclose(y.mean(-1), np.zeros(5), atol=1e-12)
        np.testing.assert_allclose(y.std(-1), np.ones(5), atol=1e-3)

    def test_apply_activation_tanh(self):
        check_op(lambda a: apply_activation(a, TanhActivation()), [(3, 4)])

    def test_apply_activation_gelu(self):
        check_op(lambda a: apply_activation(a, GeluActivation()), [(2, 3, 4)])


class TestShapeOps:
    def test_slice_time(self):
        check_op(lambda a: slice_time(a, 1, 3), [(2, 5, 3)])

    def test_slice_time_values(self):
        x = RNG.standard_normal((2, 6, 3))
        assert np.array_equal(slice_time(constant(x), 2, 5).data, x[:, 2:5])

    def test_slice_last(self):
        check_op(lambda a: slice_last(a, 2, 4), [(2, 3, 6)])

    def test_concat_last(self):
        check_op(lambda a, b, c: concat_last([a, b, c]),
                 [(2, 3, 2), (2, 3, 4), (2, 3, 1)])

    def test_concat_then_slice_identity(self):
        a = RNG.standard_normal((2, 3, 2))
        b = RNG.standard_normal((2, 3, 3))
        cat = concat_last([constant(a), constant(b)])
        assert np.array_equal(slice_last(cat, 0, 2).data, a)
        assert np.array_equal(slice_last(cat, 2, 5).data, b)

    def test_shift_time_values(self):
        x = np.arange(12.0).reshape(1, 4, 3)
        fwd = shift_time(constant(x), 1).data
        back = shift_time(constant(x), -1).data
        assert np.array_equal(fwd[0, 1:], x[0, :-1]) and np.all(fwd[0, 0] == 0)
        assert np.array_equal(back[0, :-1], x[0, 1:]) and np.all(back[0, -1] == 0)

    def test_shift_time_grads(self):
        check_op(lambda a: shift_time(a, 1), [(2, 4, 3)])
        check_op(lambda a: shift_time(a, -1), [(2, 4, 3)])
        check_op(lambda a: shift_time(a, 0), [(2, 4, 3)])


class TestPooling:
    def test_maxpool_halves_even_length(self):
        x = constant(RNG.standard_normal((2, 6, 3)))
        assert maxpool_time2(x).shape == (2, 3, 3)

    def test_maxpool_ceil_odd_length(self):
        x = np.arange(15.0).reshape(1, 5, 3)
        y = maxpool_time2(constant(x)).data
        assert y.shape == (1, 3, 3)
        assert np.array_equal(y[0, 2], x[0, 4])

    def test_maxpool_values(self):
        x = np.array([[[1.0], [5.0], [3.0], [2.0]]])
        assert np.array_equal(maxpool_time2(constant(x)).data,
                              np.array([[[5.0], [3.0]]]))

    def test_maxpool_grad_routes_to_argmax(self):
        x = parameter(np.array([[[1.0], [5.0], [3.0], [2.0]]]))
        grads = backward(sum_all(maxpool_time2(x)))
        assert np.array_equal(grads[x],
                              np.array([[[0.0], [1.0], [1.0], [0.0]]]))

    def test_maxpool_tie_goes_to_earlier_step(self):
        x = parameter(np.array([[[2.0], [2.0]]]))
        grads = backward(sum_all(maxpool_time2(x)))
        assert np.array_equal(grads[x], np.array([[[1.0], [0.0]]]))

    def test_maxpool_grad_fd(self):
        # Keep entries well separated so the max is differentiable.
        x = np.arange(24.0).reshape(2, 6, 2)
        ts = parameter(x)
        grads = backward(sum_all(maxpool_time2(ts)))
        fd = fd_grad(
            lambda arrs: sum_all(maxpool_time2(parameter(arrs[0]))).item(),
            [x], 0,
        )
        np.testing.assert_allclose(grads[ts], fd, rtol=1e-6, atol=1e-9)

    def test_repeat_time2_values(self):
        x = np.array([[[1.0], [2.0]]])
        assert np.array_equal(repeat_time2(constant(x), 4).data,
                              np.array([[[1.0], [1.0], [2.0], [2.0]]]))
        assert np.array_equal(repeat_time2(constant(x), 3).data,
                              np.array([[[1.0], [1.0], [2.0]]]))

    def test_repeat_time2_grads(self):
        check_op(lambda a: repeat_time2(a, 6), [(2, 3, 2)])
        check_op(lambda a: repeat_time2(a, 5), [(2, 3, 2)])

    def test_repeat_inverts_pool_length(self):
        for length in (5, 6, 7, 8):
            x = constant(RNG.standard_normal((1, length, 2)))
            pooled = maxpool_time2(x)
            assert repeat_time2(pooled, length).shape == x.shape


class TestReductions:
    def test_sum_and_mean(self):
        x = RNG.standard_normal((3, 4))
        assert sum_all(constant(x)).item() == pytest.approx(x.sum(), rel=1e-12)
        assert mean_all(constant(x)).item() == pytest.approx(x.mean(), rel=1e-12)
        check_op(mean_all, [(3, 4)])


class TestGraph:
    def test_topo_visits_each_node_once(self):
        a = parameter(np.ones(3))
        b = a + a
        c = b * b
        order = topo_order(c)
        assert len(order) == len(set(id(t) for t in order)) == 3
        assert order[-1] is c

    def test_diamond_graph_accumulates(self):
        a = parameter(np.array(2.0))
        b = a * a
        loss = b + b
        grads = backward(loss)
        assert grads[a] == pytest.approx(8.0, rel=1e-12)

    def test_reused_leaf_accumulates(self):
        a = parameter(np.array([1.0, 2.0]))
        loss = sum_all(a + a * 3.0)
        grads = backward(loss)
        np.testing.assert_allclose(grads[a], np.full(2, 4.0), rtol=1e-12)

    def test_backward_requires_scalar(self):
        a = parameter(np.ones(3))
        with pytest.raises(ValueError):
            backward(a + a)

    def test_constants_get_no_grad(self):
        a = parameter(np.ones(3))
        c = constant(np.ones(3))
        grads = backward(sum_all(a * c))
        assert a in grads and c not in grads

    def test_no_grad_graph_is_leaf(self):
        x = constant(np.ones(3)) + constant(np.ones(3))
        assert topo_order(x) == [x]

    def test_deep_chain_no_recursion_limit(self):
        x = parameter(np.array(1.0))
        y = x
        for _ in range(5000):
            y = y + 0.0001
        grads = backward(y)
        assert grads[x] == 1.0

    def test_check_finite_flag(self):
        a = parameter(np.array([1.0, np.inf]))
        te.check_finite = True
        try:
            with pytest.raises(FloatingPointError):
                sum_all(a * 2.0)
        finally:
            te.check_finite = False


class TestPersistence:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        tensors = {
            "w": rng.standard_normal((3, 4)),
            "b": rng.standard_normal(4),
            "s": np.array(3.14),
            "deep": rng.standard_normal((2, 3, 4)),
        }
        meta = {"kind": "test", "alpha": "0.5"}
        path = tmp_path / "ckpt.bin"
        save_tensors(path, tensors, meta)
        back, back_meta = load_tensors(path)
        assert back_meta == meta
        assert set(back) == set(tensors)
        for name, arr in tensors.items():
            assert np.array_equal(back[name], np.asarray(arr, dtype=np.float64))
            assert back[name].shape == np.asarray(arr).shape

    def test_corrupt_magic_rejected(self, tmp_path):
        path = tmp_path / "bad.bin"
        path.write_bytes(b"NOTRIGHT 1\nEND\n")
        with pytest.raises(ValueError):
            load_tensors(path)

    def test_empty_meta_ok(self, tmp_path):
        path = tmp_path / "ckpt.bin"
        save_tensors(path, {"x": np.ones(2)}, {})
        back, meta = load_tensors(path)
        assert meta == {} and np.array_equal(back["x"], np.ones(2))
