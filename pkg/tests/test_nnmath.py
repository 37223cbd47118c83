import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from biscnn import nnmath
from biscnn.errors import RejectedInputError, StateError, WindowTooShortError

from conftest import finite_differences, relative_error


def conv_oracle(x, filters, biases):
    """Nested-sum definition of the full-width valid correlation."""
    L, d = x.shape
    s, fw, _ = filters.shape
    out = np.zeros((L - fw + 1, s))
    for t in range(L - fw + 1):
        for k in range(s):
            acc = biases[k]
            for j in range(fw):
                for i in range(d):
                    acc += x[t + j, i] * filters[k, j, i]
            out[t, k] = acc
    return out


def scan_max(fm):
    vals, idx = [], []
    for k in range(fm.shape[1]):
        best, arg = fm[0, k], 0
        for t in range(1, fm.shape[0]):
            if fm[t, k] > best:
                best, arg = fm[t, k], t
        vals.append(best)
        idx.append(arg)
    return np.array(vals), np.array(idx)


class TestConv:
    def test_zero_filter_gives_zero(self):
        x = np.random.default_rng(0).standard_normal((6, 3))
        out = nnmath.conv_full_width(x, np.zeros((1, 2, 3)), np.zeros(1))
        assert np.array_equal(out, np.zeros((5, 1)))

    def test_ones_filter_sums_rows(self):
        x = np.random.default_rng(1).standard_normal((5, 4))
        out = nnmath.conv_full_width(x, np.ones((1, 1, 4)), np.zeros(1))
        np.testing.assert_allclose(out[:, 0], x.sum(axis=1), rtol=0, atol=1e-14)

    def test_matches_nested_sum_oracle(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal((4, 3))
        f = rng.standard_normal((1, 2, 3))
        out = nnmath.conv_full_width(x, f, np.zeros(1))
        assert out.shape == (3, 1)
        np.testing.assert_allclose(out, conv_oracle(x, f, np.zeros(1)), atol=1e-12)

    def test_many_filters_with_bias(self):
        rng = np.random.default_rng(3)
        x, f, b = rng.standard_normal((9, 5)), rng.standard_normal((6, 3, 5)), rng.standard_normal(6)
        np.testing.assert_allclose(nnmath.conv_full_width(x, f, b), conv_oracle(x, f, b), atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(RejectedInputError):
            nnmath.conv_full_width(np.ones((4, 3)), np.ones((1, 2, 2)), np.zeros(1))

    def test_window_too_short(self):
        with pytest.raises(WindowTooShortError):
            nnmath.conv_full_width(np.ones((2, 3)), np.ones((1, 3, 3)), np.zeros(1))

    @given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_linear_in_input(self, a, b, seed):
        rng = np.random.default_rng(seed)
        x, y = rng.uniform(-1, 1, (7, 4)), rng.uniform(-1, 1, (7, 4))
        f, z = rng.uniform(-1, 1, (3, 3, 4)), np.zeros(3)
        lhs = nnmath.conv_full_width(a * x + b * y, f, z)
        rhs = a * nnmath.conv_full_width(x, f, z) + b * nnmath.conv_full_width(y, f, z)
        np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-10)


class TestMaxPool:
    def test_single_row(self):
        row = np.array([[0.3, -1.0, 2.0]])
        vals, trace = nnmath.max_pool_over_time(row)
        assert np.array_equal(vals, row[0])
        assert np.array_equal(trace, [0, 0, 0])

    def test_direct_max(self):
        vals, trace = nnmath.max_pool_over_time(np.array([[1.0], [3.0], [2.0]]))
        assert vals[0] == 3.0 and trace[0] == 1

    def test_ties_go_to_lowest_row(self):
        _, trace = nnmath.max_pool_over_time(np.array([[1.0], [5.0], [5.0]]))
        assert trace[0] == 1

    def test_matches_linear_scan(self):
        fm = np.random.default_rng(4).standard_normal((7, 5))
        vals, trace = nnmath.max_pool_over_time(fm)
        ov, ot = scan_max(fm)
        assert np.array_equal(vals, ov) and np.array_equal(trace, ot)

    def test_empty_rejected(self):
        with pytest.raises(RejectedInputError):
            nnmath.max_pool_over_time(np.zeros((0, 3)))

    @given(seed=st.integers(0, 10_000))
    @settings(max_examples=50, deadline=None)
    def test_permutation_invariant_values(self, seed):
        rng = np.random.default_rng(seed)
        fm = rng.standard_normal((6, 4))
        perm = rng.permutation(6)
        v1, t1 = nnmath.max_pool_over_time(fm)
        v2, t2 = nnmath.max_pool_over_time(fm[perm])
        assert np.array_equal(v1, v2)
        assert np.array_equal(perm[t2], t1)


class TestSigmoid:
    def test_zero(self):
        assert nnmath.sigmoid(np.array([0.0]))[0] == 0.5

    def test_value_at_two(self):
        assert nnmath.sigmoid(np.array([2.0]))[0] == pytest.approx(0.8807970779778823, abs=1e-15)

    @given(arrays(np.float64, 8, elements=st.floats(-30, 30)))
    def test_symmetry_and_range(self, x):
        y = nnmath.sigmoid(x)
        np.testing.assert_allclose(y + nnmath.sigmoid(-x), 1.0, atol=1e-15)
        assert np.all((y > 0) & (y < 1))

    @given(st.floats(-30, 30), st.floats(0.01, 5))
    def test_monotone(self, x, dx):
        assert nnmath.sigmoid(np.array([x + dx]))[0] >= nnmath.sigmoid(np.array([x]))[0]

    def test_no_overflow_warning(self):
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            y = nnmath.sigmoid(np.array([-1000.0, 1000.0]))
        assert y[0] == 0.0 and y[1] == 1.0


class TestBackward:
    def test_sigmoid_at_zero(self):
        node = nnmath.Sigmoid()
        node.forward(np.array([0.0]))
        assert node.backward(np.array([1.0]))["input"][0] == 0.25

    def test_maxpool_routes_to_argmax(self):
        fm = np.array([[1.0, 9.0], [3.0, 2.0], [2.0, 0.0]])
        node = nnmath.MaxPool()
        _, trace = node.forward(fm)
        g = node.backward(np.array([0.7, -1.5]))["input"]
        expected = np.zeros((3, 2))
        expected[1, 0], expected[0, 1] = 0.7, -1.5
        assert np.array_equal(g, expected)

    @pytest.mark.parametrize("node", [nnmath.Sigmoid(), nnmath.MaxPool(), nnmath.Conv(np.ones((1, 1, 1)), np.zeros(1)),
                                      nnmath.Affine(np.ones((2, 2)))])
    def test_backward_before_forward(self, node):
        with pytest.raises(StateError):
            node.backward(np.ones(1))

    def test_small_graph_against_finite_differences(self):
        """affine(sigmoid(maxpool(conv(x)))) summed with fixed weights."""
        rng = np.random.default_rng(5)
        params = {
            "x": rng.uniform(-1, 1, (6, 3)),
            "f": rng.uniform(-1, 1, (4, 2, 3)),
            "b": rng.uniform(-1, 1, 4),
            "w": rng.uniform(-1, 1, (3, 4)),
            "c": rng.uniform(-1, 1, 3),
        }
        head = rng.uniform(-1, 1, 3)

        def loss():
            fm = nnmath.conv_full_width(params["x"], params["f"], params["b"])
            pooled, _ = nnmath.max_pool_over_time(fm)
            return float(head @ nnmath.affine(params["w"], nnmath.sigmoid(pooled), params["c"]))

        conv = nnmath.Conv(params["f"], params["b"])
        pool, sig, aff = nnmath.MaxPool(), nnmath.Sigmoid(), nnmath.Affine(params["w"], params["c"])
        pooled, _ = pool.forward(conv.forward(params["x"]))
        aff.forward(sig.forward(pooled))
        ga = aff.backward(head)
        gs = sig.backward(ga["input"])
        gp = pool.backward(gs["input"])
        gc = conv.backward(gp["input"])
        analytic = {"x": gc["input"], "f": gc["filters"], "b": gc["biases"], "w": ga["weight"], "c": ga["bias"]}
        numeric = finite_differences(loss, params, eps=1e-4)
        for name in params:
            assert relative_error(analytic[name], numeric[name]).max() < 1e-4, name
