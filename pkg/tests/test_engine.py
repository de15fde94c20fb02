from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyft.engine import apply_jacobian, batch_forward, softmax_backward, softmax_forward
from hyft.errors import InvalidInputError
from hyft.forward import HyftConfig
from hyft.numeric import FloatMode, floats_to_fields

from oracles import approx_mul, floor_q, softmax_chain

CFG = HyftConfig()
FULL = HyftConfig(mode=FloatMode.FULL)

logits = st.lists(
    st.floats(-12, 12, allow_nan=False, allow_infinity=False, width=16), min_size=1, max_size=24
)


class TestForward:
    def test_two_zeros(self):
        assert softmax_forward([0, 0], CFG).values.tolist() == [0.5, 0.5]

    def test_eight_equal(self):
        assert softmax_forward([1.25] * 8, CFG).values.tolist() == [0.125] * 8

    def test_golden_trace(self):
        r = softmax_forward([0, -1], CFG, keep_trace=True)
        assert r.values.tolist() == [0.8046875, 0.29296875]
        assert [e.value for e in r.trace.exps.values] == [1.0, 0.390625]
        assert r.trace.total.value == 1.390625
        assert softmax_chain([0, -1], 10, 10) == [Fraction(103, 128), Fraction(75, 256)]

    def test_singleton_is_one(self):
        r = softmax_forward([3.7], CFG, keep_trace=True)
        assert r.values.tolist() == [1.0] and r.trace.total is None

    def test_extreme_full_precision(self):
        r = softmax_forward([1000.0, 1000.0], FULL)
        assert r.values.tolist() == [0.5, 0.5]

    def test_words_flush_tiny_outputs(self):
        r = softmax_forward([0, -20], CFG)
        assert r.values[1] > 0
        assert r.words()[1] == 0 and r.words()[0] == 0x3C00

    def test_empty(self):
        with pytest.raises(InvalidInputError):
            softmax_forward([], CFG)

    @settings(max_examples=200)
    @given(logits, st.sampled_from([4, 10, 12]), st.integers(1, 3))
    def test_bit_exact_against_oracle(self, z, F, step):
        cfg = HyftConfig(precision=F, step=step)
        got = [f.exact for f in softmax_forward(z, cfg).s]
        assert got == softmax_chain(z, F, 10, step)

    @given(logits)
    def test_range_and_order(self, z):
        s = softmax_forward(z, CFG).values
        assert np.all((s > 0) & (s <= 1))
        zq = np.array([f.value for f in floats_to_fields(z, FloatMode.HALF)])
        # order is preserved on the fixed-point grid the hardware sees
        zf = np.floor(zq * 1024)
        for i in range(len(z)):
            for j in range(len(z)):
                if zf[i] >= zf[j]:
                    assert s[i] >= s[j]
        assert np.argmax(s) == np.argmax(zf)

    @given(logits, st.randoms(use_true_random=False))
    def test_shuffle_equivariance(self, z, rnd):
        perm = list(range(len(z)))
        rnd.shuffle(perm)
        s = softmax_forward(z, CFG).values
        sp = softmax_forward([z[p] for p in perm], CFG).values
        assert sp.tolist() == s[perm].tolist()

    @given(logits)
    def test_deterministic(self, z):
        a = softmax_forward(z, CFG).s
        b = softmax_forward(list(z), CFG).s
        assert a == b

    @given(st.lists(st.floats(-1e4, 1e4, allow_nan=False, width=32), min_size=2, max_size=16))
    def test_full_mode_range(self, z):
        s = softmax_forward(z, FULL).values
        assert np.all(np.isfinite(s)) and np.all((s > 0) & (s <= 1))


class TestBackward:
    def test_halves(self):
        J = softmax_backward(softmax_forward([0, 0], CFG), CFG).J
        assert J.tolist() == [[0.25, -0.25], [-0.25, 0.25]]

    def test_singleton(self):
        J = softmax_backward(softmax_forward([2.0], CFG), CFG).J
        assert J.tolist() == [[0.0]]

    def test_golden_pair(self):
        s = softmax_forward([0, -1], CFG)
        J = softmax_backward(s, CFG).J
        s0, s1 = Fraction(103, 128), Fraction(75, 256)
        off = approx_mul(s0, s1, 10, 5)
        assert off == Fraction(1921, 8192)
        assert J[0, 1] == J[1, 0] == -float(off)
        assert J[0, 0] == float(floor_q(s0, 10) - floor_q(approx_mul(s0, s0, 10, 5), 10))
        assert J[1, 1] == float(floor_q(s1, 10) - floor_q(approx_mul(s1, s1, 10, 5), 10))

    def test_accepts_plain_values(self):
        J = softmax_backward([0.5, 0.5], CFG).J
        assert J.tolist() == [[0.25, -0.25], [-0.25, 0.25]]

    def test_rejects_zero(self):
        with pytest.raises(InvalidInputError):
            softmax_backward([0.0, 1.0], CFG)

    @given(logits)
    def test_symmetric_and_signed(self, z):
        J = softmax_backward(softmax_forward(z, CFG), CFG).J
        assert np.array_equal(J, J.T)
        assert np.all(np.diag(J) >= 0)
        off = J[~np.eye(len(z), dtype=bool)]
        assert np.all(off <= 0)


class TestApplyJacobian:
    def test_zero_gradient(self):
        s = softmax_forward([0.3, -1.2, 2.0], CFG)
        assert apply_jacobian(s, [0, 0, 0], CFG).tolist() == [0, 0, 0]

    def test_row_extraction(self):
        s = softmax_forward([0, 0], CFG)
        assert apply_jacobian(s, [1, 0], CFG).tolist() == [0.25, -0.25]

    def test_rows_cancel(self):
        s = softmax_forward([0, 0], CFG)
        assert apply_jacobian(s, [1, 1], CFG).tolist() == [0.0, 0.0]

    def test_length_mismatch(self):
        with pytest.raises(InvalidInputError):
            apply_jacobian(softmax_forward([0, 0], CFG), [1.0], CFG)

    @given(logits, st.data())
    def test_matches_matrix_product(self, z, data):
        g = data.draw(st.lists(st.integers(-8, 8), min_size=len(z), max_size=len(z)))
        s = softmax_forward(z, CFG)
        J = softmax_backward(s, CFG).J
        # integer gradients and F-bit J entries make the product exact
        Jq = np.floor(J * 1024) / 1024
        assert apply_jacobian(s, g, CFG).tolist() == (Jq @ np.array(g, dtype=float)).tolist()


class TestBatch:
    def test_single_row(self):
        assert batch_forward([[0, 0]], CFG).tolist() == [[0.5, 0.5]]

    def test_rows_independent(self):
        out = batch_forward([[0, 0], [0, -1]], CFG)
        assert out[0].tolist() == softmax_forward([0, 0], CFG).values.tolist()
        assert out[1].tolist() == softmax_forward([0, -1], CFG).values.tolist()

    def test_column(self):
        assert batch_forward([[1.0], [-3.0], [7.5]], CFG).tolist() == [[1.0]] * 3

    def test_rejects_bad_shape(self):
        with pytest.raises(InvalidInputError):
            batch_forward([1.0, 2.0], CFG)
