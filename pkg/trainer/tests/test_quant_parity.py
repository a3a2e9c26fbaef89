"""Cross-implementation checks against the runtime's quantizer.

The trainer's coding rules are reimplemented from the written contract;
these tests import the runtime package (test-only; the trainer package
itself never does) and demand bit-identical codes, scales, biases, and
packed bytes on random and adversarial tensors.
"""

import numpy as np
import pytest

from sewtrain.quant import (
    activation_codes,
    bias_codes,
    binary_weight_codes,
    pack_fields,
    round_away,
    septenary_weight_codes,
)

from sewnet import qtensor


class TestWeightCodeParity:
    def test_one_bit_random(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            c_out = int(rng.integers(1, 9))
            c_in = int(rng.integers(1, 9))
            w = rng.normal(scale=rng.uniform(0.01, 5.0),
                           size=(c_out, c_in, 3, 3))
            codes, scales = binary_weight_codes(w)
            ref = qtensor.quantize_weights_1bit(w)
            assert np.array_equal(codes, ref.codes)
            assert np.array_equal(scales, ref.scales)

    def test_one_bit_zero_handling(self):
        w = np.zeros((2, 1, 3, 3))
        w[1, 0, 0, 0] = -0.5
        codes, scales = binary_weight_codes(w)
        ref = qtensor.quantize_weights_1bit(w)
        assert np.array_equal(codes, ref.codes)
        assert np.array_equal(scales, ref.scales)
        assert codes[0].min() == 1 and scales[0] == 1.0

    def test_three_bit_random(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            c_out = int(rng.integers(1, 9))
            c_in = int(rng.integers(1, 9))
            w = rng.normal(scale=rng.uniform(0.01, 5.0),
                           size=(c_out, c_in, 3, 3))
            codes, scales = septenary_weight_codes(w)
            ref = qtensor.quantize_weights_3bit(w)
            assert np.array_equal(codes, ref.codes)
            assert np.array_equal(scales, ref.scales)

    def test_three_bit_tie_values(self):
        # quotients land exactly on k + 0.5 for codes 0..2
        w = np.zeros((1, 1, 3, 3))
        w[0, 0] = np.array([[0.5, 1.5, 2.5], [-0.5, -1.5, -2.5],
                            [3.0, -3.0, 0.0]])
        codes, scales = septenary_weight_codes(w)
        ref = qtensor.quantize_weights_3bit(w)
        assert np.array_equal(codes, ref.codes)
        assert np.array_equal(scales, ref.scales)
        assert codes[0, 0, 0].tolist() == [1, 2, 3]
        assert codes[0, 0, 1].tolist() == [-1, -2, -3]

    def test_three_bit_zero_channel(self):
        w = np.zeros((1, 2, 3, 3))
        codes, scales = septenary_weight_codes(w)
        ref = qtensor.quantize_weights_3bit(w)
        assert np.array_equal(codes, ref.codes)
        assert scales[0] == ref.scales[0] == 1.0
        assert not codes.any()


class TestActivationAndBiasParity:
    def test_activation_random(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            x = rng.normal(scale=3.0, size=(2, 5, 5))
            scale = float(rng.uniform(0.05, 2.0))
            mine = activation_codes(x, scale)
            ref = qtensor.quantize_activations(x, scale)
            assert np.array_equal(mine, ref.codes)

    def test_activation_tie_points(self):
        scale = 0.25
        x = (np.arange(32).reshape(2, 4, 4) + 0.5) * scale
        assert np.array_equal(activation_codes(x, scale),
                              qtensor.quantize_activations(x, scale).codes)

    def test_bias_matches_runtime_formula(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            c = int(rng.integers(1, 16))
            fb = rng.normal(scale=20.0, size=c)
            in_scale = float(np.float32(rng.uniform(0.01, 2.0)))
            w_scales = rng.uniform(0.05, 2.0, c).astype(np.float32)
            mine = bias_codes(fb, in_scale, w_scales)
            want = qtensor.round_half_away(
                fb / (in_scale * w_scales.astype(np.float64)))
            want = np.clip(want, -(2 ** 31), 2 ** 31 - 1).astype(np.int32)
            assert np.array_equal(mine, want)

    def test_rounding_ties_away(self):
        vals = np.array([0.5, 1.5, -0.5, -1.5, 2.49, -2.49, 0.0])
        assert np.array_equal(round_away(vals),
                              qtensor.round_half_away(vals))
        assert round_away(np.array([0.5]))[0] == 1.0
        assert round_away(np.array([-0.5]))[0] == -1.0


class TestPackingParity:
    def test_hand_example(self):
        signs = np.array([1, -1, 1, 1, -1, -1, -1, -1], dtype=np.int8)
        assert pack_fields(signs, 1) == bytes([0b00001101])
        assert pack_fields(signs, 1) == qtensor.pack_codes(signs, 1)

    @pytest.mark.parametrize("bits,lo,hi", [(1, 0, 2), (3, -3, 4),
                                            (5, 0, 32)])
    def test_random_streams(self, bits, lo, hi):
        rng = np.random.default_rng(bits)
        for _ in range(50):
            n = int(rng.integers(1, 2000))
            raw = rng.integers(lo, hi, size=n)
            codes = (raw * 2 - 1 if bits == 1 else raw).astype(
                np.uint8 if bits == 5 else np.int8)
            assert pack_fields(codes, bits) == qtensor.pack_codes(codes, bits)

    def test_tail_padding_and_length(self):
        for bits in (1, 3, 5):
            for n in range(0, 30):
                codes = np.ones(n, dtype=np.int8)
                packed = pack_fields(codes, bits)
                assert len(packed) == (n * bits + 7) // 8
                assert packed == qtensor.pack_codes(codes, bits)

    def test_runtime_unpack_inverts_trainer_pack(self):
        rng = np.random.default_rng(9)
        codes = rng.integers(-3, 4, size=500).astype(np.int8)
        packed = pack_fields(codes, 3)
        back = qtensor.unpack_codes(packed, 3, 500)
        assert np.array_equal(back, codes)
