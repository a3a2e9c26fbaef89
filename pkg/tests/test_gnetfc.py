import numpy as np
import pytest

from sewnet.dsa_engine import (
    CONV,
    POOL,
    MissingWeights,
    conv3x3_float,
    maxpool2x2,
    run,
    validate_graph,
)
from sewnet.gnetfc import (
    ArchSpec,
    DimensionMismatch,
    EmptySampleSet,
    InvalidSpec,
    apply_full_conv,
    attach_random_float_weights,
    build_gnetfc,
    calibrate_scales,
    fc_as_single_conv,
    memory_report,
    quantize_graph,
    vgg16_conv_stack,
)


class TestArchSpec:
    def test_default_is_valid(self):
        ArchSpec().validate()

    def test_shrinking_input_breaks_the_final_chain(self):
        # Halving or quartering 224 leaves the last major without its
        # 7x7 entry map; both divisors must be rejected.
        with pytest.raises(InvalidSpec):
            ArchSpec(scale_divisor=2).validate()
        with pytest.raises(InvalidSpec):
            ArchSpec(scale_divisor=4).validate()
        with pytest.raises(InvalidSpec):
            ArchSpec(scale_divisor=3).validate()

    def test_desk_spec_keeps_the_tail_geometry(self):
        spec = ArchSpec.desk(num_classes=5)
        spec.validate()
        # 3 pools: 56 -> 28 -> 14 -> 7, then 7 -> 5 -> 3 -> 1
        assert len(spec.major_channels) == 3
        assert spec.input_side == 56

    def test_bits_list_length_enforced(self):
        with pytest.raises(InvalidSpec):
            ArchSpec(bits_per_major=(3, 3, 1, 1, 1)).validate()

    def test_bits_values_enforced(self):
        with pytest.raises(InvalidSpec):
            ArchSpec(bits_per_major=(3, 2, 1, 1, 1, 1)).validate()

    def test_odd_pool_entry_rejected(self):
        with pytest.raises(InvalidSpec):
            ArchSpec(input_side=100).validate()  # 100/2/2 = 25 is odd

    def test_small_input_rejected(self):
        with pytest.raises(InvalidSpec):
            ArchSpec.desk(input_side=32).validate()  # tail enters at 4x4

    def test_config_text_round_trip(self):
        for spec in (ArchSpec(), ArchSpec.desk(num_classes=7),
                     ArchSpec(num_classes=2)):
            back = ArchSpec.from_config_text(spec.to_config_text())
            assert back == spec

    def test_config_text_partial_keys_use_defaults(self):
        spec = ArchSpec.from_config_text("num_classes = 2\n")
        assert spec.num_classes == 2
        assert spec.major_channels == ArchSpec().major_channels

    def test_config_text_comments_and_blanks_ignored(self):
        text = "# a comment\n\nnum_classes = 4\n"
        assert ArchSpec.from_config_text(text).num_classes == 4

    def test_config_text_garbage_rejected(self):
        with pytest.raises(InvalidSpec):
            ArchSpec.from_config_text("this is not a key value line\n")


class TestBuildGraph:
    def test_default_structure(self):
        g = build_gnetfc()
        convs = [l for l in g.layers if l.kind == CONV]
        pools = [l for l in g.layers if l.kind == POOL]
        assert len(convs) == 16
        assert len(pools) == 5
        assert g.input_shape == (3, 224, 224)

    def test_shape_chain_to_single_pixel(self):
        rep = validate_graph(build_gnetfc())
        assert rep.ok
        assert rep.final_shape == (14, 1, 1)

    def test_pooled_majors_pad_one_and_tail_pads_zero(self):
        g = build_gnetfc()
        convs = [l for l in g.layers if l.kind == CONV]
        for l in convs[:-3]:
            assert l.padding == 1 and l.relu
        for l in convs[-3:]:
            assert l.padding == 0
        assert convs[-1].relu is False
        assert convs[-2].relu and convs[-3].relu

    def test_bit_assignment_per_major(self):
        g = build_gnetfc()
        bits = [l.weight_bits for l in g.layers if l.kind == CONV]
        assert bits == [3, 3] + [3, 3] + [1] * 3 + [1] * 3 + [1] * 3 + [1] * 3

    def test_channel_progression(self):
        g = build_gnetfc()
        widths = [l.out_channels for l in g.layers if l.kind == CONV]
        assert widths == [64, 64, 128, 128, 256, 256, 256, 512, 512, 512,
                          256, 256, 256, 256, 256, 14]

    def test_two_class_variant(self):
        g = build_gnetfc(ArchSpec(num_classes=2))
        assert validate_graph(g).final_shape == (2, 1, 1)

    def test_desk_variant_runs_end_to_end(self):
        spec = ArchSpec.desk(num_classes=4)
        g = build_gnetfc(spec)
        rep = validate_graph(g)
        assert rep.ok and rep.final_shape == (4, 1, 1)

    def test_invalid_spec_raises_at_build(self):
        with pytest.raises(InvalidSpec):
            build_gnetfc(ArchSpec(scale_divisor=2))


class TestFcAsSingleConv:
    def test_k1_is_reshape(self):
        rng = np.random.default_rng(0)
        fc = rng.normal(size=(5, 7))
        w = fc_as_single_conv(fc, k=1, channels=7)
        assert w.shape == (5, 7, 1, 1)
        x = rng.normal(size=(7, 1, 1))
        assert np.allclose(apply_full_conv(x, w), fc @ x.ravel())

    def test_random_instance_matches_matrix_multiply(self):
        rng = np.random.default_rng(1)
        fc = rng.normal(size=(4, 2 * 7 * 7))
        w = fc_as_single_conv(fc, k=7, channels=2)
        x = rng.normal(size=(2, 7, 7))
        want = fc @ x.ravel()
        got = apply_full_conv(x, w)
        assert np.abs(got - want).max() <= 1e-6 * max(np.abs(want).max(), 1.0)

    def test_hundred_random_instances(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            d = int(rng.integers(1, 9))
            c = int(rng.integers(1, 9))
            k = int(rng.choice([1, 3, 5, 7]))
            fc = rng.normal(size=(d, c * k * k))
            x = rng.normal(size=(c, k, k))
            want = fc @ x.ravel()
            got = apply_full_conv(x, fc_as_single_conv(fc, k, c))
            denom = max(np.abs(want).max(), 1e-9)
            assert np.abs(got - want).max() / denom <= 1e-6

    def test_zero_weights_zero_output(self):
        w = fc_as_single_conv(np.zeros((3, 2 * 5 * 5)), k=5, channels=2)
        assert not apply_full_conv(np.ones((2, 5, 5)), w).any()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            fc_as_single_conv(np.zeros((3, 10)), k=3, channels=2)
        with pytest.raises(DimensionMismatch):
            apply_full_conv(np.zeros((2, 3, 3)),
                            np.zeros((4, 2, 5, 5)))

    def test_three_layer_tail_matches_fc_on_matching_rank(self):
        # The single-conv identity is the anchor the multi-layer tail
        # approximates; verify only the exact case here.
        rng = np.random.default_rng(3)
        x = rng.normal(size=(3, 7, 7))
        fc = rng.normal(size=(6, 3 * 49))
        w = fc_as_single_conv(fc, 7, 3)
        # a full 7x7 valid conv expressed through the engine: pad the kernel
        # evaluation manually since the engine only speaks 3x3
        assert np.allclose(apply_full_conv(x, w), fc @ x.ravel())


class TestCalibration:
    def one_conv_graph(self, weight=1.0, bias=0.0, relu=True):
        g = build_tiny(relu=relu)
        w = np.zeros((1, 1, 3, 3))
        w[0, 0, 1, 1] = weight
        g.layers[0].fweights = w
        g.layers[0].fbias = np.array([bias])
        return g

    def test_scale_is_max_over_31(self):
        g = self.one_conv_graph()
        scales = calibrate_scales(g, [np.full((1, 4, 4), 62.0)])
        assert scales == [2.0]
        assert g.layers[0].out_act_scale == 2.0

    def test_all_zero_samples_give_unit_scales(self):
        g = self.one_conv_graph()
        assert calibrate_scales(g, [np.zeros((1, 4, 4))]) == [1.0]

    def test_negative_only_outputs_give_unit_scales(self):
        g = self.one_conv_graph(weight=-1.0)
        scales = calibrate_scales(g, [np.full((1, 4, 4), 5.0)])
        assert scales == [1.0]  # ReLU floors everything to zero

    def test_empty_sample_set(self):
        with pytest.raises(EmptySampleSet):
            calibrate_scales(self.one_conv_graph(), [])

    def test_missing_weights(self):
        g = build_tiny()
        with pytest.raises(MissingWeights):
            calibrate_scales(g, [np.zeros((1, 4, 4))])

    def test_calibrated_requantization_never_clips(self):
        rng = np.random.default_rng(4)
        spec = ArchSpec.desk(num_classes=2)
        g = build_gnetfc(spec)
        attach_random_float_weights(g, seed=5)
        samples = [rng.uniform(0, 255, g.input_shape) for _ in range(3)]
        calibrate_scales(g, samples)
        # replay the float path and check every conv's max against its scale
        for s in samples:
            cur = np.asarray(s, dtype=np.float64)
            for layer in g.layers:
                if layer.kind == CONV:
                    cur = conv3x3_float(cur, layer.fweights, layer.fbias,
                                        layer.padding, layer.relu)
                    code = np.round(cur.max(initial=0.0) / layer.out_act_scale)
                    assert code <= 31
                else:
                    cur = maxpool2x2(cur)


def build_tiny(relu=True):
    from sewnet.dsa_engine import NetworkGraph, conv_layer
    return NetworkGraph(input_shape=(1, 4, 4), input_act_scale=1.0,
                        layers=[conv_layer(1, 1, padding=1, bits=3,
                                           relu=relu)])


class TestQuantizeGraph:
    def test_bias_lands_in_accumulator_domain(self):
        g = build_tiny()
        w = np.zeros((1, 1, 3, 3))
        w[0, 0, 1, 1] = 1.5  # 3-bit scale becomes 0.5
        g.layers[0].fweights = w
        g.layers[0].fbias = np.array([10.0])
        g.input_act_scale = 2.0
        q = quantize_graph(g)
        qw = q.layers[0].qweights
        assert qw.scales[0] == pytest.approx(0.5)
        assert qw.bias[0] == 10  # 10 / (2.0 * 0.5)

    def test_original_graph_untouched(self):
        g = build_tiny()
        g.layers[0].fweights = np.ones((1, 1, 3, 3))
        g.layers[0].fbias = np.zeros(1)
        quantize_graph(g)
        assert g.layers[0].qweights is None
        assert g.layers[0].fweights is not None

    def test_missing_weights(self):
        with pytest.raises(MissingWeights):
            quantize_graph(build_tiny())

    def test_bit_widths_respected(self):
        spec = ArchSpec.desk(num_classes=2)
        g = build_gnetfc(spec)
        attach_random_float_weights(g, seed=6)
        rng = np.random.default_rng(6)
        calibrate_scales(g, [rng.uniform(0, 255, g.input_shape)])
        q = quantize_graph(g)
        bits = [l.qweights.bits for l in q.layers if l.kind == CONV]
        want = [l.weight_bits for l in g.layers if l.kind == CONV]
        assert bits == want

    def test_quantized_graph_runs(self):
        from sewnet.qtensor import quantize_activations
        spec = ArchSpec.desk(num_classes=2)
        g = build_gnetfc(spec)
        attach_random_float_weights(g, seed=7)
        rng = np.random.default_rng(7)
        samples = [rng.uniform(0, 255, g.input_shape) for _ in range(2)]
        calibrate_scales(g, samples)
        q = quantize_graph(g)
        x = quantize_activations(samples[0], q.input_act_scale)
        out, _ = run(q, x)
        assert out.shape == (2, 1, 1)


class TestMemoryReport:
    def test_vgg_conv_stack_float32_size(self):
        rep = memory_report(vgg16_conv_stack())
        mb = rep.float32_bytes / 1e6
        assert abs(mb - 58.9) <= 58.9 * 0.005

    def test_vgg_conv_compression_ratio_above_ten(self):
        rep = memory_report(vgg16_conv_stack())
        assert rep.compression_device > 10

    def test_default_net_stored_size_near_quoted_total(self):
        rep = memory_report(build_gnetfc(), storage_mode="device")
        assert abs(rep.device_bytes - 2.8e6) <= 0.15 * 2.8e6

    def test_packed_never_exceeds_stored_never_exceeds_float(self):
        for g in (build_gnetfc(), vgg16_conv_stack()):
            for row in memory_report(g).layers:
                assert row.packed_bytes <= row.device_bytes <= row.float32_bytes

    def test_default_net_fits_chip_budget(self):
        rep = memory_report(build_gnetfc())
        assert rep.fits_budget
        assert rep.packed_bytes + rep.peak_act_bytes <= 9 * 2 ** 20

    def test_packing_monotone_in_bits(self):
        g = build_gnetfc()
        before = memory_report(g).packed_bytes
        for l in g.layers:
            if l.kind == CONV and l.weight_bits == 3:
                l.weight_bits = 1
        after = memory_report(g).packed_bytes
        assert after < before

    def test_empty_graph_reports_zero(self):
        from sewnet.dsa_engine import NetworkGraph
        rep = memory_report(NetworkGraph((3, 8, 8), 1.0, []))
        assert rep.float32_bytes == rep.packed_bytes == rep.device_bytes == 0
        assert rep.peak_act_bytes == 0

    def test_bad_storage_mode(self):
        with pytest.raises(ValueError):
            memory_report(build_gnetfc(), storage_mode="zip")

    def test_peak_matches_validator(self):
        g = build_gnetfc()
        assert memory_report(g).peak_act_bytes == \
            validate_graph(g).peak_act_bytes
