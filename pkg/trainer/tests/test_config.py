import pytest

from sewtrain.config import BadConfig, TrainConfig, parse_config


class TestParse:
    def test_round_trip(self):
        cfg = TrainConfig(epochs=3, learning_rate=0.005, seed=42,
                          labels=("a", "b"), train_csv="t.csv",
                          val_csv="v.csv", image_dir="img",
                          out_path="m.gnfc")
        again = parse_config(cfg.to_text())
        assert again == cfg

    def test_defaults_and_comments(self):
        cfg = parse_config("# tiny run\nepochs = 1\n\nseed = 9\n")
        assert cfg.epochs == 1 and cfg.seed == 9
        assert cfg.input_side == 56
        assert cfg.major6_channels == (32, 32, 2)

    def test_arch_keys_shared_vocabulary(self):
        text = ("input_side = 56\nnum_classes = 4\n"
                "major_channels = 4,8,16\nmajor_sublayers = 1,1,1\n"
                "major6_channels = 16,16,4\nbits_per_major = 3,3,1,1\n")
        cfg = parse_config(text)
        assert cfg.num_classes == 4
        assert cfg.layer_plan()[-1][2] == 4

    def test_garbage_line(self):
        with pytest.raises(BadConfig, match="line 2"):
            parse_config("epochs = 1\nnot a setting\n")

    def test_bad_number(self):
        with pytest.raises(BadConfig):
            parse_config("epochs = three\n")

    def test_check_rejects_odd_pool_input(self):
        with pytest.raises(BadConfig, match="odd"):
            TrainConfig(input_side=54).check()

    def test_check_rejects_short_tail(self):
        with pytest.raises(BadConfig, match="tail"):
            TrainConfig(input_side=40).check()

    def test_check_rejects_label_count_mismatch(self):
        with pytest.raises(BadConfig, match="labels"):
            TrainConfig(labels=("only",)).check()

    def test_arch_text_contains_no_training_keys(self):
        text = TrainConfig(epochs=5).arch_text()
        assert "epochs" not in text
        assert "input_side = 56" in text
