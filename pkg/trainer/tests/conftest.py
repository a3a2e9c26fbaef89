import numpy as np
import pytest

from sewtrain.config import TrainConfig
from sewtrain.data import render_texts, write_labels_csv
from sewtrain.train import train

SIDE = 56
LABELS = ("round", "cross")


def glyph_texts(rng, letter, count):
    return [" ".join([letter] * int(rng.integers(5, 41)))
            for _ in range(count)]


@pytest.fixture(scope="session")
def ox_dataset(tmp_path_factory):
    """Rendered two-class task: canvases of 'o' words vs 'x' words.

    260 images once per session: 200 train, 40 val, 20 held out. Both
    classes draw token counts from the same distribution, so the glyph
    shape is the only separating signal.
    """
    root = tmp_path_factory.mktemp("ox")
    rng = np.random.default_rng(2718)
    texts, rows = [], []
    for i in range(260):
        letter, cls = ("o", 1) if i % 2 == 0 else ("x", 2)
        texts.append(glyph_texts(rng, letter, 1)[0])
        rows.append((cls, f"img_{i:04d}.pgm"))
    render_texts(texts, root / "img", SIDE)
    write_labels_csv(root / "train.csv", rows[:200])
    write_labels_csv(root / "val.csv", rows[200:240])
    write_labels_csv(root / "held.csv", rows[240:])
    return root


def config_for(dataset_root, **overrides) -> TrainConfig:
    base = dict(
        train_csv=str(dataset_root / "train.csv"),
        val_csv=str(dataset_root / "val.csv"),
        image_dir=str(dataset_root / "img"),
        epochs=10, seed=7, labels=LABELS,
        out_path=str(dataset_root / "model.gnfc"))
    base.update(overrides)
    return TrainConfig(**base)


@pytest.fixture(scope="session")
def trained(ox_dataset):
    """One full 10-epoch training run shared by the export tests."""
    cfg = config_for(ox_dataset)
    return cfg, train(cfg)
