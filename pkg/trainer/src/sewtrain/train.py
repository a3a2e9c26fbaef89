"""Seeded CPU training loop and the `sewtrain` command."""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from .config import BadConfig, TrainConfig, parse_config
from .data import DatasetMissing, load_dataset
from .export import SpecMismatch, export_model
from .netdef import PlanNet, build_net

__all__ = ["TrainResult", "train", "main"]


@dataclass
class TrainResult:
    net: PlanNet
    history: list[tuple[float, float]] = field(default_factory=list)
    train_size: int = 0
    val_size: int = 0

    @property
    def final_val_accuracy(self) -> float:
        return self.history[-1][1] if self.history else 0.0


def _accuracy(net: PlanNet, images: torch.Tensor,
              classes: torch.Tensor) -> float:
    if len(classes) == 0:
        return 0.0
    with torch.no_grad():
        hits = (net(images).argmax(dim=1) == classes).sum().item()
    return hits / len(classes)


def train(cfg: TrainConfig, log=None) -> TrainResult:
    """Deterministic given cfg.seed; reports (train, val) accuracy per epoch."""
    cfg.check()
    side = cfg.input_side // cfg.scale_divisor
    xs, ys = load_dataset(cfg.train_csv, cfg.image_dir,
                          cfg.input_channels, side)
    if int(ys.max()) >= cfg.num_classes:
        raise DatasetMissing(
            f"train set names class {int(ys.max()) + 1}, architecture has "
            f"{cfg.num_classes}")
    if cfg.val_csv:
        vxs, vys = load_dataset(cfg.val_csv, cfg.image_dir,
                                cfg.input_channels, side)
    else:
        vxs = np.zeros((0, cfg.input_channels, side, side), dtype=np.float32)
        vys = np.zeros(0, dtype=np.int64)

    torch.manual_seed(cfg.seed)
    net = PlanNet(cfg.layer_plan())
    images = torch.from_numpy(xs)
    classes = torch.from_numpy(ys)
    val_images = torch.from_numpy(vxs)
    val_classes = torch.from_numpy(vys)

    optimizer = torch.optim.Adam(net.parameters(), lr=cfg.learning_rate)
    loss_fn = torch.nn.CrossEntropyLoss()
    shuffler = np.random.default_rng(cfg.seed)

    result = TrainResult(net=net, train_size=len(ys), val_size=len(vys))
    for epoch in range(cfg.epochs):
        net.train()
        order = shuffler.permutation(len(ys))
        for start in range(0, len(order), cfg.batch_size):
            batch = torch.from_numpy(order[start:start + cfg.batch_size])
            optimizer.zero_grad()
            loss = loss_fn(net(images[batch]), classes[batch])
            loss.backward()
            optimizer.step()
        net.eval()
        point = (_accuracy(net, images, classes),
                 _accuracy(net, val_images, val_classes))
        result.history.append(point)
        if log is not None:
            print(f"epoch {epoch + 1}/{cfg.epochs}  "
                  f"train_acc={point[0]:.3f}  val_acc={point[1]:.3f}",
                  file=log)
    net.eval()
    return result


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sewtrain",
        description="train a float net on rendered canvases and export a "
                    "quantized model binary")
    parser.add_argument("--config", required=True,
                        help="key=value training config file")
    parser.add_argument("--calibration-samples", type=int, default=16,
                        help="training images replayed to pick output scales")
    args = parser.parse_args(argv)

    try:
        cfg = parse_config(Path(args.config).read_text(encoding="utf-8"))
    except OSError as e:
        print(f"error: cannot read config: {e}", file=sys.stderr)
        return 2
    except BadConfig as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    labels = cfg.labels or tuple(f"class_{i + 1}"
                                 for i in range(cfg.num_classes))
    try:
        result = train(cfg, log=sys.stderr)
        side = cfg.input_side // cfg.scale_divisor
        xs, _ = load_dataset(cfg.train_csv, cfg.image_dir,
                             cfg.input_channels, side)
        samples = [xs[i].astype(np.float64)
                   for i in range(min(args.calibration_samples, len(xs)))]
        export_model(result.net, cfg, labels, samples, cfg.out_path)
    except (DatasetMissing, SpecMismatch, BadConfig) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    print(f"validation accuracy {result.final_val_accuracy:.3f}" if
          result.history else "no training epochs requested")
    print(cfg.out_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
