"""Torch float network mirroring the device layer plan."""

from __future__ import annotations

import torch
from torch import nn

from .config import TrainConfig

__all__ = ["PlanNet", "build_net"]


class PlanNet(nn.Module):
    """Runs the exact conv/pool sequence of the exported graph.

    The logits come out of the last convolution as a (B, classes, 1, 1)
    map; forward() flattens them.
    """

    def __init__(self, plan):
        super().__init__()
        self.plan = plan
        ops = []
        for step in plan:
            if step[0] == "pool":
                ops.append(nn.MaxPool2d(2))
            else:
                _, c_in, c_out, padding, _bits, relu = step
                ops.append(nn.Conv2d(c_in, c_out, 3, padding=padding))
                if relu:
                    ops.append(nn.ReLU())
        self.ops = nn.Sequential(*ops)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.ops(x).flatten(1)

    def conv_arrays(self):
        """Float64 (weight, bias) numpy pairs, in plan order."""
        pairs = []
        for op in self.ops:
            if isinstance(op, nn.Conv2d):
                pairs.append((
                    op.weight.detach().numpy().astype("float64"),
                    op.bias.detach().numpy().astype("float64")))
        return pairs


def build_net(cfg: TrainConfig, seed: int | None = None) -> PlanNet:
    torch.manual_seed(cfg.seed if seed is None else seed)
    return PlanNet(cfg.layer_plan())
