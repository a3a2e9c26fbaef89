"""Trainer companion to the sewnet runtime.

Trains small float convolutional networks on images rendered by the sewnet
CLI, quantizes them with an independent implementation of the same coding
rules, and writes model binaries the runtime loads directly. The two
packages share no code; they meet only at files (PGM images, label CSVs,
key=value configs, model binaries).
"""

from .config import TrainConfig, parse_config
from .export import export_model
from .train import train

__all__ = ["TrainConfig", "parse_config", "export_model", "train"]
