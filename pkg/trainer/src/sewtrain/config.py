"""Key=value training configuration.

The architecture keys use the exact vocabulary of the runtime's network
config so the embedded text in an exported model parses there unchanged;
training-only keys (epochs, learning rate, paths) are ignored by the
runtime's parser.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["BadConfig", "TrainConfig", "parse_config"]


class BadConfig(Exception):
    pass


_ARCH_KEYS = ("input_side", "input_channels", "num_classes",
              "major_channels", "major_sublayers", "major6_channels",
              "bits_per_major", "scale_divisor")


@dataclass
class TrainConfig:
    # architecture (shared vocabulary with the runtime)
    input_side: int = 56
    input_channels: int = 3
    num_classes: int = 2
    major_channels: tuple[int, ...] = (8, 16, 32)
    major_sublayers: tuple[int, ...] = (1, 1, 1)
    major6_channels: tuple[int, ...] = ()
    bits_per_major: tuple[int, ...] = (3, 3, 1, 1)
    scale_divisor: int = 1

    # training
    epochs: int = 10
    learning_rate: float = 1e-3
    batch_size: int = 16
    seed: int = 0
    train_csv: str = ""
    val_csv: str = ""
    image_dir: str = "."
    labels: tuple[str, ...] = ()
    out_path: str = "model.gnfc"

    def __post_init__(self):
        if not self.major6_channels:
            self.major6_channels = (32, 32, self.num_classes)
        for name in ("major_channels", "major_sublayers", "major6_channels",
                     "bits_per_major"):
            setattr(self, name, tuple(getattr(self, name)))
        self.labels = tuple(self.labels)

    def check(self):
        n = len(self.major_channels)
        if len(self.major_sublayers) != n:
            raise BadConfig("major_channels and major_sublayers disagree")
        if len(self.bits_per_major) != n + 1:
            raise BadConfig(f"bits_per_major needs {n + 1} entries")
        if any(b not in (1, 3) for b in self.bits_per_major):
            raise BadConfig("weight bits must be 1 or 3")
        if len(self.major6_channels) != 3:
            raise BadConfig("major6_channels needs exactly 3 entries")
        if self.num_classes < 2:
            raise BadConfig("need at least 2 classes")
        if self.scale_divisor not in (1, 2, 4):
            raise BadConfig("scale_divisor must be 1, 2 or 4")
        side = self.input_side // self.scale_divisor
        for i in range(n):
            if side % 2:
                raise BadConfig(f"pool {i + 1} would see an odd {side} px map")
            side //= 2
        if side - 6 < 1:
            raise BadConfig(f"tail enters at {side} px; needs at least 7")
        if self.epochs < 0 or self.batch_size < 1 or self.learning_rate <= 0:
            raise BadConfig("epochs >= 0, batch_size >= 1, learning_rate > 0")
        if self.labels and len(self.labels) != self.num_classes:
            raise BadConfig(f"{len(self.labels)} labels for "
                            f"{self.num_classes} classes")
        return self

    def layer_plan(self) -> list[tuple]:
        """Ordered device-op list.

        ("conv", c_in, c_out, padding, bits, relu) and ("pool", channels),
        matching the runtime's graph builder step for step.
        """
        div = self.scale_divisor
        plan = []
        c = self.input_channels
        for width, subs, bits in zip(self.major_channels,
                                     self.major_sublayers,
                                     self.bits_per_major):
            width //= div
            for _ in range(subs):
                plan.append(("conv", c, width, 1, bits, True))
                c = width
            plan.append(("pool", c))
        tail_bits = self.bits_per_major[len(self.major_channels)]
        widths = [w // div for w in self.major6_channels[:2]]
        widths.append(self.num_classes)
        for j, width in enumerate(widths):
            plan.append(("conv", c, width, 0, tail_bits, j < 2))
            c = width
        return plan

    def arch_text(self) -> str:
        """Architecture keys only, in the runtime's canonical order."""
        return "".join(f"{k} = {self._format(k)}\n" for k in _ARCH_KEYS)

    def to_text(self) -> str:
        extra = [
            ("epochs", self.epochs),
            ("learning_rate", self.learning_rate),
            ("batch_size", self.batch_size),
            ("seed", self.seed),
            ("train_csv", self.train_csv),
            ("val_csv", self.val_csv),
            ("image_dir", self.image_dir),
            ("labels", ",".join(self.labels)),
            ("out_path", self.out_path),
        ]
        return self.arch_text() + "".join(f"{k} = {v}\n" for k, v in extra)

    def _format(self, key):
        v = getattr(self, key)
        return ",".join(map(str, v)) if isinstance(v, tuple) else v


def parse_config(text: str) -> TrainConfig:
    kv = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise BadConfig(f"line {lineno}: expected key = value")
        key, _, value = line.partition("=")
        kv[key.strip()] = value.strip()

    base = TrainConfig()
    get = kv.get

    def ints(key, default):
        if key not in kv:
            return default
        return tuple(int(x) for x in kv[key].split(",") if x.strip())

    try:
        cfg = TrainConfig(
            input_side=int(get("input_side", base.input_side)),
            input_channels=int(get("input_channels", base.input_channels)),
            num_classes=int(get("num_classes", base.num_classes)),
            major_channels=ints("major_channels", base.major_channels),
            major_sublayers=ints("major_sublayers", base.major_sublayers),
            major6_channels=ints("major6_channels", ()),
            bits_per_major=ints("bits_per_major", base.bits_per_major),
            scale_divisor=int(get("scale_divisor", base.scale_divisor)),
            epochs=int(get("epochs", base.epochs)),
            learning_rate=float(get("learning_rate", base.learning_rate)),
            batch_size=int(get("batch_size", base.batch_size)),
            seed=int(get("seed", base.seed)),
            train_csv=get("train_csv", base.train_csv),
            val_csv=get("val_csv", base.val_csv),
            image_dir=get("image_dir", base.image_dir),
            labels=tuple(x.strip() for x in get("labels", "").split(",")
                         if x.strip()),
            out_path=get("out_path", base.out_path),
        )
    except ValueError as e:
        raise BadConfig(f"bad numeric value: {e}") from None
    return cfg.check()
