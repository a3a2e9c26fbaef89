import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from inknet import build_ink_model  # noqa: E402

from sewnet import gnetfc, modelfile  # noqa: E402
from sewnet.fontkit import builtin_font  # noqa: E402


@pytest.fixture(scope="session")
def font():
    return builtin_font()


@pytest.fixture(scope="session")
def ink_bundle():
    return build_ink_model()


@pytest.fixture(scope="session")
def desk_bundle():
    """Small quantized 3-class model with random trained-looking weights."""
    spec = gnetfc.ArchSpec.desk(num_classes=3)
    g = gnetfc.build_gnetfc(spec)
    gnetfc.attach_random_float_weights(g, seed=11)
    rng = np.random.default_rng(5)
    gnetfc.calibrate_scales(
        g, [rng.uniform(0, 255, g.input_shape) for _ in range(3)])
    q = gnetfc.quantize_graph(g)
    return modelfile.ModelBundle(graph=q, labels=("alpha", "beta", "gamma"),
                                 arch_text=spec.to_config_text())
