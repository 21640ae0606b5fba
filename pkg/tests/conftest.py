import logging

import numpy as np
import pytest

from causalnet.models.dataset import Dataset
from causalnet.utils.numeric import Rng


@pytest.fixture(autouse=True)
def restore_root_logger():
    """Remove os handlers que ``setup_logger`` instala no logger raiz durante o teste."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    for handler in root.handlers[:]:
        if handler not in handlers and type(handler).__module__.startswith('logging'):
            root.removeHandler(handler)
            handler.close()
    root.setLevel(level)


@pytest.fixture
def small_dataset():
    rng = Rng(123)
    x = rng.normal(0.0, 1.0, size=(40, 4))
    t = np.array([0, 1] * 20)
    y = x[:, 0] + 0.5 * t + rng.normal(0.0, 0.1, size=40)
    return Dataset(y=y, t=t, x=x, columns=["x1", "x2", "x3", "x4"])
