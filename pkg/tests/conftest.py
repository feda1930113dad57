import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from himix import LabelMap, rng_for


@pytest.fixture
def random_label_maps():
    """Deterministic batch of random small label maps."""
    def make(n, h=16, w=16, num_classes=4, seed=123, ignore_prob=0.0):
        rng = rng_for(seed)
        maps = []
        for _ in range(n):
            data = np.asarray([[rng.randbelow(num_classes) for _ in range(w)]
                               for _ in range(h)], dtype=np.uint8)
            if ignore_prob > 0:
                drop = np.asarray([[rng.uniform() < ignore_prob for _ in range(w)]
                                   for _ in range(h)])
                data[drop] = 255
            maps.append(LabelMap(data=data, num_classes=num_classes))
        return maps
    return make
