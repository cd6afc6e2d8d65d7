import random

import pytest

from aztec_tangent import exact


@pytest.fixture
def rng():
    return random.Random(12345)


def rational_weights(rng, count, allow_q1=False):
    out = []
    while len(out) < count:
        g = exact.as_fraction(f"{rng.randint(0, 12)}/{rng.randint(1, 4)}")
        q = exact.as_fraction(f"{rng.randint(1, 15)}/{rng.randint(1, 8)}")
        if q != 1 or allow_q1:
            out.append(exact.WeightPair(g, q))
    return out
