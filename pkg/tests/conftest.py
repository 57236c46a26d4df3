import random
from fractions import Fraction

import numpy as np
import pytest

from octembed.octagons import EMPTY, Octagon, grid_axis, raster_mask


HALF = Fraction(1, 2)


def random_octagon(rng: random.Random, lo: int = -5, hi: int = 5) -> Octagon:
    """Raw octagon with integer bounds; may be empty or loose."""
    def pair():
        a, b = rng.randint(lo, hi), rng.randint(lo, hi)
        return (a, b) if rng.random() < 0.25 else (min(a, b), max(a, b))
    xs, ys = pair(), pair()
    us = (rng.randint(2 * lo, 2 * hi), rng.randint(2 * lo, 2 * hi))
    vs = (rng.randint(2 * lo, 2 * hi), rng.randint(2 * lo, 2 * hi))
    us, vs = tuple(sorted(us)), tuple(sorted(vs))
    return Octagon(xs[0], xs[1], ys[0], ys[1], us[0], us[1], vs[0], vs[1])


def random_normalized(rng: random.Random, allow_empty: bool = False) -> Octagon:
    """Normalized octagon; structured shapes are mixed in so that all the
    self-composition classes actually show up in random sweeps."""
    while True:
        style = rng.random()
        if style < 0.15:  # full rectangle
            o = Octagon.box(*sorted((rng.randint(-5, 5), rng.randint(-5, 5))),
                            *sorted((rng.randint(-5, 5), rng.randint(-5, 5))))
        elif style < 0.25:  # diagonal segment
            a, b = sorted((rng.randint(-5, 5), rng.randint(-5, 5)))
            o = Octagon(a, b, a, b, 0, 0, 2 * a, 2 * b).normalize()
        elif style < 0.45:  # u-band pinned to zero on one side
            o = random_octagon(rng)
            bounds = list(o.bounds())
            if rng.random() < 0.5:
                bounds[4] = 0
                bounds[5] = abs(bounds[5])
            else:
                bounds[5] = 0
                bounds[4] = -abs(bounds[4])
            o = Octagon(*bounds).normalize()
        else:
            o = random_octagon(rng).normalize()
        if allow_empty or o != EMPTY:
            return o


@pytest.fixture(scope="session")
def oracle_axis():
    return grid_axis(-6, 6, HALF)


def join_masks(a_mask: np.ndarray, b_mask: np.ndarray) -> np.ndarray:
    """Relational join of two rasterized relations over the shared mid axis."""
    return (a_mask.astype(np.int32) @ b_mask.astype(np.int32)) > 0


def mask_of(o: Octagon, axis) -> np.ndarray:
    return raster_mask(o, axis)
