import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qembed.etale import (
    BaseField,
    Case,
    Component,
    Kind,
    quad,
    scale_norm,
    split_pair,
    trivial,
    validate,
)

FIELD_PARAMS = [None, -1, 2, -2, 3, 5, -5, 6, -7, 10, 13]
D_POOL = [-1, 2, 3, 5, -3, 7, -6, 15, -2, 6, -15]


def random_component(rng: random.Random) -> Component:
    kind = rng.choice(["quad", "quad", "quad", "split"])
    m = rng.choice(FIELD_PARAMS)
    if kind == "split":
        return split_pair(BaseField(m))
    return quad(BaseField(m), rng.choice(D_POOL))


def random_orthogonal(rng: random.Random, even: bool = True, max_components: int = 3):
    """A validated orthogonal algebra; retries until the parity works out."""
    while True:
        comps = [random_component(rng) for _ in range(rng.randint(1, max_components))]
        if not even:
            comps.append(trivial())
        try:
            e = validate(Case.ORTHOGONAL, comps)
        except Exception:
            continue
        if (e.rank % 2 == 0) == even:
            return e


def random_unitary(rng: random.Random, max_components: int = 3):
    while True:
        delta = rng.choice([-1, -2, -5, 3, 5, -3, -6])
        comps = []
        for _ in range(rng.randint(1, max_components)):
            m = rng.choice([m for m in FIELD_PARAMS if m is not None])
            pick = rng.random()
            if pick < 0.4:
                comps.append(quad(BaseField(None), delta))
            elif pick < 0.8:
                comps.append(quad(BaseField(m), rng.choice([delta, delta * m])))
            else:
                if BaseField(m).is_square_in(delta):
                    comps.append(split_pair(BaseField(m)))
                else:
                    comps.append(quad(BaseField(m), delta))
        try:
            return validate(Case.UNITARY, comps, delta)
        except Exception:
            continue


def random_scale(rng: random.Random, c: Component):
    if c.F.m is None:
        num = rng.choice([1, 2, 3, 5, -1, -2, -3, 7])
        den = rng.choice([1, 1, 1, 2, 3])
        return Fraction(num, den)
    while True:
        x, y = rng.randint(-4, 4), rng.randint(-4, 4)
        if x == 0 and y == 0:
            continue
        try:
            scale_norm(c, (Fraction(x), Fraction(y)))
            return (Fraction(x), Fraction(y))
        except Exception:
            continue


def random_scales(rng: random.Random, e):
    return [random_scale(rng, c) for c in e.components]


@pytest.fixture
def rng():
    return random.Random(20260809)
