import numpy as np
import pytest

from lfwavelet.field import FieldParams

# (p, c) pairs small enough for exhaustive tables
SMALL_FIELDS = [(2, 1), (3, 1), (2, 2), (5, 1), (7, 1), (3, 2), (2, 3)]
HAAR_FIELDS = [(2, 1), (3, 1), (2, 2)]


@pytest.fixture(params=SMALL_FIELDS, ids=lambda pc: f"p{pc[0]}c{pc[1]}")
def small_params(request):
    return FieldParams(*request.param)


@pytest.fixture(params=HAAR_FIELDS, ids=lambda pc: f"p{pc[0]}c{pc[1]}")
def haar_params(request):
    return FieldParams(*request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_values(rng, size, real=False):
    vals = rng.standard_normal(size)
    if not real:
        vals = vals + 1j * rng.standard_normal(size)
    return vals


def random_family(rng, params, window, level=None, size=1, real=False):
    """Random frequency-side family vanishing on P^level O (level defaults to 0)."""
    from lfwavelet.functions import FREQUENCY, TestFunction, family_from

    q = params.q
    level = 0 if level is None else level
    members = []
    for _ in range(size):
        vals = random_values(rng, window.size(q), real)
        vals[: q ** max(window.N - level, 0)] = 0
        members.append(TestFunction(params, FREQUENCY, window, vals))
    return family_from(members)
