import warnings

import pytest
from hypothesis import settings, strategies as st

from specden import gf2
from specden.tds import Configuration, Cylinder, GroupElement

warnings.filterwarnings("ignore", message=".*TBB.*")

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def pytest_addoption(parser):
    parser.addoption("--skip-slow", action="store_true", help="skip long experiment tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--skip-slow"):
        skip = pytest.mark.skip(reason="--skip-slow")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip)


@st.composite
def gl2_matrices(draw, bits):
    """Random element of GL(bits, 2) as a product of basis-swapping maps."""
    size = 1 << bits
    a = gf2.identity(bits)
    for _ in range(draw(st.integers(0, 3))):
        x = draw(st.integers(1, size - 1))
        y = draw(st.integers(1, size - 1))
        order = draw(st.sampled_from(sorted(gf2.COMPLETIONS)))
        a = gf2.matmul(gf2.completion(x, y, bits, order), a)
    return a


@st.composite
def group_elements(draw, bits=2):
    local = draw(st.dictionaries(st.integers(-3, 3), gl2_matrices(bits), max_size=3))
    state = draw(gl2_matrices(2))
    return GroupElement.make(bits, draw(st.integers(-3, 3)), local, state)


@st.composite
def configurations(draw, bits=2):
    size = 1 << bits
    tape = draw(st.dictionaries(st.integers(-5, 5), st.integers(0, size - 1), max_size=8))
    return Configuration.make(tape, draw(st.integers(0, 3)))


@st.composite
def cylinders(draw, bits=2):
    full = (1 << (1 << bits)) - 1
    window = draw(st.dictionaries(st.integers(-3, 3), st.integers(1, full), max_size=4))
    return Cylinder.make(bits, window, draw(st.integers(1, 15)))
