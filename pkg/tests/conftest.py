"""Shared potential families used across the test suite."""

import pytest

from zeromodes.potential import build_w, hrp_potential


def square_bump():
    # single positive square bump on [-1, 1]
    return build_w([-1.0, 1.0], [1.0])


def antisymmetric_pair(g: float):
    # -1 block, gap of length g, +1 block; antisymmetric about 0
    if g == 0.0:
        return build_w([-1.0, 0.0, 1.0], [-1.0, 1.0])
    return build_w([-1.0 - g / 2, -g / 2, g / 2, g / 2 + 1.0], [-1.0, 0.0, 1.0])


def gap_pair(g: float, b: float):
    # -1 block of width 1, gap g, +1 block of width b
    if g == 0.0:
        return build_w([-1.0, 0.0, b], [-1.0, 1.0])
    return build_w([-g - 1.0, -g, 0.0, b], [-1.0, 0.0, 1.0])


def twin_gap(g: float):
    # symmetric zero-integral potential with two gaps of length g
    if g == 0.0:
        return build_w([-2.0, -1.0, 1.0, 2.0], [-1.0, 1.0, -1.0])
    return build_w([-g - 2.0, -g - 1.0, -1.0, 1.0, g + 1.0, g + 2.0],
                   [-1.0, 0.0, 1.0, 0.0, -1.0])


@pytest.fixture(scope="session")
def sech_well():
    return hrp_potential()
