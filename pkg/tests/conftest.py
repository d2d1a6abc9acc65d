import numpy as np
import pytest

from schottky_lab.schottky import SchottkyGroup

# two symmetric hyperbolic generators; Euler characteristic -1
RANK_TWO_PAIRS = [(-2.0, 1.0, 2.0, 1.0), (-6.0, 1.0, 6.0, 1.0)]
# one generator of translation length 2: disks centred at +-cosh(1), radius 1
CYLINDER_PAIRS = [(-np.cosh(1.0), 1.0, np.cosh(1.0), 1.0)]


def rank_two_group():
    return SchottkyGroup.from_disk_pairs(RANK_TWO_PAIRS, euler_char=-1)


def cylinder_group():
    return SchottkyGroup.from_disk_pairs(CYLINDER_PAIRS, euler_char=0)


@pytest.fixture(scope="session")
def group():
    return rank_two_group()


@pytest.fixture(scope="session")
def cylinder():
    return cylinder_group()


@pytest.fixture(scope="session")
def deltahat(group):
    from schottky_lab.zeta import zeta_real_root
    return zeta_real_root(group)


@pytest.fixture(scope="session")
def ps(group, deltahat):
    from schottky_lab.dimension import ps_measure
    return ps_measure(group, deltahat, 10)
