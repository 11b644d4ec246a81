import numpy as np
import pytest

import widthlab as wl


@pytest.fixture(scope="session")
def bm_kernel():
    return wl.make_kernel("brownian")


@pytest.fixture(scope="session")
def bridge_kernel():
    return wl.make_kernel("bridge")


@pytest.fixture(scope="session")
def quad_2000(bm_kernel):
    return wl.midpoint_rule(bm_kernel.domain, 2000)


@pytest.fixture(scope="session")
def bm_analytic(quad_2000):
    return wl.analytic_spectrum("brownian", 260, quad_2000)


@pytest.fixture(scope="session")
def bridge_analytic(quad_2000):
    return wl.analytic_spectrum("bridge", 260, quad_2000)


@pytest.fixture(scope="session")
def bm_nystrom(bm_kernel, quad_2000):
    return wl.nystrom_spectrum(bm_kernel, quad_2000, 200)


@pytest.fixture(scope="session")
def bridge_nystrom(bridge_kernel, quad_2000):
    return wl.nystrom_spectrum(bridge_kernel, quad_2000, 200)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260808)
