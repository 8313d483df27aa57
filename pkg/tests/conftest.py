import json
from pathlib import Path

import pytest

from secrecy_rfuowc.battery import load_battery, load_battery_records, megg_from_vector
from secrecy_rfuowc.params import RfLinkParams, SystemConfig, db_to_linear

FROZEN = json.loads((Path(__file__).parent / "oracles" / "frozen.json").read_text())


def scenario(sr=(2.2, 2, 2, 1.0), se=(2.2, 2, 2, 1.0), vector="test-vector-A", detection="HD",
             phi_d_db=15.0, n_s=1, rate=0.01) -> SystemConfig:
    """A SystemConfig from compact tuples (eta, mu, N, linear avg SNR)."""
    return SystemConfig(RfLinkParams(*sr), RfLinkParams(*se),
                        megg_from_vector(vector, detection, db_to_linear(phi_d_db)), n_s, rate)


def fig2(n_s):
    return scenario(n_s=n_s)


def fig3(n_r=2, phi_r_db=10.0):
    return scenario(sr=(2.2, 2, n_r, db_to_linear(phi_r_db)), se=(2.2, 2, 1, 1.0))


def fig7(eta_r, phi_r_db=5.0):
    return scenario(sr=(eta_r, 2, 2, db_to_linear(phi_r_db)), se=(2.2, 2, 1, 1.0), rate=0.0)


@pytest.fixture(scope="session")
def frozen():
    return FROZEN


@pytest.fixture(scope="session")
def battery():
    return load_battery()


@pytest.fixture(scope="session")
def battery_records():
    return load_battery_records()


def romberg(f, a, b, levels=18):
    """Plain Romberg extrapolation on [a, b]; an oracle independent of the package quadrature."""
    import numpy as np

    r = np.zeros((levels, levels))
    h = b - a
    r[0, 0] = 0.5 * h * (np.sum(f(a)) + np.sum(f(b)))
    for k in range(1, levels):
        h /= 2
        xs = a + h * np.arange(1, 2 ** k, 2)
        r[k, 0] = 0.5 * r[k - 1, 0] + h * np.sum(f(xs))
        for j in range(1, k + 1):
            r[k, j] = r[k, j - 1] + (r[k, j - 1] - r[k - 1, j - 1]) / (4 ** j - 1)
    return r[levels - 1, levels - 1]
