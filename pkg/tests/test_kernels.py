import os
import subprocess
import sys

import mpmath
import numpy as np
import pytest

from secrecy_rfuowc import BACKEND, _pykernels

try:
    from secrecy_rfuowc import _ckernels
except ImportError:  # extension not built
    _ckernels = None

needs_ext = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")


def _gamma_ref(a, x):
    return np.array([float(mpmath.gammainc(a, 0, v)) for v in x])


@pytest.mark.parametrize("a", [0.3, 1.0, 1.43, 4.5, 25.0])
def test_python_gamma_kernel_accuracy(a):
    x = np.concatenate([[0.0], np.geomspace(1e-6, 200, 60)])
    assert np.allclose(_pykernels.gammainc_lower(a, x), _gamma_ref(a, x), rtol=1e-12, atol=0)


@needs_ext
@pytest.mark.parametrize("a", [0.3, 1.0, 1.43, 4.5, 25.0])
def test_backends_agree_gamma(a):
    x = np.concatenate([[0.0], np.geomspace(1e-6, 200, 200)])
    c = np.asarray(_ckernels.gammainc_lower(a, x))
    p = np.asarray(_pykernels.gammainc_lower(a, x))
    assert np.allclose(c, p, rtol=1e-13, atol=0)


@needs_ext
def test_backends_agree_expoly():
    g = np.random.default_rng(0)
    coef = g.uniform(0.1, 2.0, 30)
    power = g.integers(0, 8, 30).astype(float)
    rate = g.uniform(0.1, 3.0, 30)
    x = np.geomspace(1e-3, 20, 100)
    c = np.asarray(_ckernels.expoly_sum(x, coef, power, rate))
    p = np.asarray(_pykernels.expoly_sum(x, coef, power, rate))
    assert np.allclose(c, p, rtol=1e-13, atol=0)


def test_expoly_matches_direct_sum():
    coef, power, rate = np.array([1.0, -0.5]), np.array([0.0, 2.0]), np.array([1.0, 0.3])
    x = np.array([0.0, 0.5, 3.0])
    ref = np.exp(-x) - 0.5 * x ** 2 * np.exp(-0.3 * x)
    assert np.allclose(_pykernels.expoly_sum(x, coef, power, rate), ref, rtol=1e-15)


def test_pure_flag_selects_fallback():
    env = {**os.environ, "SECRECY_RFUOWC_PURE": "1"}
    code = ("import secrecy_rfuowc as s, json; "
            "from conftest import fig2; "
            "print(s.BACKEND, repr(s.asc_direct(fig2(2)).value))")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                         cwd=os.path.dirname(__file__), check=True).stdout.split()
    assert out[0] == "python"
    from conftest import fig2
    from secrecy_rfuowc import asc_direct
    assert float(out[1]) == pytest.approx(asc_direct(fig2(2)).value, rel=1e-12)


def test_backend_reported():
    assert BACKEND in ("cython", "python")
    if _ckernels is not None and os.environ.get("SECRECY_RFUOWC_PURE", "") in ("", "0"):
        assert BACKEND == "cython"
