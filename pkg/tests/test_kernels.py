import os
import subprocess
import sys

import numpy as np
import pytest

from fraudwin import _pykernels, kernels

import oracles

try:
    from fraudwin import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = [_pykernels] + ([_ckernels] if _ckernels is not None else [])


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
@pytest.mark.parametrize("lam", [0.5, 0.9, 1.0])
def test_weighted_stats_matches_oracle(impl, lam):
    rng = np.random.default_rng(3)
    for n in (1, 2, 3, 7, 20):
        xs = list(rng.uniform(0.01, 1000, n))
        m, s = impl.weighted_stats(xs, lam)
        om, os_ = oracles.weighted_stats(xs, lam)
        assert m == pytest.approx(om, rel=1e-12)
        assert s == pytest.approx(os_, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("impl", BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def test_empty_buffer_rejected(impl):
    with pytest.raises(ValueError):
        impl.weighted_stats([], 0.9)


@pytest.mark.skipif(_ckernels is None, reason="compiled extension not built")
def test_backends_bit_identical():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        n = int(rng.integers(1, 21))
        xs = [float(x) for x in rng.uniform(0.01, 1000, n)]
        lam = float(rng.choice([0.5, 0.9, 1.0, 0.73]))
        assert _ckernels.weighted_stats(xs, lam) == _pykernels.weighted_stats(xs, lam)
        m, s = _pykernels.weighted_stats(xs, lam)
        assert _ckernels.interval_bounds(m, s, 3.0, 0.1, 1.0) == _pykernels.interval_bounds(m, s, 3.0, 0.1, 1.0)


def test_interval_bounds_formula():
    assert _pykernels.interval_bounds(10.0, 2.0, 2.0, 0.0, 0.0) == (6.0, 14.0)
    # floor: rho*m + a0 = 2 beats s = 0
    assert _pykernels.interval_bounds(10.0, 0.0, 2.0, 0.1, 1.0) == (6.0, 14.0)
    # lower end clipped at zero
    assert _pykernels.interval_bounds(1.0, 5.0, 3.0, 0.0, 0.0) == (0.0, 16.0)


def test_pure_env_switch_selects_fallback():
    code = "from fraudwin import kernels; print(kernels.BACKEND)"
    env = dict(os.environ, FRAUDWIN_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
    assert kernels.BACKEND in ("python", "cython")
