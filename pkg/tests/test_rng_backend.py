import os
import subprocess
import sys

import numpy as np
import pytest

from partialaco import SplitMix64
from partialaco._backend import available, load
from partialaco.rng import below, stream_seed, uniforms_at

# reference outputs of SplitMix64 seeded with 0
SPLITMIX_SEED0 = [0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F]


def test_reference_vector():
    r = SplitMix64(0)
    for expected in SPLITMIX_SEED0:
        assert r.random() == (expected >> 11) * 2.0**-53


def test_vectorised_draws_match_scalar_draws():
    r = SplitMix64(99)
    u, state = uniforms_at(99, 1000)
    assert u.tolist() == [r.random() for _ in range(1000)]
    assert state == r.state
    assert np.all((u >= 0) & (u < 1))


def test_below_is_in_range():
    assert below(0.0, 5) == 0
    assert below(np.nextafter(1.0, 0), 5) == 4
    r = SplitMix64(3)
    counts = np.bincount([r.randbelow(4) for _ in range(4000)], minlength=4)
    assert counts.min() > 850


def test_streams_differ():
    seeds = {stream_seed(7, k) for k in range(100)}
    assert len(seeds) == 100
    assert stream_seed(7, 0) != stream_seed(8, 0)


def test_python_backend_always_loads():
    assert load("python").BACKEND == "python"
    assert "python" in available()


def test_compiled_backend_or_clean_fallback():
    if "cython" in available():
        assert load("cython").BACKEND == "cython"
        assert load("auto").BACKEND == "cython"
    else:
        assert load("auto").BACKEND == "python"
        with pytest.raises(ImportError):
            load("cython")


def test_environment_selects_the_backend():
    env = {**os.environ, "PARTIALACO_BACKEND": "python"}
    out = subprocess.run([sys.executable, "-c", "import partialaco; print(partialaco.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
