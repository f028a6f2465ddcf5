import os
import subprocess
import sys

import numpy as np
import pytest

from flipchain import ChainConfig, PopModel, generate_grid, initial_state
from flipchain._kernel import available_backends, get_backend
from flipchain.chain import advance

from conftest import BACKENDS


def test_python_always_available():
    assert "python" in available_backends()
    assert get_backend("python").BACKEND == "python"
    with pytest.raises(ImportError):
        get_backend("fortran")


def test_env_forces_fallback():
    env = dict(os.environ, FLIPCHAIN_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import flipchain; print(flipchain.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True).stdout.strip()
    assert out == "python"


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
def test_bit_identical_streams():
    g = generate_grid(20, 20, PopModel.normal(100, 50), seed=2)
    ends = []
    for name in BACKENDS:
        rng = np.random.default_rng(123)
        p = initial_state(g, 6, rng, backend=name)
        advance(p, ChainConfig("prerun", 3000), rng)
        advance(p, ChainConfig("metropolis", 3000, beta=50.0), rng)
        ends.append((p.assignment.tobytes(), p.accepted, rng.bit_generator.state["state"]["state"]))
    assert ends[0] == ends[1]


def test_kernel_copy_independent(backend):
    g = generate_grid(6, 6, PopModel.constant(1))
    p = initial_state(g, 3, seed=0, backend=backend)
    q = p.copy()
    advance(p, ChainConfig("plain", 500), np.random.default_rng(0))
    assert q == initial_state(g, 3, seed=0, backend=backend)
    assert p.backend == q.backend == backend
