import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from semifix import kernels

IMPLS = kernels.backends()
needs_compiled = pytest.mark.skipif("cython" not in IMPLS, reason="compiled kernels not built")


@st.composite
def matrix_and_map(draw):
    n = draw(st.integers(1, 7))
    vals = draw(st.lists(st.floats(0.01, 100.0), min_size=n * n, max_size=n * n))
    d = np.array(vals).reshape(n, n)
    d = (d + d.T) / 2
    np.fill_diagonal(d, 0.0)
    m = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    return d, np.array(m)


def _same(a, b):
    # bit-identical, nan-free tuples
    assert len(a) == len(b)
    for x, y in zip(a, b):
        assert x == y and type(float(x)) is type(float(y)), (a, b)


@needs_compiled
@given(inst=matrix_and_map(), c=st.floats(0, 2), K=st.floats(1, 4), q=st.floats(0.25, 4))
@settings(max_examples=300, deadline=None)
def test_backends_bit_identical(inst, c, K, q):
    d, m = inst
    py, cy = IMPLS["python"], IMPLS["cython"]
    for mode in (kernels.BANACH, kernels.KANNAN, kernels.CHATTERJEA):
        _same(kernels.ratio_constant(d, m, mode, py), kernels.ratio_constant(d, m, mode, cy))
    for mode in (0, 1, 2, 3):
        _same(kernels.coefficient_excess(d, m, mode, c, py), kernels.coefficient_excess(d, m, mode, c, cy))
    _same(kernels.perimeter_constant(d, m, py), kernels.perimeter_constant(d, m, cy))
    _same(kernels.crr_excess(d, m, c / 3, c / 4, c / 5, py), kernels.crr_excess(d, m, c / 3, c / 4, c / 5, cy))
    for code in range(4):
        _same(kernels.tr_excess(d, code, K, q, py), kernels.tr_excess(d, code, K, q, cy))
    assert kernels.tr_ratio(d, py) == kernels.tr_ratio(d, cy)


def test_kernel_semantics_small():
    d = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]], float)
    m = [1, 1, 2]
    # pairs: (0,1) has zero image distance and is skipped, (0,2) gives 1/2, (1,2) gives 1/1
    assert kernels.ratio_constant(d, m, kernels.BANACH) == (1.0, 1, 2, 1.0, 1.0)
    # 1 and 2 are distinct fixed points, so no Kannan constant exists
    assert kernels.ratio_constant(d, m, kernels.KANNAN)[0] == np.inf
    assert kernels.ratio_constant(d, [1, 1, 1], kernels.KANNAN)[0] == 0.0
    assert kernels.tr_excess(d, 0)[0] == 0.0
    assert kernels.tr_ratio(d) == 1.0
    # perimeter of the only triple is 4; image triangle (1, 1, 2) has perimeter 2
    assert kernels.perimeter_constant(d, m) == (0.5, 0, 1, 2, 2.0, 4.0)


def test_backend_selection_honours_env():
    env = dict(os.environ, SEMIFIX_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import semifix.kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@needs_compiled
def test_compiled_backend_is_default():
    if os.environ.get("SEMIFIX_PURE_PYTHON", "") not in ("", "0"):
        pytest.skip("fallback forced")
    assert kernels.BACKEND == "cython"
