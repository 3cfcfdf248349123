"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The numba path is used when numba imports cleanly and the environment variable
``JUNTAPAC_DISABLE_NUMBA`` is unset or ``0``. Both paths share one contract and
are cross-checked in the test suite; ``benchmarks/bench_kernels.py`` times them.
"""
import os

import numpy as np

from . import _numpy

BACKEND = "numpy"
_impl = _numpy

if os.environ.get("JUNTAPAC_DISABLE_NUMBA", "0") in ("", "0"):
    try:
        from . import _numba
    except ImportError:  # numba missing or broken
        pass
    else:
        _impl = _numba
        BACKEND = "numba"


def backend_module(name=None):
    """Return the kernel module for ``name`` ('numba' or 'numpy'), default the active one."""
    if name is None:
        return _impl
    if name == "numpy":
        return _numpy
    if name == "numba":
        from . import _numba
        return _numba
    raise ValueError(f"unknown kernel backend {name!r}")


def _i64(a):
    return np.ascontiguousarray(a, dtype=np.int64)


def fwht(a):
    """Unnormalized Walsh-Hadamard transform, in place on a float64 buffer."""
    return _impl.fwht(a)


def parity(points, masks):
    return _impl.parity(_i64(points), _i64(masks))


def extract_bits(points, positions):
    return _impl.extract_bits(_i64(points), _i64(positions))


def restriction_counts(xs, ys, positions):
    return _impl.restriction_counts(_i64(xs), _i64(ys), _i64(positions))


def label_parity_sums(xs, ys, masks):
    return _impl.label_parity_sums(_i64(xs), _i64(ys), _i64(masks))


def poly_eval(points, masks, coeffs):
    return _impl.poly_eval(_i64(points), _i64(masks), np.ascontiguousarray(coeffs, dtype=np.float64))


def truth_table_search(counts):
    return _impl.truth_table_search(_i64(counts))
