"""Pure-numpy counter-based Gaussian stream (fallback backend).

The variate at (seed, draw, coeff) is a pure function of its key:

    counter = draw << 32 | coeff
    word    = splitmix64_mix(seed + GOLDEN * counter)      (mod 2^64)
    u       = ((word >> 11) + 0.5) * 2^-53                 in (0,1)
    z       = ndtri(u)

i.e. the splitmix64 output stream sampled at arbitrary indices, pushed
through the Cephes rational inverse normal CDF (absolute error far below
1e-9).  The compiled backend (_rng_cy) runs the identical arithmetic and
calls the same ndtri, so the two backends produce bit-identical streams.
"""

import numpy as np
from scipy.special import ndtri

BACKEND_NAME = "pure-numpy"

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64
_TWO53_INV = 1.0 / 9007199254740992.0


def _mix(x):
    x = (x ^ (x >> _U64(30))) * _MIX1
    x = (x ^ (x >> _U64(27))) * _MIX2
    return x ^ (x >> _U64(31))


def _check_shape(start, count, dim):
    if count < 0 or dim <= 0:
        raise ValueError(f"bad stream shape count={count}, dim={dim}")
    if start + count > 2**32 or dim > 2**32:
        raise ValueError("draw and coefficient indices must fit in 32 bits")


def raw_words(seed: int, start: int, count: int, dim: int) -> np.ndarray:
    """uint64 stream words, shape (count, dim)."""
    _check_shape(start, count, dim)
    draws = np.arange(start, start + count, dtype=np.uint64)[:, None]
    coeffs = np.arange(dim, dtype=np.uint64)[None, :]
    counter = (draws << _U64(32)) | coeffs
    return _mix(_U64(seed & 0xFFFFFFFFFFFFFFFF) + _GOLDEN * counter)


def standard_normals(seed: int, start: int, count: int, dim: int) -> np.ndarray:
    """Standard normal variates for draws [start, start+count), shape
    (count, dim)."""
    words = raw_words(seed, start, count, dim)
    u = ((words >> _U64(11)).astype(np.float64) + 0.5) * _TWO53_INV
    return ndtri(u)
