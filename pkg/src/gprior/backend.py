"""Selects the Gaussian-stream backend at import.

The compiled extension is used when present; otherwise the pure-numpy
fallback.  Set GPRIOR_BACKEND=py or =cy to force one (the benchmark and
the backend-agreement tests do).  Both produce bit-identical streams.
"""

import os

_choice = os.environ.get("GPRIOR_BACKEND", "auto")
if _choice == "py":
    from . import _rng_py as _impl
elif _choice == "cy":
    from . import _rng_cy as _impl  # ImportError here means no built extension
elif _choice == "auto":
    try:
        from . import _rng_cy as _impl
    except ImportError:
        from . import _rng_py as _impl
else:
    raise RuntimeError(
        f"GPRIOR_BACKEND={_choice!r} not understood; use 'auto', 'py' or 'cy'"
    )

standard_normals = _impl.standard_normals
raw_words = _impl.raw_words
BACKEND_NAME = _impl.BACKEND_NAME

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    x &= _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return (x ^ (x >> 31)) & _MASK


def derive_stream(seed: int, tag: int) -> int:
    """Decorrelated child seed for sub-stream `tag` of `seed`.

    Used wherever one user-facing seed feeds several Monte Carlo
    estimates that must not share draws.
    """
    return _mix64((seed & _MASK) ^ _mix64((_GOLDEN * (tag + 1)) & _MASK))
