"""Backend dispatch for the hot numerical kernels.

The environment variable CACHENET_BACKEND picks the implementation:

* ``auto`` (default): numba if importable, else pure numpy;
* ``numba``: require the compiled kernels, raise if numba is missing;
* ``numpy``: force the pure-numpy fallback.

Both backends implement the same three functions (see _kernels_numpy for the
contracts): ``log2_interference_sum``, ``zf_precode``, ``interference_power``.
"""

import os

from . import _kernels_numpy

_CHOICES = ("auto", "numba", "numpy")
_requested = os.environ.get("CACHENET_BACKEND", "auto").strip().lower()
if _requested not in _CHOICES:
    raise RuntimeError(
        f"CACHENET_BACKEND must be one of {_CHOICES}, got {_requested!r}"
    )

if _requested in ("auto", "numba"):
    try:
        from . import _kernels_numba

        _impl = _kernels_numba
        BACKEND = "numba"
    except ImportError:
        if _requested == "numba":
            raise
        _impl = _kernels_numpy
        BACKEND = "numpy"
else:
    _impl = _kernels_numpy
    BACKEND = "numpy"

log2_interference_sum = _impl.log2_interference_sum
zf_precode = _impl.zf_precode
interference_power = _impl.interference_power


def get_backend() -> str:
    """Name of the kernel backend actually in use ('numba' or 'numpy')."""
    return BACKEND
