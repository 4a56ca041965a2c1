"""Hot-loop kernels with a compiled core and a pure-Python fallback.

The compiled extension is preferred when present; set the environment
variable ``SKELLAM_STEIN_BACKEND=python`` (or ``c``) before import to force
a backend, e.g. for benchmarking.
"""

import os

_requested = os.environ.get("SKELLAM_STEIN_BACKEND")
if _requested not in (None, "", "c", "python"):
    raise ImportError(
        f"SKELLAM_STEIN_BACKEND must be 'c' or 'python', got {_requested!r}"
    )

if _requested == "python":
    from . import _pykernels as _impl
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        if _requested == "c":
            raise
        from . import _pykernels as _impl  # type: ignore[no-redef]

BACKEND = _impl.BACKEND
convolve = _impl.convolve
sweep_accumulate = _impl.sweep_accumulate


def load_backend(name):
    """Return the raw backend module ('c' or 'python'); used by benchmarks."""
    if name == "python":
        from . import _pykernels
        return _pykernels
    if name == "c":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
