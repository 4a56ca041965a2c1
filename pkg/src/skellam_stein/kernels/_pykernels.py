"""Pure-Python (numpy) implementations of the hot kernels.

Mirrors the API of the compiled module ``_ckernels``; both backends must
produce the same results to well below the quadrature tolerances used by
callers (see tests/test_kernels.py).
"""

import numpy as np

BACKEND = "python"


def convolve(a, b):
    """Full linear convolution of two 1-D float64 arrays."""
    return np.convolve(a, b)


def sweep_accumulate(out, base, off0, bx, by_rev, weight):
    """Accumulate ``weight * (base (*) Bin_x (*) negBin_y)`` over a state grid.

    out     : (nx, ny, K) accumulator; entry [x, y, j] holds the value at
              integer point ``k0_out + j`` for the state (x, y).
    base    : signed table on a contiguous window whose first point sits at
              out index ``off0`` for the state (0, 0).
    bx      : (nx, nx) rows; row x holds the Bin(x, q) pmf on 0..x.
    by_rev  : (ny, ny) rows; row y holds the reversed Bin(y, q) pmf, i.e.
              the pmf of -Bin(y, q) on the window -y..0.

    The (x, y) contribution therefore starts at out index ``off0 - y``.
    """
    nx, ny, _ = out.shape
    for x in range(nx):
        cx = np.convolve(base, bx[x, : x + 1]) if x else base
        for y in range(ny):
            seg = np.convolve(cx, by_rev[y, : y + 1]) if y else cx
            j0 = off0 - y
            out[x, y, j0 : j0 + seg.shape[0]] += weight * seg
