"""Hot integer sweeps over reduced forms.

Two interchangeable backends fill the same tables: a numba-compiled loop and
a vectorised numpy path.  Set ``CM_ATLAS_NUMBA=0`` to force numpy.
"""
from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover
    njit = None


def _numba_requested() -> bool:
    flag = os.environ.get("CM_ATLAS_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "no", "off")


USE_NUMBA = njit is not None and _numba_requested()


if njit is not None:

    @njit(cache=True)
    def _gcd(x, y):
        while y:
            x, y = y, x % y
        return x

    @njit(cache=True)
    def _form_counts_numba(bound, h, amb):
        a = 1
        while 3 * a * a <= bound:
            for b in range(-a + 1, a + 1):
                ab = _gcd(a, abs(b))
                c = a
                while True:
                    n = 4 * a * c - b * b
                    if n > bound:
                        break
                    if not (c == a and b < 0) and _gcd(ab, c) == 1:
                        h[n] += 1
                        if b == 0 or b == a or c == a:
                            amb[n] += 1
                    c += 1
            a += 1


def _form_counts_numpy(bound, h, amb):
    a = 1
    while 3 * a * a <= bound:
        for b in range(-a + 1, a + 1):
            cmax = (bound + b * b) // (4 * a)
            if cmax < a:
                continue
            c = np.arange(a, cmax + 1, dtype=np.int64)
            keep = np.gcd(math.gcd(a, b), c) == 1
            if b < 0:
                keep[0] = False
            n = 4 * a * c[keep] - b * b
            # every (a, b) pair hits each n at most once, so plain fancy-index adds are safe
            h[n] += 1
            if b == 0 or b == a:
                amb[n] += 1
            elif keep[0]:
                amb[4 * a * a - b * b] += 1
        a += 1


def form_counts(bound: int, use_numba: bool | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Count reduced primitive forms of every discriminant down to -bound.

    Returns ``(h, amb)`` indexed by ``|disc|``: ``h[n]`` is the number of
    reduced forms of discriminant ``-n`` and ``amb[n]`` how many of them are
    ambiguous.  Entries for ``n`` not congruent to 0 or 3 mod 4 stay zero.
    """
    if bound < 0:
        raise ValueError("bound must be non-negative")
    h = np.zeros(bound + 1, dtype=np.int64)
    amb = np.zeros(bound + 1, dtype=np.int64)
    if use_numba is None:
        use_numba = USE_NUMBA
    if use_numba:
        if njit is None:
            raise RuntimeError("numba is not installed")
        _form_counts_numba(np.int64(bound), h, amb)
    else:
        _form_counts_numpy(bound, h, amb)
    return h, amb
