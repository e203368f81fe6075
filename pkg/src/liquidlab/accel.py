"""Optional numba acceleration for the hot numeric kernels.

Every performance-critical inner loop in this package exists in two
flavours: a numba ``@njit`` version and a vectorized pure-numpy version.
Which one runs is decided once, at import time:

* ``LIQUIDLAB_NUMBA=0`` (or ``off``/``false``) forces the numpy path.
* Otherwise numba is used when it imports successfully.

``NUMBA_ENABLED`` reports the active path; ``benchmarks/bench_kernels.py``
times both.
"""

import os

_flag = os.environ.get("LIQUIDLAB_NUMBA", "1").strip().lower()
_want_numba = _flag not in ("0", "off", "false", "no")

if _want_numba:
    try:
        from numba import njit

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False
else:
    NUMBA_ENABLED = False

if not NUMBA_ENABLED:

    def njit(*args, **kwargs):
        """Identity decorator standing in for numba.njit."""
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap
