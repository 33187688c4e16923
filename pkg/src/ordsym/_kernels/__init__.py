"""Kernel dispatch: compiled Cython core with a pure-Python fallback.

The compiled module is used when it imported successfully, the caller has not
forced a backend, and the arguments provably fit signed 64-bit words. Anything
else routes to the reference implementations in ``_py``. Both backends share
one contract, documented in ``_py``.
"""

from . import _py

try:
    from . import _core

    HAVE_COMPILED = True
except ImportError:
    _core = None
    HAVE_COMPILED = False

BACKEND_DEFAULT = "compiled" if HAVE_COMPILED else "python"
_forced = None

# moduli and entries must stay clear of 2^63 after one multiply-accumulate
_WORD_BOUND = 1 << 62


def available_backends():
    return ("compiled", "python") if HAVE_COMPILED else ("python",)


def force_backend(name):
    """Pin the backend ('compiled' or 'python'); None restores auto-routing."""
    global _forced
    if name is not None and name not in available_backends():
        raise ValueError(f"backend {name!r} not available")
    _forced = name


def active_backend():
    return _forced or BACKEND_DEFAULT


def _compiled_ok():
    return HAVE_COMPILED and (_forced or "compiled") == "compiled"


def _max_abs(a):
    best = 0
    for row in a:
        for x in row:
            if x < 0:
                x = -x
            if x > best:
                best = x
    return best


def matmul_mod(a, b, q):
    if not a or not b or not b[0]:
        return [[0] * (len(b[0]) if b else 0) for _ in range(len(a))]
    if _compiled_ok() and q < _WORD_BOUND:
        return _core.matmul_mod(a, b, q)
    return _py.matmul_mod(a, b, q)


def matmul_int(a, b):
    if not a or not b or not b[0]:
        return [[0] * (len(b[0]) if b else 0) for _ in range(len(a))]
    if _compiled_ok():
        bound = _max_abs(a) * _max_abs(b) * len(b) + 1
        if bound < _WORD_BOUND:
            return _core.matmul_int(a, b)
    return _py.matmul_int(a, b)


def int_snf(a, want_u=False, want_v=False, want_vinv=False):
    if not a or not a[0]:
        m = len(a)
        n = len(a[0]) if m else 0
        return (
            [],
            _py._identity(m) if want_u else None,
            _py._identity(n) if want_v else None,
            _py._identity(n) if want_vinv else None,
        )
    if _compiled_ok() and _max_abs(a) < _WORD_BOUND:
        try:
            return _core.int_snf(a, want_u, want_v, want_vinv)
        except OverflowError:
            pass
    return _py.int_snf(a, want_u, want_v, want_vinv)


def local_snf(a, p, k, want_u=False, want_uinv=False, want_v=False, want_vinv=False):
    if not a or not a[0]:
        m = len(a)
        n = len(a[0]) if m else 0
        return (
            [],
            _py._identity(m) if want_u else None,
            _py._identity(m) if want_uinv else None,
            _py._identity(n) if want_v else None,
            _py._identity(n) if want_vinv else None,
        )
    if _compiled_ok() and p ** k < _WORD_BOUND:
        return _core.local_snf(a, p, k, want_u, want_uinv, want_v, want_vinv)
    return _py.local_snf(a, p, k, want_u, want_uinv, want_v, want_vinv)
