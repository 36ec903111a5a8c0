"""Execution backend selection: numba-compiled kernels or interpreted fallback.

The hot kernels in :mod:`dynmaxflow.kernels` are written as plain Python
functions over flat NumPy arrays. By default they are compiled with numba
(``nopython``, ``nogil``) so that worker threads run them concurrently
without the GIL, and the atomic helpers below compile down to single
LLVM ``atomicrmw`` instructions. Setting ``DYNMAXFLOW_DISABLE_NUMBA=1``
(or installing without numba) selects the interpreted path instead: the
same kernel source runs under CPython and the atomic helpers degrade to
ordinary reads/writes. The interpreted path is single-threaded (plain
``arr[i] += d`` is not atomic), so solvers clamp the worker count to 1
when it is active.
"""

import os

DISABLE_ENV_VAR = "DYNMAXFLOW_DISABLE_NUMBA"


def _disabled_by_env() -> bool:
    return os.environ.get(DISABLE_ENV_VAR, "").strip().lower() in {"1", "true", "yes", "on"}


NUMBA_ENABLED = False
if not _disabled_by_env():
    try:
        from numba import njit as _njit
        from numba import types as _types
        from numba.core import cgutils as _cgutils
        from numba.extending import intrinsic as _intrinsic

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False


if NUMBA_ENABLED:

    def _rmw_intrinsic(op):
        @_intrinsic
        def rmw(typingctx, arr, idx, val):
            if not isinstance(arr, _types.Array) or not isinstance(idx, _types.Integer):
                return None
            sig = arr.dtype(arr, idx, arr.dtype)

            def codegen(context, builder, signature, args):
                arr_v, idx_v, val_v = args
                aryty = signature.args[0]
                ary = context.make_array(aryty)(context, builder, arr_v)
                ptr = _cgutils.get_item_pointer(
                    context, builder, aryty, ary, [idx_v],
                    wraparound=False, boundscheck=False,
                )
                return builder.atomic_rmw(op, ptr, val_v, "monotonic")

            return sig, codegen

        return rmw

    #: atomic fetch-and-add on arr[idx]; returns the previous value
    atomic_add = _rmw_intrinsic("add")
    #: atomic exchange of arr[idx] with val; returns the previous value
    atomic_exchange = _rmw_intrinsic("xchg")

    def jit_kernel(fn):
        return _njit(cache=True, nogil=True)(fn)

    def backend_name() -> str:
        return "numba"

else:

    def atomic_add(arr, idx, val):
        old = arr[idx]
        arr[idx] = old + val
        return old

    def atomic_exchange(arr, idx, val):
        old = arr[idx]
        arr[idx] = val
        return old

    def jit_kernel(fn):
        return fn

    def backend_name() -> str:
        return "python"
