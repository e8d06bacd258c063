"""Kernel backend selection.

The numerical hot spots (Jacobi eigenvalue sweeps, Cholesky solves and the
active-set QP iteration) exist twice: a numba-compiled version in
``_kernels_nb`` and a pure numpy version in ``_kernels_np``.  Both expose the
same entry points with identical signatures and return conventions, so the
rest of the package calls through ``kernels`` without caring which one is
bound.

The environment variable ``DCA_IQP_BACKEND`` picks the implementation:

* ``auto`` (default): numba when importable, numpy otherwise
* ``numba``: require numba, fail loudly if it is missing
* ``numpy``: force the pure numpy path
"""

import os

_ENV_VAR = "DCA_IQP_BACKEND"

# asqp status codes shared by both kernel modules
ASQP_OPTIMAL = 0
ASQP_ITER_CAP = 1
ASQP_NUMERIC = 2


def _select():
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"{_ENV_VAR} must be one of auto, numba, numpy; got {choice!r}"
        )
    if choice == "numpy":
        from . import _kernels_np

        return _kernels_np, "numpy"
    try:
        from . import _kernels_nb

        return _kernels_nb, "numba"
    except ImportError:
        if choice == "numba":
            raise RuntimeError(
                f"{_ENV_VAR}=numba but the numba package is not importable"
            ) from None
        from . import _kernels_np

        return _kernels_np, "numpy"


kernels, BACKEND = _select()
