"""Select the kernel implementation at import time.

Set ``WAVEMORPH_PURE_PYTHON=1`` to force the numpy fallback.
"""
import os

from . import _pykernels

python_kernels = _pykernels
compiled_kernels = None

if not os.environ.get("WAVEMORPH_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_kernels
    except ImportError:  # extension not built
        compiled_kernels = None

kernels = compiled_kernels if compiled_kernels is not None else python_kernels
BACKEND = "compiled" if compiled_kernels is not None else "python"


def use_backend(name):
    """Switch the active kernels (``"compiled"`` or ``"python"``); returns the previous name."""
    global kernels, BACKEND
    previous = BACKEND
    if name == "compiled":
        if compiled_kernels is None:
            raise RuntimeError("compiled kernels are not available in this build")
        kernels = compiled_kernels
    elif name == "python":
        kernels = python_kernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return previous
