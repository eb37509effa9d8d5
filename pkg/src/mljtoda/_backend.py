"""Select the compiled kernels when importable, else the numpy fallback."""

import os

if os.environ.get("MLJTODA_PURE_PYTHON", "") not in ("", "0"):
    from . import _fallback as kernels
    COMPILED = False
else:
    try:
        from . import _kernels as kernels
        COMPILED = True
    except ImportError:  # extension not built
        from . import _fallback as kernels
        COMPILED = False

NAME = "cython" if COMPILED else "python"
