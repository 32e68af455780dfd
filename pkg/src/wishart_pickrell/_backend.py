"""Pick the compiled kernels when available, otherwise the numpy ones.

Set ``WISHART_PICKRELL_PURE=1`` to force the pure-Python path.
"""

import os

from . import _kernels_py

if os.environ.get("WISHART_PICKRELL_PURE", "") not in ("", "0"):
    kernels = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels
        BACKEND = "compiled"
    except ImportError:
        kernels = _kernels_py
        BACKEND = "python"

complex_normals = kernels.complex_normals
assemble_samples = kernels.assemble_samples
trace_phases = kernels.trace_phases
