"""Hot kernels, compiled when available.

The Cython extension ``mac_sim._kernels`` is used if it imports; otherwise
the numpy fallback in ``mac_sim._pykernels`` is selected.  Setting
``MAC_SIM_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("MAC_SIM_PURE_PYTHON"):
    try:
        from . import _kernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

pfaffian = _impl.pfaffian
pfaffian_stack = _impl.pfaffian_stack
anneal_qfi = _impl.anneal_qfi
measure_vertex_inplace = _impl.measure_vertex_inplace
distance_profile = _impl.distance_profile
