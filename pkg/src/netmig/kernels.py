"""Backend selection for the provisioning hot loop.

The compiled ``_ckernels`` extension is used when it was built; otherwise the
numpy implementation in ``_pykernels``. Set ``NETMIG_PURE_PYTHON=1`` to force
the fallback.
"""

import os

from netmig import _pykernels

python_backend = _pykernels

if os.environ.get("NETMIG_PURE_PYTHON"):
    compiled_backend = None
else:
    try:
        from netmig import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

backend = compiled_backend or python_backend
BACKEND = "cython" if compiled_backend is not None else "python"

path_volumes = backend.path_volumes
island_loads = backend.island_loads
load_at = backend.load_at
load_at_batch = backend.load_at_batch
