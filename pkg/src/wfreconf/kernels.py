"""Backend selection for the history enumeration kernel.

The compiled extension is used when it was built; setting
``WFRECONF_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _histkern_py

if os.environ.get("WFRECONF_PURE_PYTHON") == "1":
    _impl = _histkern_py
    BACKEND = "python"
else:
    try:
        from . import _histkern as _impl

        BACKEND = "compiled"
    except ImportError:
        _impl = _histkern_py
        BACKEND = "python"

consistent_subsets = _impl.consistent_subsets
