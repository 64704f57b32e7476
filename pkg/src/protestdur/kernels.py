"""Backend selection for the compiled kernels (Gibbs sweeps and tree splits).

The compiled extensions are used when importable. Setting the environment
variable ``PROTESTDUR_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

import os

from . import _gibbs_py, _split_py

try:
    if os.environ.get("PROTESTDUR_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _gibbs as _compiled
    from . import _split as _compiled_split
except ImportError:
    _compiled = _compiled_split = None

if _compiled is not None:
    BACKEND = "cython"
    gibbs_sweep = _compiled.gibbs_sweep
    foldin_doc = _compiled.foldin_doc
    best_split = _compiled_split.best_split
else:
    BACKEND = "python"
    gibbs_sweep = _gibbs_py.gibbs_sweep
    foldin_doc = _gibbs_py.foldin_doc
    best_split = _split_py.best_split

python_gibbs_sweep = _gibbs_py.gibbs_sweep
python_foldin_doc = _gibbs_py.foldin_doc
python_best_split = _split_py.best_split
compiled_gibbs_sweep = getattr(_compiled, "gibbs_sweep", None)
compiled_foldin_doc = getattr(_compiled, "foldin_doc", None)
compiled_best_split = getattr(_compiled_split, "best_split", None)
