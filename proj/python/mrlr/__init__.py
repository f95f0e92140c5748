"""Multi-resolution low-rank tensor decomposition.

Tensors are numpy arrays; the storage convention is Fortran order (first
index fastest). Mode indices and partition entries are 1-based, matching
the CLI and the on-disk formats.
"""

try:
    from ._mrlr import *  # noqa: F401,F403  (wheel layout)
    from ._mrlr import __doc__ as _doc
except ImportError:  # in-tree builds put _mrlr next to the package on sys.path
    from _mrlr import *  # noqa: F401,F403
    from _mrlr import __doc__ as _doc

__version__ = "0.1.0"
