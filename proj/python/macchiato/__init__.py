"""Consensus fusion of multi-rater binary segmentations.

Thin NumPy-facing wrapper around the compiled extension. Stacks are
arrays of shape (K, dims...) with one to three row-major grid axes.
"""

try:
    from ._macchiato import *  # noqa: F401,F403
    from ._macchiato import __doc__ as _ext_doc  # noqa: F401
except ImportError:  # running against a build tree on PYTHONPATH
    from _macchiato import *  # noqa: F401,F403

__all__ = [
    "method_names",
    "fuse",
    "lmsd",
    "background_sweep",
    "exhaustive_hard",
    "preset_names",
    "make_preset",
    "shannon_entropy",
    "DomainError",
    "GridMismatch",
    "BudgetExceeded",
    "FormatError",
]
