"""Edit-distance and LCS kernels, compiled when available.

`python setup.py build_ext --inplace` builds the Cython extension; without it
the pure-Python twin is used.  `BACKEND` reports which one is active.
"""

try:
    from ._fastpath import BACKEND, lcs_pairs, levenshtein  # noqa: F401
except ImportError:  # pragma: no cover - depends on build environment
    from ._fastpath_py import BACKEND, lcs_pairs, levenshtein  # noqa: F401

__all__ = ["levenshtein", "lcs_pairs", "BACKEND"]
