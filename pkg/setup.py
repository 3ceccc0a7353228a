"""Build script; the compiled kernels are optional.

`pip install .` works without a compiler or Cython (the package falls back
to pure-Python kernels at import).  To get the fast path:

    python setup.py build_ext --inplace
"""
from setuptools import Extension, setup

extensions = []
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "subquest._fastpath",
                ["src/subquest/_fastpath.pyx"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    pass

setup(ext_modules=extensions)
