"""Build script: compiles the hot-loop extension when Cython is available.

The package is fully functional without the extension; revealment.kernels
falls back to the NumPy implementations at import time.  Set
REVEALMENT_PURE_PYTHON=1 to skip the compile step entirely.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("REVEALMENT_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "revealment._core",
                    ["src/revealment/_core.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
