"""Builds the optional compiled kernel.

The package works without the extension (a numpy fallback is selected at
import time), so a failed compile only costs speed.  Set WARDSIM_NO_EXT=1
to skip the build entirely.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("WARDSIM_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "wardsim.kernels._speedups",
                    ["src/wardsim/kernels/_speedups.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
