"""Build script for the optional compiled neighbor-search kernels.

The package works without the extension (a pure-numpy fallback is selected
at import time); set LOFTUNE_NO_EXT=1 to skip compilation entirely.

-ffp-contract=off keeps the compiler from fusing multiply-adds so that
distances computed by the C kernels are bit-identical to the numpy fallback.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("LOFTUNE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "loftune.knn._kdtree",
                    ["src/loftune/knn/_kdtree.pyx"],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
