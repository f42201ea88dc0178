"""Build script for the optional compiled kernels.

The extension is optional: if Cython or a C compiler is missing the package
installs without it and ``sgmask.kernels`` falls back to numpy.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SGMASK_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "sgmask._ckernels",
                    ["src/sgmask/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
