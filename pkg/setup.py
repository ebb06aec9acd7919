"""Build script for the optional Cython solver core.

The package works without the extension (pure-NumPy fallback is selected at
import time), so a failed extension build is tolerated rather than fatal.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "cfisac._solver_core",
                ["src/cfisac/_solver_core.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
