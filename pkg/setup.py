"""Builds the optional compiled tape evaluator.

The package works without it; a missing compiler or Cython only costs speed.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("FLATD2_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "flatd2.symexpr._tape",
                    ["src/flatd2/symexpr/_tape.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": 3},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
