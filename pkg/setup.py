"""Build script: compiles the filter-bank kernel extension when Cython is
available; the package falls back to the numpy kernels otherwise.
Set WAVELETON_NO_EXT=1 to skip the extension entirely."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("WAVELETON_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "waveleton._kernels._dwt_cy",
                    ["src/waveleton/_kernels/_dwt_cy.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
