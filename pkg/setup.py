"""Build script for the optional compiled kernels.

The pure-Python fallback in ``secureid._kernels_py`` is always installed;
the Cython extension is skipped when Cython or a compiler is missing.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SECUREID_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "secureid._kernels_c",
                    ["src/secureid/_kernels_c.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
