"""Build hook for the optional compiled kernels.

``pip install -e . --no-build-isolation`` compiles ``choquard._kernels``
when Cython and a C compiler are available; the package falls back to the
numpy kernels otherwise.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("CHOQUARD_NO_EXT", "") in ("", "0"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "choquard._kernels",
                    ["src/choquard/_kernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
