"""Build script for the optional compiled kernels.

The package works without the extension: ``dirframes.backend`` falls back to
the vectorized numpy kernels when ``dirframes._kernels`` is missing.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/dirframes/_kernels.pyx",
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
