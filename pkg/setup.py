"""Build script: compiles the optional Cython kernel when possible.

The package works without the extension (a pure-Python kernel is selected
at import time), so any failure here degrades gracefully.
"""
from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "elgames._kernel._speedups",
                ["src/elgames/_kernel/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
