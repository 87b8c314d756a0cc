"""Build script: compiles the Cython kernel extension when Cython and a C
compiler are available; otherwise installs pure Python (the package falls
back to the numpy kernels at import).
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "lobstates._kernels._native",
                sources=["src/lobstates/_kernels/_native.pyx"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
