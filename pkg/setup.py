import os

from setuptools import Extension, setup

import numpy as np

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


def extensions():
    if cythonize is None or os.environ.get("BODYWHEEL_NO_NATIVE"):
        return []
    ext = Extension(
        "bodywheel.kernels._native",
        ["src/bodywheel/kernels/_native.pyx"],
        include_dirs=[np.get_include()],
        # -ffp-contract=off: the pure-Python fallback must produce bit-identical
        # doubles, so FMA contraction is disabled.
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions())
