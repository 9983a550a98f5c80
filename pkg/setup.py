import numpy as np
from setuptools import Extension, setup

# The compiled kernels are an optimization; the package falls back to the
# pure-Python implementations in qmem._kernels._fallback when the extension
# is unavailable.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "qmem._kernels._core",
                ["src/qmem/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
