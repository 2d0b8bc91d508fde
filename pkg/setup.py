"""Build the optional compiled kernels; the package falls back to numpy without them."""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "mrlab._kernels",
                ["src/mrlab/_kernels.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3", "-fcx-limited-range"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # build without the extension
    print(f"mrlab: compiled kernels disabled ({exc})", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
