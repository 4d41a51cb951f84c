import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "krflow._kernels._core",
                ["src/krflow/_kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    # The package still works without the extension: krflow._kernels falls
    # back to the numpy backend at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
