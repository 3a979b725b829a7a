import numpy as np
from setuptools import Extension, setup

# The compiled kernel is an optional accelerator; the package falls back to
# the NumPy implementation in cdkit._kernels._reference if the build fails.
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "cdkit._kernels._rk4core",
                ["src/cdkit/_kernels/_rk4core.pyx"],
                include_dirs=[np.get_include()],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
