"""Build script: compiles the Cython time-stepping kernel.

The extension is optional.  If compilation fails (no compiler, no Cython),
the package installs anyway and falls back to the pure-numpy kernels in
``quditswap._kernels._reference`` at import time.
"""

import sys

import numpy as np
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/quditswap/_kernels/_core.pyx",
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"quditswap: skipping compiled kernel ({exc})", file=sys.stderr)
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[np.get_include()],
)
