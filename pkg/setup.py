"""Build script: compiles the optional Cython kernel module.

The package works without the extension (a pure-Python twin of every kernel is
selected at import time), so any failure to compile degrades to a source-only
install instead of aborting.
"""

import sys

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "ordsym._kernels._core",
                ["src/ordsym/_kernels/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O2"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # noqa: BLE001 - degrade to pure-Python install
    print(f"ordsym: skipping compiled kernels ({exc})", file=sys.stderr)

setup(ext_modules=ext_modules)
