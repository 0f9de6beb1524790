"""Builds the optional Cython kernel for the clustering hot loop.

The package works without the extension: strata.cluster.kernels falls back
to a numpy implementation when strata.cluster._core is missing, so the
extension is marked optional and a failed compile does not fail the install.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "strata.cluster._core",
                ["src/strata/cluster/_core.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
