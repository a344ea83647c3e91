"""Build script.  The compiled kernel is optional: if Cython or a C
compiler is unavailable the package installs pure-Python and selects the
numpy fallback at import time."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("KNOTGC_NO_EXT") != "1" and os.path.exists(
    "src/knotgc/_kernels/_speedups.pyx"
):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "knotgc._kernels._speedups",
                    ["src/knotgc/_kernels/_speedups.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3", "-fopenmp"],
                    extra_link_args=["-fopenmp"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
