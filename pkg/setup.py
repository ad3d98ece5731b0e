import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("TENBLOCK_SKIP_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "tenblock._speedups",
                    sources=["src/tenblock/_speedups.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level=3,
        )
    except ImportError:
        # No Cython/numpy at build time: install pure-Python only, the
        # package falls back to the numpy kernels at import.
        ext_modules = []

setup(ext_modules=ext_modules)
