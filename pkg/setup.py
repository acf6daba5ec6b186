"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension: spinbath.kernels
falls back to the pure-numpy implementation when spinbath._kernels_c is
missing. The extension only accelerates the two hot inner loops (uniaxial
cluster products and semiclassical window-matrix assembly).
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "spinbath._kernels_c",
                ["src/spinbath/_kernels_c.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    # No Cython available: ship pure python, kernels.py selects the fallback.
    ext_modules = []

setup(ext_modules=ext_modules)
