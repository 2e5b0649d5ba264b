import sys

from setuptools import Extension, setup

# The compiled kernels are an optional speedup; the package falls back to
# the pure-Python twin in fleetplan._kernels_py when the extension is absent.
ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("fleetplan._kernels", ["src/fleetplan/_kernels.pyx"])],
        language_level=3,
    )
except ImportError:
    print("Cython not available; installing without compiled kernels", file=sys.stderr)

setup(ext_modules=ext_modules)
