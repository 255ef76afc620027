# Builds the optional compiled RNG core.  If Cython or a C compiler is
# missing the package still works through the pure-numpy fallback picked
# at import time (see gprior/backend.py).
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gprior._rng_cy",
                ["src/gprior/_rng_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O2"],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
