import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "spinphonon._rk4_cy",
                ["src/spinphonon/_rk4_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-ffast-math"],
            )
        ],
        language_level=3,
    )
)
