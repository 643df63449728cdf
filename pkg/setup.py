"""Build script: compiles the optional Cython walk kernel.

The package is fully functional without the extension (a NumPy fallback is
selected at import time), so any failure here degrades to a pure-Python
install instead of aborting.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "mimo_energy.backend._walk_cy",
                ["src/mimo_energy/backend/_walk_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - depends on the build host
    print(f"mimo-energy: skipping Cython kernel build ({exc}); "
          "the NumPy backend will be used")

setup(ext_modules=ext_modules)
