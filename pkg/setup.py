"""Build hook for the optional C scan kernel.

The package is fully functional without the extension (a pure-Python
fallback is selected at import time); the extension only accelerates the
brute-force stage-search loop used by the unlinkability games. If Cython
or a C toolchain is missing the build degrades to pure Python instead of
failing.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "liquidledger._scan",
                ["src/liquidledger/_scan.pyx"],
                libraries=["crypto"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
