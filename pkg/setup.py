"""Build script for the optional compiled kernel.

The package works without the extension (a numpy fallback is selected at
import time), so compilation failures should not block installation.  Set
PCODELAY_PURE_BUILD=1 to skip the extension entirely.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("PCODELAY_PURE_BUILD") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/pcodelay/_speedups.pyx"],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
