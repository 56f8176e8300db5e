# Builds the compiled integrator core. The package works without it (the
# pure-numpy kernel is selected at import), so a failed build is non-fatal
# when SRCONJ_SKIP_EXT=1 is set.
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("SRCONJ_SKIP_EXT") != "1":
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "srconj.kernel._core",
                ["src/srconj/kernel/_core.pyx"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
