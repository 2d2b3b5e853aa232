"""Builds the optional compiled kernel; the package works without it."""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ORDEREXTEND_NO_EXT", "") not in ("1", "true", "yes"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("orderextend._kernels", ["src/orderextend/_kernels.pyx"],
                       extra_compile_args=["-O3"], optional=True)],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
