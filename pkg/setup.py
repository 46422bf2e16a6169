import os

from setuptools import Extension, setup

# The compiled kernel is optional: hdperm.kernels falls back to the pure-Python
# twin when the extension is absent. HDPERM_PURE=1 skips the build on purpose.
ext_modules = []
if os.environ.get("HDPERM_PURE") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("hdperm._ckernel", ["src/hdperm/_ckernel.pyx"])],
            language_level=3,
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
