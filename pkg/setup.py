"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time); the Cython module only accelerates the hot
convolution / state-sweep loops.
"""

from setuptools import Extension, setup

ext = Extension(
    "skellam_stein.kernels._ckernels",
    ["src/skellam_stein/kernels/_ckernels.pyx"],
    extra_compile_args=["-O3"],
)
ext.optional = True  # build failure degrades to the pure-Python backend

try:
    from Cython.Build import cythonize

    ext_modules = cythonize([ext], language_level="3")
except ImportError:
    ext_modules = []

setup(
    ext_modules=ext_modules,
    # Mirrors pyproject so legacy setup.py code paths still see the layout.
    package_dir={"": "src"},
)
