"""Builds the ssmkit extension with pybind11's setuptools helpers.

The extension compiles the full C++ core plus the binding layer, so the
wheel is self-contained (links only against FFTW3 and the C++ runtime).
Install from the repository root with:

    pip install --no-build-isolation .
"""

import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

sources = sorted(glob.glob("src/*.cpp")) + ["python/bindings.cpp"]

ext = Pybind11Extension(
    "ssmkit._core",
    sources,
    include_dirs=["include", "vendor", "/usr/include/eigen3"],
    libraries=["fftw3"],
    cxx_std=20,
)

setup(
    ext_modules=[ext],
    cmdclass={"build_ext": build_ext},
)
