"""Build script: compiles the optional route-search kernel if Cython is available.

The package works without the extension; pcnsim.kernels falls back to the
pure-Python implementation at import time.
"""
import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Never fail the install because the accelerator would not compile."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"pcnsim: skipping compiled kernel ({exc}); pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"pcnsim: skipping {ext.name} ({exc}); pure-Python fallback will be used")


ext_modules = []
if not os.environ.get("PCNSIM_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "pcnsim.kernels._pathfind",
                    ["src/pcnsim/kernels/_pathfind.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        print("pcnsim: Cython not available; building without the compiled kernel")

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
