"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a plain-Python
fallback is selected at import time); the extension only accelerates the
per-sample hot loops. A failed native build therefore degrades to a
pure-Python install instead of aborting.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, etc.
            print(f"warning: skipping native kernels ({exc}); "
                  "pure-Python fallback will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "pure-Python fallback will be used")


def extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "pulsebench.kernels._native",
                ["src/pulsebench/kernels/_native.pyx"],
                include_dirs=[numpy.get_include()],
                # keep results bit-identical to the Python fallback: no FMA
                # contraction in the filter recurrence
                extra_compile_args=["-ffp-contract=off"],
            )
        ],
        language_level="3",
    )


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
