import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the compiled kernels if possible; fall back to pure numpy."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:  # compiler missing, etc.
            print(f"warning: compiled kernels not built ({exc}); "
                  "using the numpy fallback")

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            print(f"warning: {ext.name} not built ({exc}); "
                  "using the numpy fallback")


extensions = [
    Extension(
        "mcflow._core",
        ["src/mcflow/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
]

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(extensions, compiler_directives={"language_level": "3"})
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
