from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the pure-Python kernel takes over
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "gasket.enumeration._kernel",
                ["src/gasket/enumeration/_kernel.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
