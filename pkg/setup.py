from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # the pure-Python LCS stays in use
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("taintcrawl.taint._lcs", ["src/taintcrawl/taint/_lcs.pyx"],
                   extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
