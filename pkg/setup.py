import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                f"protestdur.{name}",
                [f"src/protestdur/{name}.pyx"],
                include_dirs=[np.get_include()],
                # no FMA contraction: the pure-Python fallback must match bit for bit
                extra_compile_args=["-O2", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                optional=True,
            )
            for name in ("_gibbs", "_split")
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
