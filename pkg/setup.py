import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("EPE_PURE_PYTHON", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "epe._ckernels",
                    ["src/epe/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no FMA contraction: results must match the Python kernels bit for bit
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
