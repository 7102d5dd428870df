"""Build script for the optional compiled kernels.

Metadata lives in pyproject.toml. If Cython or a C compiler is missing the
package installs without the extension and uses the NumPy kernels.
"""
from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("modeforge._ckernels", ["src/modeforge/_ckernels.pyx"],
                   include_dirs=[np.get_include()],
                   extra_compile_args=["-O3"],
                   optional=True)],
        compiler_directives={"language_level": "3", "embedsignature": True},
    )

setup(ext_modules=ext_modules)
