from setuptools import Extension, setup


def get_extensions():
    """Compiled kernels; an empty list leaves the numpy fallback in charge."""
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        print("WARNING: Cython/numpy not available, using pure-Python kernels.")
        return []

    extensions = [
        Extension(
            "pow2digits._kernels",
            sources=["src/pow2digits/_kernels.pyx"],
            include_dirs=[np.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            # keep a*b+c as two roundings so both backends agree bit for bit
            extra_compile_args=["-O3", "-ffp-contract=off"],
        )
    ]
    return cythonize(extensions, compiler_directives={"language_level": "3"})


setup(ext_modules=get_extensions())
