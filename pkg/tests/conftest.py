"""Pin numeric libraries to one thread before numpy loads.

The scalability acceptance test measures single-core selection time, so
BLAS and OpenMP pools must not quietly parallelize the matrix work.
"""
import os

os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
