import os

# thread count for the BLAS backends, the only environment setting honoured
_threads = os.environ.get("BALAX_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(_var, _threads)

from .cli import main  # noqa: E402

raise SystemExit(main())
