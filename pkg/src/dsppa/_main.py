"""Console entry point.

Pins BLAS thread pools to one thread before numpy loads so solver
timings reflect the explicit worker pool, not hidden BLAS parallelism.
Library imports of dsppa are unaffected.
"""

import os


def main():
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, "1")
    from dsppa.cli import cli

    cli()


if __name__ == "__main__":
    main()
