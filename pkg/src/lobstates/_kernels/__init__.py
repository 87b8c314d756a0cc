"""Kernel backend selection.

The compiled extension (``_native``, Cython) is preferred; the numpy
fallback is used when the extension is missing or when the environment
variable ``LOBSTATES_PURE_PYTHON`` is set to a non-empty value. Both
backends implement identical contracts and are parity-tested.
"""

import os

if os.environ.get("LOBSTATES_PURE_PYTHON"):
    from . import _fallback as _impl

    BACKEND = "python"
else:
    try:
        from . import _native as _impl  # type: ignore[no-redef]

        BACKEND = "native"
    except ImportError:
        from . import _fallback as _impl  # type: ignore[no-redef]

        BACKEND = "python"

fourier_coeffs = _impl.fourier_coeffs
likelihood_single = _impl.likelihood_single
likelihood_batch = _impl.likelihood_batch

__all__ = ["BACKEND", "fourier_coeffs", "likelihood_single", "likelihood_batch"]
