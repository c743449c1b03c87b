"""Backend selection for the resampling kernels.

The numba backend is the default; set ``PHISHSIM_NO_NUMBA=1`` to force the
pure-numpy path (it is also chosen automatically when numba is missing or
fails to import). Both backends implement identical arithmetic, so outputs
are byte-for-byte equal either way.
"""

from __future__ import annotations

import os

_DISABLE = os.environ.get("PHISHSIM_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

if _DISABLE:
    from . import _kernels_numpy as _impl
else:
    try:
        from . import _kernels_numba as _impl
    except ImportError:  # pragma: no cover - exercised only without numba
        from . import _kernels_numpy as _impl

BACKEND = _impl.BACKEND_NAME
bilinear_downscale_u8 = _impl.bilinear_downscale_u8
nn_upscale_u8 = _impl.nn_upscale_u8


def warmup() -> None:
    """Trigger JIT compilation (a no-op on the numpy backend)."""
    import numpy as np

    tiny = np.zeros((2, 2, 4), dtype=np.uint8)
    bilinear_downscale_u8(tiny, 1, 1)
    nn_upscale_u8(tiny, 4, 4)
