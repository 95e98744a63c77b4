"""Numerical kernels: compiled extension when available, numpy otherwise.

Set ``COCYCLE_LAB_PURE=1`` to force the numpy implementation.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if os.environ.get("COCYCLE_LAB_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend

BACKEND = _impl.BACKEND
chain_products = _impl.chain_products
batch_products = _impl.batch_products
spectral_norms = _impl.spectral_norms
gl_distances = _impl.gl_distances
min_gl_distances = _impl.min_gl_distances
farthest_point_net = _impl.farthest_point_net
sup_ratio_2d = _impl.sup_ratio_2d

__all__ = [
    "BACKEND", "chain_products", "batch_products", "spectral_norms",
    "gl_distances", "min_gl_distances", "farthest_point_net", "sup_ratio_2d",
    "python_backend", "compiled_backend",
]
