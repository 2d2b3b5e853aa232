"""Kernel dispatch: the compiled extension when built, else pure numpy.

Set ``ORDEREXTEND_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _fallback

BACKEND = "python"
_score = _fallback.score_extensions

if os.environ.get("ORDEREXTEND_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        BACKEND = "cython"
        _score = _kernels.score_extensions


def score_extensions(C, b, tt, alphas, taus):
    alphas = np.ascontiguousarray(np.atleast_2d(alphas), dtype=float)
    return _score(np.ascontiguousarray(C, dtype=float),
                  np.ascontiguousarray(b, dtype=float), float(tt), alphas,
                  np.ascontiguousarray(taus, dtype=float))
