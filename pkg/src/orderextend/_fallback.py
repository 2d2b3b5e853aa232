"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""

import numpy as np


def score_extensions(C, b, tt, alphas, taus):
    """Local condition number of ``[A; alpha] y = [t; tau]`` for many ``alpha``.

    ``C = (A^T A)^-1``, ``b = A^T t`` and ``tt = ||t||^2`` describe the base
    system. Each row of ``alphas`` is one candidate extension with surrogate
    target ``taus[k]``. Uses the Sherman-Morrison update of ``C`` and the
    identity ``||D A~^T||_2^2 = lambda_max(D)`` for ``D = (A~^T A~)^-1``.
    Returns ``inf`` where the update breaks down or the solution vanishes.
    """
    C = np.asarray(C, dtype=float)
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    taus = np.asarray(taus, dtype=float)
    if alphas.shape[0] == 0:
        return np.empty(0)
    u = alphas @ C                                   # (m, r); C is symmetric
    den = 1.0 + np.einsum("ij,ij->i", u, alphas)
    ok = den > 1e-300
    den = np.where(ok, den, 1.0)
    D = C[None] - u[:, :, None] * u[:, None, :] / den[:, None, None]
    rhs = b[None] + alphas * taus[:, None]
    y = np.einsum("kij,kj->ki", D, rhs)
    ynorm = np.sqrt(np.einsum("ij,ij->i", y, y))
    lmax = np.linalg.eigvalsh(D)[:, -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sqrt(np.maximum(lmax, 0.0)) * np.sqrt(tt + taus * taus) / ynorm
    out[~ok | (ynorm == 0.0) | ~np.isfinite(out) | (lmax <= 0.0)] = np.inf
    return out
