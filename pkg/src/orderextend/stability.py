"""Small least-squares systems and their local condition number.

For a system ``A y = t`` with ``A`` of shape ``(k, r)``, ``k >= r``, the local
condition number is ``||A^+||_2 * ||t|| / ||y||`` with ``y`` the
least-squares solution. Unlike the classical condition number it depends on
the target ``t``: it measures how much a relative perturbation of ``t`` can
be amplified in ``y`` for this particular ``t``. It is never below 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .kernels import score_extensions
from .matrix import RANK_TOL


class RankDeficientError(np.linalg.LinAlgError):
    pass


def _singular_values(A: np.ndarray) -> np.ndarray:
    return np.linalg.svd(A, compute_uv=False)


def _full_column_rank(s: np.ndarray, r: int) -> bool:
    return len(s) >= r and r > 0 and s[0] > 0 and s[r - 1] > RANK_TOL * s[0]


def solve_least_squares(A: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``argmin_y ||A y - t||``; raises :class:`RankDeficientError` if ``A`` is singular."""
    A = np.asarray(A, dtype=float)
    t = np.asarray(t, dtype=float)
    k, r = A.shape
    if not _full_column_rank(_singular_values(A), r):
        raise RankDeficientError(f"{k}x{r} system is rank deficient")
    return np.linalg.lstsq(A, t, rcond=None)[0]


def local_condition(A: np.ndarray, t: np.ndarray) -> float:
    """``||A^+|| ||t|| / ||y||``; ``inf`` for a singular ``A`` or zero solution."""
    A = np.asarray(A, dtype=float)
    t = np.asarray(t, dtype=float)
    s = _singular_values(A)
    if not _full_column_rank(s, A.shape[1]):
        return math.inf
    y = np.linalg.lstsq(A, t, rcond=None)[0]
    ynorm = np.linalg.norm(y)
    if ynorm == 0.0:
        return math.inf
    return float(np.linalg.norm(t) / (s[A.shape[1] - 1] * ynorm))


def minimum_norm_condition(A: np.ndarray, t: np.ndarray) -> float:
    """Local condition number generalized to systems with fewer rows than unknowns.

    Uses the minimum-norm solution and the smallest nonzero singular value.
    Rows must be linearly independent, otherwise the result is ``inf``.
    Coincides with :func:`local_condition` when ``A`` is square.
    """
    A = np.asarray(A, dtype=float)
    t = np.asarray(t, dtype=float)
    k = A.shape[0]
    if k == 0:
        return math.inf
    s = _singular_values(A)
    if not _full_column_rank(s, min(A.shape)):
        return math.inf
    y = np.linalg.pinv(A) @ t
    ynorm = np.linalg.norm(y)
    if ynorm == 0.0:
        return math.inf
    return float(np.linalg.norm(t) / (s[min(A.shape) - 1] * ynorm))


def condition_number(A: np.ndarray) -> float:
    """Classical ``sigma_max / sigma_min``; ``inf`` when rank deficient."""
    A = np.asarray(A, dtype=float)
    s = _singular_values(A)
    if not _full_column_rank(s, A.shape[1]):
        return math.inf
    return float(s[0] / s[A.shape[1] - 1])


def sherman_morrison_update(C: np.ndarray, alpha: np.ndarray,
                            tol: float = 1e-300) -> np.ndarray:
    """Inverse of ``C^-1 + alpha^T alpha`` from ``C`` by a rank-one update."""
    C = np.asarray(C, dtype=float)
    alpha = np.asarray(alpha, dtype=float).ravel()
    u = C @ alpha
    den = 1.0 + alpha @ u
    if not den > tol:
        raise ZeroDivisionError(f"Sherman-Morrison denominator {den!r} too small")
    return C - np.outer(u, C.T @ alpha) / den


def extended_local_condition(C: np.ndarray, A: np.ndarray, alpha: np.ndarray,
                             t: np.ndarray, tau: float) -> float:
    """Local condition number of ``[A; alpha] y = [t; tau]`` given ``C = (A^T A)^-1``.

    No fresh inversion: ``D`` comes from the rank-one update of ``C`` and the
    extended solution is ``D A~^T t~``.
    """
    alpha = np.asarray(alpha, dtype=float).ravel()
    D = sherman_morrison_update(C, alpha)
    At = np.vstack([np.asarray(A, dtype=float), alpha])
    tt = np.append(np.asarray(t, dtype=float), tau)
    solver = D @ At.T
    y = solver @ tt
    ynorm = np.linalg.norm(y)
    if ynorm == 0.0:
        return math.inf
    return float(np.linalg.norm(solver, 2) * np.linalg.norm(tt) / ynorm)


def gram_inverse(A: np.ndarray) -> np.ndarray:
    """``(A^T A)^-1`` by a symmetric solve; raises if ``A`` is rank deficient."""
    A = np.asarray(A, dtype=float)
    if not _full_column_rank(_singular_values(A), A.shape[1]):
        raise RankDeficientError("Gram matrix is singular")
    G = A.T @ A
    C = np.linalg.solve(G, np.eye(G.shape[0]))
    return (C + C.T) / 2


@dataclass(frozen=True)
class StabilityVerdict:
    ell: float
    stable: bool


def verdict(A: np.ndarray, t: np.ndarray, theta: float) -> StabilityVerdict:
    ell = local_condition(A, t)
    return StabilityVerdict(ell, is_stable(ell, theta))


def is_stable(ell: float, theta: float) -> bool:
    """Stability test on the local condition number.

    ``theta`` counts decimal digits of tolerated amplification: a system is
    stable when ``log10(ell) < theta``. The local condition number is at least
    1, so a test directly against ``theta = 1`` would reject every system.
    """
    return math.log10(ell) < theta if ell < math.inf else False


def score_candidates(C: np.ndarray, A: np.ndarray, t: np.ndarray,
                     alphas: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """Extended local condition numbers for a batch of candidate rows."""
    A = np.asarray(A, dtype=float)
    t = np.asarray(t, dtype=float)
    return score_extensions(C, A.T @ t, float(t @ t), alphas, taus)


def stabilize(A: np.ndarray, t: np.ndarray, theta: float,
              candidates: Sequence[tuple[int, np.ndarray]],
              surrogate: Callable[[int], float],
              C: Optional[np.ndarray] = None) -> Optional[tuple[int, np.ndarray, float]]:
    """Pick the candidate row that best stabilizes ``A y = t``.

    Each candidate ``(index, alpha)`` is scored by the local condition number
    of the system extended with ``alpha`` and target ``surrogate(index)``.
    Returns ``(index, alpha, score)`` for the minimizer (ties to the lowest
    index) if its score passes the stability test, otherwise ``None``.
    """
    if not candidates:
        return None
    A = np.asarray(A, dtype=float)
    if C is None:
        try:
            C = gram_inverse(A)
        except RankDeficientError:
            return _stabilize_direct(A, t, theta, candidates, surrogate)
    idx = [c[0] for c in candidates]
    alphas = np.array([c[1] for c in candidates], dtype=float)
    taus = np.array([surrogate(i) for i in idx], dtype=float)
    scores = score_candidates(C, A, t, alphas, taus)
    return _select(idx, alphas, scores, theta)


def _stabilize_direct(A, t, theta, candidates, surrogate):
    # Singular base system: no Gram inverse to update, score from scratch.
    idx = [c[0] for c in candidates]
    alphas = np.array([c[1] for c in candidates], dtype=float)
    scores = np.array([
        local_condition(np.vstack([A, a]), np.append(t, surrogate(i)))
        for i, a in zip(idx, alphas)
    ])
    return _select(idx, alphas, scores, theta)


def _select(idx, alphas, scores, theta):
    best = None
    for k in range(len(idx)):
        if best is None or scores[k] < scores[best] or (
                scores[k] == scores[best] and idx[k] < idx[best]):
            best = k
    if best is None or not is_stable(scores[best], theta):
        return None
    return idx[best], alphas[best], float(scores[best])
