# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled candidate scoring for the stabilization search."""

import numpy as np

from libc.math cimport sqrt, INFINITY, isfinite
from libc.stdlib cimport malloc, free
from scipy.linalg.cython_lapack cimport dsyev


def score_extensions(double[:, ::1] C, double[::1] b, double tt,
                     double[:, ::1] alphas, double[::1] taus):
    """Same contract as ``_fallback.score_extensions``."""
    cdef int r = C.shape[0]
    cdef Py_ssize_t m = alphas.shape[0]
    cdef Py_ssize_t k
    cdef int i, j, info = 0
    cdef int lwork = 3 * r if r > 1 else 2
    cdef double den, tau, ynorm, lmax, acc
    cdef char jobz = b'N'
    cdef char uplo = b'L'
    out = np.empty(m)
    cdef double[::1] res = out
    cdef double *u = <double *> malloc(r * sizeof(double))
    cdef double *D = <double *> malloc(r * r * sizeof(double))
    cdef double *rhs = <double *> malloc(r * sizeof(double))
    cdef double *w = <double *> malloc(r * sizeof(double))
    cdef double *work = <double *> malloc(lwork * sizeof(double))
    if u == NULL or D == NULL or rhs == NULL or w == NULL or work == NULL:
        free(u); free(D); free(rhs); free(w); free(work)
        raise MemoryError()
    try:
        for k in range(m):
            tau = taus[k]
            den = 1.0
            for i in range(r):
                acc = 0.0
                for j in range(r):
                    acc += C[i, j] * alphas[k, j]
                u[i] = acc
                den += alphas[k, i] * acc
            if not den > 1e-300:
                res[k] = INFINITY
                continue
            for i in range(r):
                rhs[i] = b[i] + alphas[k, i] * tau
                for j in range(r):
                    D[i * r + j] = C[i, j] - u[i] * u[j] / den
            ynorm = 0.0
            for i in range(r):
                acc = 0.0
                for j in range(r):
                    acc += D[i * r + j] * rhs[j]
                ynorm += acc * acc
            ynorm = sqrt(ynorm)
            # dsyev overwrites D; it is not needed afterwards.
            dsyev(&jobz, &uplo, &r, D, &r, w, work, &lwork, &info)
            lmax = w[r - 1]
            if info != 0 or ynorm == 0.0 or not lmax > 0.0:
                res[k] = INFINITY
                continue
            res[k] = sqrt(lmax) * sqrt(tt + tau * tau) / ynorm
            if not isfinite(res[k]):
                res[k] = INFINITY
    finally:
        free(u); free(D); free(rhs); free(w); free(work)
    return out
