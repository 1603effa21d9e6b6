"""Dense Hermitian eigenvalues: LAPACK by default, cyclic Jacobi rotations on request."""

from __future__ import annotations

import math

import numpy as np
from loguru import logger
from scipy import linalg

from sflab.config import settings


def realify(h: np.ndarray) -> np.ndarray:
    """Real symmetric embedding [[Re, −Im], [Im, Re]]; each eigenvalue of h appears twice."""
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def off_norm(a: np.ndarray) -> float:
    return math.sqrt(max(float(np.sum(a * a) - np.sum(np.diag(a) ** 2)), 0.0))


def jacobi_symmetric(a: np.ndarray, tol: float = 1e-13, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a real symmetric matrix by cyclic Jacobi sweeps, ascending."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    scale = max(1.0, float(np.linalg.norm(a)))
    for sweep in range(max_sweeps):
        if off_norm(a) < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
    else:
        logger.warning("jacobi: off-diagonal norm {:.2e} after {} sweeps", off_norm(a), max_sweeps)
    return np.sort(np.diag(a))


def jacobi_eigvalsh(h: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    h = np.asarray(h)
    if np.iscomplexobj(h) and np.any(h.imag != 0):
        return jacobi_symmetric(realify(h), tol)[::2]
    return jacobi_symmetric(h.real, tol)


def eigvalsh(h: np.ndarray, method: str | None = None) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix."""
    method = method or settings.eigensolver
    if method == "jacobi":
        return jacobi_eigvalsh(h)
    if method == "lapack":
        return linalg.eigvalsh(h)
    raise ValueError(f"unknown eigensolver {method!r}")
