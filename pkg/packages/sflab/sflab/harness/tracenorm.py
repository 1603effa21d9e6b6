"""Trace-norm inequality |B·F|_tr ≤ tr(B)·|F|_op for positive semidefinite B."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from sflab.errors import NotPSDError


@dataclass(frozen=True)
class TraceNormCheck:
    lhs: float
    rhs: float
    equality: bool
    isometry: bool | None
    """True when B > 0, equality holds and F/|F|_op is an isometry; None when B is singular."""

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs * (1 + 1e-12) + 1e-12


def trace_norm_check(b: np.ndarray, f: np.ndarray, tol: float = 1e-10) -> TraceNormCheck:
    b, f = np.asarray(b), np.asarray(f)
    if b.shape != f.shape or b.shape[0] != b.shape[1]:
        raise ValueError(f"B and F must be square of equal size, got {b.shape} and {f.shape}")
    if np.max(np.abs(b - b.conj().T)) > tol:
        raise NotPSDError("B is not symmetric")
    spectrum = linalg.eigvalsh(b)
    if spectrum[0] < -tol:
        raise NotPSDError(f"B has negative eigenvalue {spectrum[0]:.3e}")
    lhs = float(linalg.svd(b @ f, compute_uv=False, lapack_driver="gesvd").sum())
    singular = linalg.svd(f, compute_uv=False, lapack_driver="gesvd")
    rhs = float(np.trace(b).real * singular[0])
    equality = abs(lhs - rhs) <= tol * max(1.0, rhs)
    isometry = None
    if spectrum[0] > tol:
        isometry = bool(equality and np.ptp(singular) <= tol * max(1.0, singular[0]))
    return TraceNormCheck(lhs, rhs, equality, isometry)
