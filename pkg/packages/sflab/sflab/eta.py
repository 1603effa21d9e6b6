"""η, h and ξ = (η + h)/2 for discrete spectra."""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal

import mpmath
import numpy as np
from scipy import special

from sflab.config import settings
from sflab.errors import AsymptoticsError

Number = float | Fraction
SpectrumProvider = Callable[[float], np.ndarray]
"""window Λ -> every eigenvalue with |λ| ≤ Λ, repeated by multiplicity"""


@dataclass(frozen=True)
class EtaResult:
    eta: Number
    h: int
    method: Literal["exact-affine", "truncated-extrapolated", "negated"]
    error: float = 0.0
    partial_values: dict[float, float] = field(default_factory=dict)

    @property
    def xi(self) -> Number:
        return (self.eta + self.h) / 2


def xi_affine(offset: Number, multiplicity: int = 1) -> EtaResult:
    """Spectrum {k + c : k ∈ ℤ}, each value with the given multiplicity."""
    frac = offset - math.floor(offset)
    if frac == 0:
        return EtaResult(eta=0 * frac, h=multiplicity, method="exact-affine")
    return EtaResult(eta=multiplicity * (1 - 2 * frac), h=0, method="exact-affine")


def eta_hurwitz(offset: float, dps: int = 30) -> float:
    """Independent oracle: ζ_H(0, {c}) − ζ_H(0, 1 − {c}) by mpmath's continuation."""
    with mpmath.workdps(dps):
        frac = mpmath.mpf(offset) - mpmath.floor(offset)
        if frac == 0:
            return float(mpmath.zeta(0, 1) - mpmath.zeta(0, 1))
        return float(mpmath.zeta(0, frac) - mpmath.zeta(0, 1 - frac))


@dataclass(frozen=True)
class _Tail:
    spacing: float
    start: float
    multiplicity: int
    residual: float

    def hurwitz(self, z: float) -> float:
        return self.multiplicity * self.spacing ** (-z) * float(special.zeta(z, self.start / self.spacing))

    def at_zero(self) -> float:
        return self.multiplicity * (0.5 - self.start / self.spacing)


def _fit_tail(magnitudes: np.ndarray, points: int, cluster_tol: float) -> _Tail:
    """Fit the last distinct values of a sorted sequence to q₀ + ℓ·j and predict the next one."""
    if magnitudes.size == 0:
        raise AsymptoticsError("empty spectral branch; cannot fit an affine tail")
    breaks = np.flatnonzero(np.diff(magnitudes) > cluster_tol) + 1
    groups = np.split(magnitudes, breaks)
    values = np.array([g.mean() for g in groups])
    counts = np.array([g.size for g in groups])
    if values.size < 3:
        raise AsymptoticsError(f"only {values.size} distinct eigenvalues on a branch; need at least 3")
    take = min(points, values.size)
    tail, mult = values[-take:], counts[-take:]
    if np.any(mult != mult[-1]):
        raise AsymptoticsError("eigenvalue multiplicity varies along the tail")
    j = np.arange(take)
    spacing, intercept = np.polyfit(j, tail, 1)
    residual = float(np.max(np.abs(tail - (intercept + spacing * j))))
    if not spacing > 0:
        raise AsymptoticsError(f"non-increasing tail (spacing {spacing:.3g})")
    return _Tail(float(spacing), float(intercept + spacing * take), int(mult[-1]), residual)


def _eta_at_cutoff(
    eigenvalues: np.ndarray, cutoff: float, z_eval: tuple[float, ...], zero_tol: float, fit_points: int, fit_tol: float
) -> tuple[float, int, dict[float, float], float]:
    values = eigenvalues[np.abs(eigenvalues) <= cutoff]
    h = int(np.count_nonzero(np.abs(values) <= zero_tol))
    pos = np.sort(values[values > zero_tol])
    neg = np.sort(-values[values < -zero_tol])
    cluster = max(zero_tol, 1e-9)
    up, down = _fit_tail(pos, fit_points, cluster), _fit_tail(neg, fit_points, cluster)
    residual = max(up.residual, down.residual)
    if residual > fit_tol:
        raise AsymptoticsError(f"tail fit residual {residual:.2e} above {fit_tol:.0e}: spectrum is not affine")
    partial: dict[float, float] = {}
    for z in z_eval:
        head = float(np.sum(pos ** (-z)) - np.sum(neg ** (-z)))
        if z == 1:
            # divergent parts cancel only for matching tails
            if up.multiplicity != down.multiplicity or not math.isclose(up.spacing, down.spacing, rel_tol=1e-6):
                continue
            tail = up.multiplicity / up.spacing * float(
                special.digamma(down.start / down.spacing) - special.digamma(up.start / up.spacing)
            )
        else:
            tail = up.hurwitz(z) - down.hurwitz(z)
        partial[z] = head + tail
    eta = float(pos.size - neg.size) + up.at_zero() - down.at_zero()
    return eta, h, partial, residual


def xi_truncated(
    provider: SpectrumProvider,
    cutoff: float,
    z_eval: tuple[float, ...] = (2.0, 1.5, 1.0),
    *,
    zero_tol: float | None = None,
    fit_points: int = 16,
    fit_tol: float = 1e-6,
) -> EtaResult:
    """η from eigenvalues in [−Λ, Λ] plus Hurwitz tails fitted to the affine asymptotics.

    The error bound compares the extrapolations from Λ and Λ/2, both at z = 0
    and at every point of ``z_eval``.
    """
    tol = settings.zero_tol if zero_tol is None else zero_tol
    eigenvalues = np.asarray(provider(cutoff), dtype=float)
    eta, h, partial, residual = _eta_at_cutoff(eigenvalues, cutoff, z_eval, tol, fit_points, fit_tol)
    eta_half, _, partial_half, _ = _eta_at_cutoff(eigenvalues, cutoff / 2, z_eval, tol, fit_points, fit_tol)
    drift = [abs(eta - eta_half)] + [abs(partial[z] - partial_half[z]) for z in partial if z in partial_half]
    return EtaResult(
        eta=eta, h=h, method="truncated-extrapolated", error=max(*drift, residual), partial_values=partial
    )


def negate(result: EtaResult) -> EtaResult:
    """ξ data of −D from that of D: η ↦ −η, h ↦ h."""
    return EtaResult(eta=-result.eta, h=result.h, method="negated", error=result.error)


def boundary_term(xi_a: EtaResult, xi_neg_b: EtaResult, h_b: int) -> Number:
    """−(ξ(D^a) + ξ(−D^b)) + h(D^b)."""
    return -(xi_a.xi + xi_neg_b.xi) + h_b


def affine_spectrum(offset: float, multiplicity: int = 1) -> SpectrumProvider:
    """Provider for {k + c} with the given multiplicity."""

    def provider(window: float) -> np.ndarray:
        k = np.arange(math.floor(-window - offset) - 1, math.ceil(window - offset) + 2)
        values = k + offset
        return np.repeat(values[np.abs(values) <= window], multiplicity)

    return provider
