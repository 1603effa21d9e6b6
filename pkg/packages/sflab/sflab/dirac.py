"""Spectra of twisted Dirac operator families on the circle.

Two kinds of family are supported. ``fourier-circle`` assembles
D^s = −i(d/dθ + ω^s(∂θ)) in a truncated Fourier basis e^{i(n+ν)θ} (ν = 0 for
the trivial spin structure, ν = ½ for the bounding one) and diagonalizes it.
``diagonal`` evaluates prescribed eigenvalue branches λ_k(s) directly.
"""

from __future__ import annotations

import math
from collections.abc import Callable
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np
from scipy import fft as sfft

from sflab.config import settings
from sflab.connections import ConnectionFamily, Smoothing
from sflab.eigensolver import eigvalsh
from sflab.errors import (
    AmbiguousKernelError,
    ChartMismatchError,
    FamilyKindError,
    HermiticityError,
    ParameterRangeError,
    TrustRegionError,
)

Eigencurve = Callable[[np.ndarray, float], np.ndarray]
SpinStructure = Literal["trivial", "bounding"]

_RANGE_SLACK = 1e-12


@dataclass(frozen=True)
class SpectrumSlice:
    s: float
    eigenvalues: np.ndarray
    window: float
    cutoff: int
    rank: int

    def distinct(self, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
        """Eigenvalues with multiplicities, clustering values closer than ``tol``."""
        if self.eigenvalues.size == 0:
            return self.eigenvalues, np.zeros(0, dtype=int)
        breaks = np.flatnonzero(np.diff(self.eigenvalues) > tol) + 1
        groups = np.split(self.eigenvalues, breaks)
        return np.array([g.mean() for g in groups]), np.array([g.size for g in groups])


@dataclass(frozen=True)
class DiracFamily:
    kind: Literal["fourier-circle", "diagonal"]
    interval: tuple[float, float]
    twist: ConnectionFamily | None = None
    cutoff: int = 64
    spin: SpinStructure = "trivial"
    radius: float = 1.0
    eigencurve: Eigencurve | None = None
    branches: tuple[int, int] = (-64, 64)
    name: str = ""

    @classmethod
    def fourier_circle(
        cls,
        twist: ConnectionFamily,
        cutoff: int | None = None,
        spin: SpinStructure = "trivial",
        radius: float = 1.0,
    ) -> DiracFamily:
        chart = twist.chart
        if chart.dim != 1 or not chart.axes[0].periodic:
            raise ChartMismatchError("a circle Dirac operator needs a one-dimensional periodic twist chart")
        return cls(
            kind="fourier-circle",
            interval=twist.interval,
            twist=twist,
            cutoff=cutoff or settings.cutoff,
            spin=spin,
            radius=radius,
            name=f"D[{twist.name}]",
        )

    @classmethod
    def diagonal(
        cls,
        eigencurve: Eigencurve,
        interval: tuple[float, float],
        branches: tuple[int, int] = (-64, 64),
        name: str = "diagonal",
    ) -> DiracFamily:
        return cls(kind="diagonal", interval=interval, eigencurve=eigencurve, branches=branches, name=name)

    @classmethod
    def affine(
        cls,
        slope: float,
        offset: float | np.ndarray = 0.0,
        interval: tuple[float, float] = (0.0, 1.0),
        branches: tuple[int, int] = (-64, 64),
    ) -> DiracFamily:
        """λ_k(s) = k + slope·s + offset_k; ``offset`` is a scalar or one value per branch."""
        lo, hi = branches
        offsets = np.broadcast_to(np.asarray(offset, dtype=float), (hi - lo + 1,))

        def curve(k: np.ndarray, s: float) -> np.ndarray:
            return k + slope * s + offsets[k - lo]

        return cls.diagonal(curve, interval, branches, name=f"affine(c={slope:g})")

    @property
    def rank(self) -> int:
        return self.twist.rank if self.twist is not None else 1

    @property
    def shift(self) -> float:
        return 0.5 if self.spin == "bounding" else 0.0

    @property
    def trust_radius(self) -> float:
        if self.kind == "fourier-circle":
            length = self.twist.chart.axes[0].length
            return (self.cutoff / 2) * (2 * math.pi / length) / self.radius
        lo, hi = self.branches
        return (hi - lo) / 4

    def check_parameter(self, s: float) -> None:
        a, b = self.interval
        if s < a - _RANGE_SLACK or s > b + _RANGE_SLACK:
            raise ParameterRangeError(f"s = {s} outside [{a}, {b}]")

    def reparametrize(self, smoothing: Smoothing) -> DiracFamily:
        """The family t ↦ D^{φ(t)}."""
        if self.kind == "fourier-circle":
            return replace(self, twist=self.twist.reparametrize(smoothing), interval=smoothing.interval)
        curve, phi = self.eigencurve, smoothing.fn
        return replace(
            self,
            eigencurve=lambda k, t: curve(k, float(phi(t))),
            interval=smoothing.interval,
            name=f"{self.name}∘{smoothing.name}",
        )

    def reversed(self) -> DiracFamily:
        """The family s ↦ D^{a+b−s}."""
        a, b = self.interval
        return self.reparametrize(Smoothing((a, b), lambda t: a + b - t, lambda t: -1.0, "reverse"))

    def matrix(self, s: float) -> np.ndarray:
        """Hermitian (2K+1)N × (2K+1)N Fourier matrix of D^s."""
        if self.kind != "fourier-circle":
            raise FamilyKindError(f"{self.name} has no matrix; it is a {self.kind} family")
        self.check_parameter(s)
        axis = self.twist.chart.axes[0]
        coeffs = self.twist.omega_at(s).one_form_coefficients()[:, 0]
        hermitian_twist = -1j * coeffs
        fourier = sfft.fft(hermitian_twist, axis=0) / axis.count
        k, n = self.cutoff, self.rank
        modes = np.arange(-k, k + 1)
        diff = (modes[:, None] - modes[None, :]) % axis.count
        blocks = fourier[diff]
        size = modes.size * n
        mat = blocks.transpose(0, 2, 1, 3).reshape(size, size)
        frequencies = 2 * math.pi * (modes + self.shift) / axis.length
        mat = mat + np.diag(np.repeat(frequencies, n))
        mat = mat / self.radius
        defect = float(np.max(np.abs(mat - mat.conj().T)))
        if defect > 1e-12 * max(1.0, float(np.max(np.abs(mat)))):
            raise HermiticityError(f"{self.name} at s = {s}: ‖A − A†‖∞ = {defect:.2e}")
        return 0.5 * (mat + mat.conj().T)


def spectrum(fam: DiracFamily, s: float, window: float | None = None) -> SpectrumSlice:
    """Sorted eigenvalues of D^s inside [−Λ, Λ]."""
    fam.check_parameter(s)
    lam = fam.trust_radius if window is None else window
    if lam > fam.trust_radius * (1 + 1e-12):
        raise TrustRegionError(f"window {lam} exceeds the trust radius {fam.trust_radius} of {fam.name}")
    if fam.kind == "fourier-circle":
        values = eigvalsh(fam.matrix(s))
    else:
        lo, hi = fam.branches
        values = np.sort(np.asarray(fam.eigencurve(np.arange(lo, hi + 1), s), dtype=float))
    inside = values[np.abs(values) <= lam]
    return SpectrumSlice(s, inside, lam, fam.cutoff, fam.rank)


def kernel_dim(fam: DiracFamily, s: float, zero_tol: float | None = None) -> int:
    """Number of eigenvalues with |λ| ≤ zero_tol; refuses when some |λ| lies in (zero_tol, 2·zero_tol]."""
    tol = settings.zero_tol if zero_tol is None else zero_tol
    values = np.abs(spectrum(fam, s, min(1.0, fam.trust_radius)).eigenvalues)
    ambiguous = values[(values > tol) & (values <= 2 * tol)]
    if ambiguous.size:
        raise AmbiguousKernelError(f"{fam.name} at s = {s}: |λ| = {ambiguous[0]:.3e} is within 2× zero_tol {tol:.0e}")
    return int(np.count_nonzero(values <= tol))


def _half(sl: SpectrumSlice) -> SpectrumSlice:
    half = sl.window / 2
    return replace(sl, eigenvalues=sl.eigenvalues[np.abs(sl.eigenvalues) <= half], window=half)


def _multiplicities_match(inner: SpectrumSlice, full: np.ndarray, tol: float) -> bool:
    values, counts = inner.distinct(tol)
    for value, count in zip(values, counts):
        if np.count_nonzero(np.abs(full - value) <= tol) != count:
            return False
    return True


def endpoints_isospectral(fam: DiracFamily, window: float | None = None, tol: float = 1e-9) -> bool:
    """Compare the spectra of D^a and D^b as multisets.

    Each eigenvalue cluster inside half the window at one end must reappear
    with the same multiplicity, within ``tol``, in the whole window at the other.
    """
    a, b = fam.interval
    lam = fam.trust_radius if window is None else window
    left, right = spectrum(fam, a, lam), spectrum(fam, b, lam)
    return _multiplicities_match(_half(left), right.eigenvalues, tol) and _multiplicities_match(
        _half(right), left.eigenvalues, tol
    )
