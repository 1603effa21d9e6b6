"""Spectral flow by the partition definition, with certified spectral gaps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from loguru import logger

from sflab.config import settings
from sflab.dirac import DiracFamily, spectrum
from sflab.errors import FamilyKindError, InsufficientSamplesError, UncertifiedGapError


@dataclass(frozen=True)
class IntervalCertificate:
    start: float
    stop: float
    level: float
    distance: float
    margin: float
    ranks: tuple[int, int]
    depth: int

    @property
    def contribution(self) -> int:
        return self.ranks[1] - self.ranks[0]


@dataclass(frozen=True)
class FlowResult:
    sf: int
    certificates: tuple[IntervalCertificate, ...] = field(default_factory=tuple)

    @property
    def partition(self) -> list[float]:
        if not self.certificates:
            return []
        return [self.certificates[0].start, *(c.stop for c in self.certificates)]

    @property
    def max_depth(self) -> int:
        return max((c.depth for c in self.certificates), default=0)


def spectral_rank(eigenvalues: np.ndarray, level: float, zero_tol: float) -> int:
    """rank χ_[0, level]: eigenvalues in [−zero_tol, level], so |λ| ≤ zero_tol counts as zero."""
    return int(np.count_nonzero((eigenvalues >= -zero_tol) & (eigenvalues <= level)))


def _nearest_shift(inner: np.ndarray, full: np.ndarray) -> float:
    """Largest distance from a value of ``inner`` to its nearest neighbour in sorted ``full``."""
    if inner.size == 0 or full.size == 0:
        return 0.0
    right = np.clip(np.searchsorted(full, inner), 0, full.size - 1)
    left = np.clip(right - 1, 0, full.size - 1)
    return float(np.max(np.minimum(np.abs(full[right] - inner), np.abs(full[left] - inner))))


def _lipschitz(samples: np.ndarray, spectra: list[np.ndarray], window: float) -> float:
    """Largest slope of the eigenvalue curves between neighbouring samples.

    Eigenvalues inside half the window at one sample are matched to their
    nearest neighbours in the whole window at the other, in both directions,
    so a curve crossing the half-window edge never shifts the pairing.
    """
    slope = 0.0
    for (s0, e0), (s1, e1) in zip(zip(samples, spectra), zip(samples[1:], spectra[1:])):
        inner0, inner1 = e0[np.abs(e0) <= window / 2], e1[np.abs(e1) <= window / 2]
        shift = max(_nearest_shift(inner0, e1), _nearest_shift(inner1, e0))
        slope = max(slope, shift / (s1 - s0))
    return slope


def _distance(spectra: list[np.ndarray], level: float) -> float:
    return min((float(np.min(np.abs(np.abs(e) - level))) for e in spectra if e.size), default=np.inf)


def _candidate_levels(spectra: list[np.ndarray], window: float, zero_tol: float) -> list[float]:
    smallest = [float(np.min(np.abs(e[np.abs(e) > zero_tol]))) for e in spectra if np.any(np.abs(e) > zero_tol)]
    levels: list[float] = []
    if smallest:
        scale = max(smallest)
        levels = [f * scale for f in (0.25, 0.5, 0.75)]
    magnitudes = np.unique(np.concatenate([np.abs(e) for e in spectra] + [np.zeros(1)]))
    magnitudes = magnitudes[magnitudes <= window / 2]
    if magnitudes.size >= 2:
        gaps = np.diff(magnitudes)
        i = int(np.argmax(gaps))
        levels.append(float(magnitudes[i] + gaps[i] / 2))
    else:
        levels.append(window / 4)
    return [lvl for lvl in levels if lvl > zero_tol]


def _certify(
    fam: DiracFamily,
    start: float,
    stop: float,
    depth: int,
    *,
    window: float,
    gap_margin: float,
    zero_tol: float,
    samples: int,
    max_depth: int,
    parallel: Parallel,
) -> list[IntervalCertificate]:
    grid = np.linspace(start, stop, samples)
    spectra = [sl.eigenvalues for sl in parallel(delayed(spectrum)(fam, float(s), window) for s in grid)]
    margin = _lipschitz(grid, spectra, window) * (grid[1] - grid[0]) / 2
    for level in _candidate_levels(spectra, window, zero_tol):
        distance = _distance(spectra, level)
        if distance > gap_margin + margin:
            ranks = (spectral_rank(spectra[0], level, zero_tol), spectral_rank(spectra[-1], level, zero_tol))
            logger.debug(
                "gap on [{:.6f}, {:.6f}]: level {:.4g}, distance {:.3g}, margin {:.3g}", start, stop, level, distance,
                margin,
            )
            return [IntervalCertificate(start, stop, level, distance, margin, ranks, depth)]
    if depth >= max_depth:
        raise UncertifiedGapError(
            f"{fam.name}: no certifiable gap on [{start:.9f}, {stop:.9f}] after {depth} bisections"
        )
    logger.info("bisecting [{:.6f}, {:.6f}] to depth {}", start, stop, depth + 1)
    mid = 0.5 * (start + stop)
    kwargs = dict(
        window=window, gap_margin=gap_margin, zero_tol=zero_tol, samples=samples, max_depth=max_depth,
        parallel=parallel,
    )
    return _certify(fam, start, mid, depth + 1, **kwargs) + _certify(fam, mid, stop, depth + 1, **kwargs)


def flow(
    fam: DiracFamily,
    s_resolution: int | None = None,
    gap_margin: float | None = None,
    *,
    zero_tol: float | None = None,
    max_depth: int | None = None,
    window: float | None = None,
    interval: tuple[float, float] | None = None,
) -> FlowResult:
    """sf = Σ_i rank χ_[0,a_i](D^{s_i}) − rank χ_[0,a_i](D^{s_{i−1}}) over a certified partition."""
    pieces = s_resolution or settings.s_resolution
    if pieces < 1:
        raise InsufficientSamplesError(f"s_resolution must be positive, got {pieces}")
    a, b = interval or fam.interval
    edges = np.linspace(a, b, pieces + 1)
    options = dict(
        window=fam.trust_radius if window is None else window,
        gap_margin=settings.gap_margin if gap_margin is None else gap_margin,
        zero_tol=settings.zero_tol if zero_tol is None else zero_tol,
        samples=settings.interval_samples,
        max_depth=settings.max_bisect_depth if max_depth is None else max_depth,
    )
    certificates: list[IntervalCertificate] = []
    with Parallel(n_jobs=settings.n_jobs, prefer="threads") as parallel:
        for start, stop in zip(edges, edges[1:]):
            certificates += _certify(fam, float(start), float(stop), 0, parallel=parallel, **options)
    sf = sum(c.contribution for c in certificates)
    return FlowResult(sf, tuple(certificates))


def crossing_oracle(fam: DiracFamily, zero_tol: float | None = None) -> int:
    """Branches ending nonnegative minus branches starting nonnegative."""
    if fam.kind != "diagonal":
        raise FamilyKindError(f"crossing_oracle needs a diagonal family, got {fam.kind}")
    tol = settings.zero_tol if zero_tol is None else zero_tol
    a, b = fam.interval
    lo, hi = fam.branches
    k = np.arange(lo, hi + 1)
    start = np.asarray(fam.eigencurve(k, a)) >= -tol
    stop = np.asarray(fam.eigencurve(k, b)) >= -tol
    return int(np.count_nonzero(stop & ~start)) - int(np.count_nonzero(start & ~stop))
