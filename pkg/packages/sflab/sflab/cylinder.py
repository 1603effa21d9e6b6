"""APS and modified-APS indices of ∂_t + D^t on M × [a, b] for diagonal families.

Each branch k decouples into the ODE u′ + λ_k(t)u = 0 with the single solution
line u = C·exp(−∫λ_k). The APS condition kills the nonnegative part at t = a
and the nonpositive part at t = b; the modified condition only kills the
strictly negative part at t = b.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sflab.config import settings
from sflab.dirac import DiracFamily
from sflab.errors import FamilyKindError


@dataclass(frozen=True)
class ApsIndexResult:
    kernel_modes: tuple[int, ...]
    cokernel_modes: tuple[int, ...]
    maps_kernel_modes: tuple[int, ...]
    maps_cokernel_modes: tuple[int, ...]
    h_a: int
    h_b: int

    @property
    def ind_aps(self) -> int:
        return len(self.kernel_modes) - len(self.cokernel_modes)

    @property
    def ind_maps(self) -> int:
        return len(self.maps_kernel_modes) - len(self.maps_cokernel_modes)


def aps_index(fam: DiracFamily, zero_tol: float | None = None) -> ApsIndexResult:
    if fam.kind != "diagonal":
        raise FamilyKindError(f"aps_index needs a diagonal family, got {fam.kind}")
    tol = settings.zero_tol if zero_tol is None else zero_tol
    a, b = fam.interval
    lo, hi = fam.branches
    k = np.arange(lo, hi + 1)
    la = np.asarray(fam.eigencurve(k, a), dtype=float)
    lb = np.asarray(fam.eigencurve(k, b), dtype=float)
    neg_a, zero_a = la < -tol, np.abs(la) <= tol
    neg_b, zero_b, pos_b = lb < -tol, np.abs(lb) <= tol, lb > tol

    def modes(mask: np.ndarray) -> tuple[int, ...]:
        return tuple(int(i) for i in k[mask])

    return ApsIndexResult(
        kernel_modes=modes(neg_a & pos_b),
        cokernel_modes=modes(~neg_a & (neg_b | zero_b)),
        maps_kernel_modes=modes(neg_a & (pos_b | zero_b)),
        maps_cokernel_modes=modes(~neg_a & neg_b),
        h_a=int(np.count_nonzero(zero_a)),
        h_b=int(np.count_nonzero(zero_b)),
    )
