"""End-to-end check of sf(D•) = σ·(−∫Â∧cs(∇•)) + ξ(D^b) − ξ(D^a) per scenario."""

from __future__ import annotations

import math
import time
from typing import Literal

from joblib import Parallel, delayed
from loguru import logger
from pydantic import BaseModel, Field

from sflab.charforms import geometric_side
from sflab.config import settings
from sflab.dirac import DiracFamily, endpoints_isospectral, spectrum
from sflab.errors import IsospectralityError
from sflab.eta import EtaResult, xi_truncated
from sflab.harness.ledger import ConventionLedger
from sflab.harness.scenarios import ScenarioConfig, build
from sflab.spectralflow import crossing_oracle, flow


class ScenarioReport(BaseModel):
    scenario: str
    params: dict
    sf: int = Field(..., description="Spectral side")
    oracle_sf: int
    expected_sf: int
    provenance: str
    geometric: float = Field(..., description="−∫Â∧cs before the σ sign")
    geometric_imag: float
    xi_a: float
    xi_b: float
    xi_path: Literal["cancelled", "computed"]
    sigma: int
    prediction: float = Field(..., description="σ·geometric + ξ(D^b) − ξ(D^a)")
    residual: float = Field(..., description="sf − prediction")
    passed: bool
    runtime_s: dict[str, float]


class VerificationReport(BaseModel):
    sigma: int
    entries: list[ScenarioReport]

    @property
    def all_passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def failures(self) -> list[ScenarioReport]:
        return [e for e in self.entries if not e.passed]


def round_half_away(x: float) -> int:
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


def endpoint_xi(dirac: DiracFamily, s: float, zero_tol: float) -> EtaResult:
    cutoff = dirac.trust_radius
    return xi_truncated(lambda window: spectrum(dirac, s, window).eigenvalues, cutoff, zero_tol=zero_tol)


def verify(config: ScenarioConfig, ledger: ConventionLedger) -> ScenarioReport:
    tol = config.tolerances
    logger.info("verifying {}", config.label)
    timings: dict[str, float] = {}
    setup = build(config)
    dirac = setup.dirac

    started = time.perf_counter()
    sf = flow(dirac, gap_margin=tol.gap_margin, zero_tol=tol.zero).sf
    timings["flow"] = time.perf_counter() - started

    started = time.perf_counter()
    geo = geometric_side(setup.twist, s_samples=config.s_samples)
    timings["geometric"] = time.perf_counter() - started

    started = time.perf_counter()
    a, b = dirac.interval
    if setup.xi_cancels:
        if not endpoints_isospectral(dirac):
            raise IsospectralityError(f"{config.label}: D^a and D^b differ inside the comparison window")
        xi_a = xi_b = 0.0
        xi_path = "cancelled"
    else:
        xi_a = float(endpoint_xi(dirac, a, tol.zero).xi)
        xi_b = float(endpoint_xi(dirac, b, tol.zero).xi)
        xi_path = "computed"
    timings["xi"] = time.perf_counter() - started

    prediction = ledger.sigma * geo.real + xi_b - xi_a
    residual = sf - prediction
    near_integer = abs(prediction - round_half_away(prediction)) < tol.residual
    oracle_sf = crossing_oracle(setup.oracle)
    passed = (
        near_integer
        and round_half_away(prediction) == sf
        and sf == oracle_sf
        and geo.imag_residue < tol.imag
    )
    report = ScenarioReport(
        scenario=config.label,
        params=config.model_dump(exclude={"tolerances"}, exclude_none=True),
        sf=sf,
        oracle_sf=oracle_sf,
        expected_sf=setup.expected_sf,
        provenance=setup.provenance,
        geometric=geo.real,
        geometric_imag=geo.value.imag,
        xi_a=xi_a,
        xi_b=xi_b,
        xi_path=xi_path,
        sigma=ledger.sigma,
        prediction=prediction,
        residual=residual,
        passed=passed,
        runtime_s=timings,
    )
    level = "INFO" if passed else "WARNING"
    logger.log(level, "{}: sf = {}, prediction = {:.9f}, {}", config.label, sf, prediction,
               "ok" if passed else "FAILED")
    return report


def verify_all(
    configs: list[ScenarioConfig], ledger: ConventionLedger, n_jobs: int | None = None
) -> VerificationReport:
    """Run scenarios in parallel; entries come back ordered by scenario label."""
    entries = Parallel(n_jobs=n_jobs or settings.n_jobs)(delayed(verify)(c, ledger) for c in configs)
    return VerificationReport(sigma=ledger.sigma, entries=sorted(entries, key=lambda e: e.scenario))
