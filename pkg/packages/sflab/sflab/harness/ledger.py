"""Sign-convention ledger: one global σ fixed by the m = 1 winding scenario."""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from loguru import logger
from pydantic import BaseModel, Field

from sflab.charforms import geometric_side
from sflab.config import settings
from sflab.errors import CalibrationError
from sflab.families import CLIFFORD_CIRCLE
from sflab.harness.scenarios import SPIN_STRUCTURES, ScenarioConfig, build
from sflab.spectralflow import flow

CALIBRATION = ScenarioConfig(scenario="winding", m=1)


class ConventionLedger(BaseModel):
    sigma: Literal[1, -1] = Field(..., description="Global orientation sign applied to −∫Â∧cs")
    spin_structures: dict[str, str] = Field(default_factory=lambda: dict(SPIN_STRUCTURES))
    clifford_circle: str = Field(default=f"{CLIFFORD_CIRCLE.imag:g}j", description="γ(e₁) on S¹")
    calibrated_with: str = CALIBRATION.label
    calibration_sf: int = 0
    calibration_geometric: float = 0.0

    def flipped(self) -> ConventionLedger:
        return self.model_copy(update={"sigma": -self.sigma})

    def save(self, path: Path | None = None) -> Path:
        path = Path(path or settings.ledger_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2), encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Path | None = None) -> ConventionLedger:
        path = Path(path or settings.ledger_path)
        if not path.exists():
            raise CalibrationError(f"no convention ledger at {path}; run `sflab calibrate` first")
        return cls.model_validate_json(path.read_text(encoding="utf-8"))


def calibrate(path: Path | None = None, persist: bool = True) -> ConventionLedger:
    """Run the m = 1 winding scenario and pick σ with sf = σ·(−∫Â∧cs)."""
    setup = build(CALIBRATION)
    sf = flow(setup.dirac).sf
    geometric = geometric_side(setup.twist).real
    if abs(abs(geometric) - 1) > settings.residual_tol:
        raise CalibrationError(f"|−∫Â∧cs| = {abs(geometric):.9f} for the calibration scenario, expected 1")
    sigma = sf * round(geometric)
    if sigma not in (1, -1):
        raise CalibrationError(f"spectral flow {sf} cannot be matched by a sign against {geometric:.6f}")
    ledger = ConventionLedger(sigma=sigma, calibration_sf=sf, calibration_geometric=geometric)
    logger.info("calibrated σ = {} (sf = {}, −∫Â∧cs = {:.9f})", sigma, sf, geometric)
    if persist:
        target = ledger.save(path)
        logger.info("ledger written to {}", target)
    return ledger
