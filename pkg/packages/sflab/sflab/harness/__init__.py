"""Scenario registry, sign calibration, end-to-end verification and reports."""

from sflab.harness.ledger import ConventionLedger, calibrate
from sflab.harness.scenarios import SCENARIOS, ScenarioConfig, build, default_suite
from sflab.harness.tracenorm import trace_norm_check
from sflab.harness.verify import ScenarioReport, VerificationReport, verify, verify_all

__all__ = [
    "SCENARIOS",
    "ConventionLedger",
    "ScenarioConfig",
    "ScenarioReport",
    "VerificationReport",
    "build",
    "calibrate",
    "default_suite",
    "trace_norm_check",
    "verify",
    "verify_all",
]
