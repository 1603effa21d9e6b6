"""sflab command line.

Exit codes: 0 when everything verified, 1 when some scenario failed its
comparison, 2 when a computation refused to produce a result.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from loguru import logger
from pydantic import ValidationError

from sflab.charforms import geometric_side, odd_char_form
from sflab.config import settings
from sflab.cylinder import aps_index
from sflab.dirac import DiracFamily
from sflab.errors import SflabError
from sflab.eta import affine_spectrum, xi_affine, xi_truncated
from sflab.exterior import integrate_top
from sflab.harness.ledger import ConventionLedger, calibrate
from sflab.harness.report import format_report, s_grid, spectrum_rows, write_form_csv, write_json, write_spectrum_csv
from sflab.harness.scenarios import SCENARIOS, ScenarioConfig, build, default_suite
from sflab.harness.verify import endpoint_xi, verify_all
from sflab.spectralflow import flow


def _configure_logging(verbose: bool) -> None:
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else settings.log_level)


def _scenario_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--scenario", choices=sorted(SCENARIOS), help="registered scenario name")
    parser.add_argument("--config", type=Path, help="JSON file with one scenario config or a list of them")
    parser.add_argument("--m", type=int, help="winding number")
    parser.add_argument("--degree", type=int, help="degree of the circle self-map")
    parser.add_argument("--radius", type=float, help="hypersurface circle radius")
    parser.add_argument("--rank", type=int, help="bundle rank for winding-uN")
    parser.add_argument("--wobble", type=float, help="ε in the pullback map dθ + ε sin θ")
    parser.add_argument("--s-stop", type=float, help="end of the parameter interval for winding-partial")
    parser.add_argument("--cutoff", type=int, help="Fourier modes -K..K")


def _configs(args: argparse.Namespace) -> list[ScenarioConfig]:
    if args.config:
        return ScenarioConfig.from_file(args.config)
    if not args.scenario:
        raise SflabError("give --scenario NAME or --config FILE")
    overrides = {
        key: getattr(args, key)
        for key in ("m", "degree", "radius", "rank", "wobble", "s_stop", "cutoff")
        if getattr(args, key) is not None
    }
    return [ScenarioConfig(scenario=args.scenario, **overrides)]


def _single_config(args: argparse.Namespace) -> ScenarioConfig:
    configs = _configs(args)
    if len(configs) != 1:
        raise SflabError(f"this command takes one scenario, the config holds {len(configs)}")
    return configs[0]


def cmd_calibrate(args: argparse.Namespace) -> int:
    ledger = calibrate(args.ledger)
    print(f"σ = {ledger.sigma:+d}  (sf = {ledger.calibration_sf}, −∫Â∧cs = {ledger.calibration_geometric:.9f})")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    ledger = ConventionLedger.load(args.ledger)
    configs = default_suite() if args.all else _configs(args)
    report = verify_all(configs, ledger, args.jobs)
    print(format_report(report))
    if args.json:
        write_json(report, args.json)
    return 0 if report.all_passed else 1


def cmd_flow(args: argparse.Namespace) -> int:
    setup = build(_single_config(args))
    result = flow(setup.dirac, args.s_resolution)
    print(
        f"{setup.dirac.name}: sf = {result.sf}  "
        f"({len(result.certificates)} intervals, bisection depth {result.max_depth})"
    )
    for c in result.certificates:
        print(
            f"  [{c.start:.6f}, {c.stop:.6f}]  level {c.level:.4g}  gap {c.distance:.3g}  "
            f"ranks {c.ranks[0]} → {c.ranks[1]}"
        )
    if args.csv:
        rows = spectrum_rows(setup.dirac, s_grid(setup.dirac, args.samples), args.window or 4.0)
        write_spectrum_csv(rows, args.csv)
    return 0


def cmd_spectrum(args: argparse.Namespace) -> int:
    setup = build(_single_config(args))
    rows = spectrum_rows(setup.dirac, s_grid(setup.dirac, args.samples), args.window or 4.0)
    if args.csv:
        write_spectrum_csv(rows, args.csv)
    else:
        for row in rows:
            print(",".join(f"{v:.9g}" for v in row))
    return 0


def cmd_csform(args: argparse.Namespace) -> int:
    config = _single_config(args)
    setup = build(config)
    cs = odd_char_form(setup.twist, s_samples=config.s_samples)
    integral = integrate_top(cs).value
    geo = geometric_side(setup.twist, s_samples=config.s_samples)
    print(f"∫cs = {integral.real:.12f}  (imag {integral.imag:.2e});  −∫Â∧cs = {geo.real:.12f}")
    if args.csv:
        write_form_csv(cs, args.csv)
    if args.json:
        args.json.write_text(
            json.dumps({"scenario": config.label, "cs_integral": integral.real, "geometric_side": geo.real}, indent=2),
            encoding="utf-8",
        )
    return 0


def cmd_xi(args: argparse.Namespace) -> int:
    if args.offset is not None:
        result = xi_affine(args.offset, args.multiplicity)
        if args.cutoff_window:
            result = xi_truncated(affine_spectrum(args.offset, args.multiplicity), args.cutoff_window)
    else:
        setup = build(_single_config(args))
        a, b = setup.dirac.interval
        result = endpoint_xi(setup.dirac, a if args.at == "a" else b, settings.zero_tol)
    print(
        f"η = {float(result.eta):.12g}  h = {result.h}  ξ = {float(result.xi):.12g}  "
        f"({result.method}, ±{result.error:.1e})"
    )
    return 0


def cmd_aps(args: argparse.Namespace) -> int:
    if args.slope is not None:
        fam = DiracFamily.affine(args.slope, args.offset, tuple(args.interval))
    else:
        fam = build(_single_config(args)).oracle
    result = aps_index(fam)
    print(f"{fam.name} on [{fam.interval[0]:g}, {fam.interval[1]:g}]")
    print(f"  kernel modes    {list(result.kernel_modes)}")
    print(f"  cokernel modes  {list(result.cokernel_modes)}")
    print(f"  ind_APS = {result.ind_aps}  ind_mAPS = {result.ind_maps}  h(D^b) = {result.h_b}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sflab", description="Spectral flow index formula verification")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("calibrate", help="fix the global sign σ from the m = 1 winding scenario")
    p.add_argument("--ledger", type=Path, help="ledger path (default: settings.ledger_path)")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("verify", help="check the index formula on scenarios")
    _scenario_args(p)
    p.add_argument("--all", action="store_true", help="run the full default suite")
    p.add_argument("--ledger", type=Path)
    p.add_argument("--json", type=Path, help="write the machine-readable report here")
    p.add_argument("--jobs", type=int, help="parallel scenario workers")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("flow", help="spectral flow with its partition certificate")
    _scenario_args(p)
    p.add_argument("--s-resolution", type=int)
    p.add_argument("--csv", type=Path, help="also write eigenvalue curves")
    p.add_argument("--samples", type=int, default=101)
    p.add_argument("--window", type=float)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("spectrum", help="eigenvalue curves over an s-grid as CSV")
    _scenario_args(p)
    p.add_argument("--csv", type=Path)
    p.add_argument("--samples", type=int, default=101)
    p.add_argument("--window", type=float)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("csform", help="odd Chern character form and its integral")
    _scenario_args(p)
    p.add_argument("--csv", type=Path)
    p.add_argument("--json", type=Path)
    p.set_defaults(func=cmd_csform)

    p = sub.add_parser("xi", help="η, h and ξ of an affine spectrum or a scenario endpoint")
    _scenario_args(p)
    p.add_argument("--offset", type=float, help="spectrum {k + offset}")
    p.add_argument("--multiplicity", type=int, default=1)
    p.add_argument("--cutoff-window", type=float, help="use truncated sums up to this cutoff instead")
    p.add_argument("--at", choices=("a", "b"), default="a", help="scenario endpoint")
    p.set_defaults(func=cmd_xi)

    p = sub.add_parser("aps", help="APS and mAPS indices of a diagonal family")
    _scenario_args(p)
    p.add_argument("--slope", type=float, help="affine family k + slope·s + offset")
    p.add_argument("--offset", type=float, default=0.0)
    p.add_argument("--interval", type=float, nargs=2, default=(0.0, 1.0))
    p.set_defaults(func=cmd_aps)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except (SflabError, ValidationError) as exc:
        logger.error("{}: {}", type(exc).__name__, exc)
        return 2


if __name__ == "__main__":
    sys.exit(main())
