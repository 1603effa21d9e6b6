"""Scenario registry: which family, pulled back how, with which Dirac operator."""

from __future__ import annotations

import json
from collections.abc import Callable
from dataclasses import dataclass, replace
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field

from sflab.config import settings
from sflab.connections import ChartMap, ConnectionFamily, pullback
from sflab.dirac import DiracFamily, SpinStructure
from sflab.errors import FamilyKindError, ParameterRangeError
from sflab.exterior import Chart
from sflab.families import build_family
from sflab.spectralflow import crossing_oracle


class Tolerances(BaseModel):
    model_config = ConfigDict(extra="forbid")

    residual: float = Field(default_factory=lambda: settings.residual_tol, gt=0)
    imag: float = Field(default_factory=lambda: settings.imag_tol, gt=0)
    gap_margin: float = Field(default_factory=lambda: settings.gap_margin, gt=0)
    zero: float = Field(default_factory=lambda: settings.zero_tol, gt=0)


class ScenarioConfig(BaseModel):
    """Parameters of one scenario run, as read from a JSON config file."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    scenario: str = Field(..., description="Registered scenario name")
    m: int = Field(default=1, description="Winding number of the pullback map (winding scenarios)")
    degree: int = Field(default=1, description="Degree of the circle self-map (hypersurface scenario)")
    radius: float = Field(default=1.0, gt=0, description="Radius of the hypersurface circle")
    rank: int = Field(default=2, ge=1, description="Rank of the bundle (winding-uN)")
    cutoff: int | None = Field(default=None, ge=4, description="Fourier modes -K..K")
    s_samples: int | None = Field(default=None, ge=3, description="Simpson samples in s")
    grid_nodes: int | None = Field(default=None, ge=8, description="Nodes of the circle chart")
    wobble: float = Field(default=0.0, description="ε in the pullback map dθ + ε sin θ")
    s_stop: float | None = Field(default=None, description="End of the parameter interval (winding-partial)")
    tolerances: Tolerances = Field(default_factory=Tolerances)

    @classmethod
    def from_file(cls, path: Path) -> list[ScenarioConfig]:
        """A file holds one config object or a list of them."""
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        items = data if isinstance(data, list) else [data]
        return [cls.model_validate(item) for item in items]

    @property
    def nodes(self) -> int:
        return self.grid_nodes or settings.grid_nodes

    @property
    def label(self) -> str:
        name = SCENARIOS[self.scenario].describe(self) if self.scenario in SCENARIOS else self.scenario
        return f"{name}, ε={self.wobble:g}" if self.wobble else name


@dataclass(frozen=True)
class ScenarioSetup:
    twist: ConnectionFamily
    dirac: DiracFamily
    oracle: DiracFamily
    expected_sf: int
    provenance: str
    xi_cancels: bool


@dataclass(frozen=True)
class Scenario:
    name: str
    build: Callable[[ScenarioConfig], ScenarioSetup]
    describe: Callable[[ScenarioConfig], str]


def _cover(base: ConnectionFamily, degree: int, wobble: float, source: Chart | None = None) -> ConnectionFamily:
    if degree == 0 and wobble:
        raise ParameterRangeError("a wobbled pullback needs nonzero degree")
    if abs(wobble) >= max(abs(degree), 1):
        raise ParameterRangeError(f"wobble {wobble} would break monotonicity of a degree-{degree} cover")
    f = ChartMap.circle_cover(source or base.chart, base.chart, degree, wobble)
    return pullback(base, f)


def _winding(config: ScenarioConfig) -> ScenarioSetup:
    base = build_family("maurer-cartan-u1", nodes=config.nodes)
    twist = _cover(base, config.m, config.wobble, Chart.circle(config.nodes))
    dirac = DiracFamily.fourier_circle(twist, config.cutoff, spin="trivial")
    oracle = DiracFamily.affine(slope=config.m, interval=twist.interval)
    return ScenarioSetup(twist, dirac, oracle, config.m, "winding number of θ ↦ e^{imθ}", xi_cancels=True)


def _winding_un(config: ScenarioConfig) -> ScenarioSetup:
    base = build_family("maurer-cartan-uN", nodes=config.nodes, rank=config.rank)
    twist = _cover(base, config.m, config.wobble, Chart.circle(config.nodes))
    dirac = DiracFamily.fourier_circle(twist, config.cutoff, spin="trivial")
    # the remaining N − 1 summands have constant spectrum ℤ
    oracle = DiracFamily.affine(slope=config.m, interval=twist.interval)
    return ScenarioSetup(twist, dirac, oracle, config.m, "generator loop of U(N) with winding m", xi_cancels=True)


def _winding_partial(config: ScenarioConfig) -> ScenarioSetup:
    stop = 0.5 if config.s_stop is None else config.s_stop
    if not 0 < stop < 1:
        raise ParameterRangeError(f"s_stop must lie in (0, 1), got {stop}")
    base = build_family("maurer-cartan-u1", nodes=config.nodes)
    twist = replace(_cover(base, config.m, config.wobble, Chart.circle(config.nodes)), interval=(0.0, stop))
    dirac = DiracFamily.fourier_circle(twist, config.cutoff, spin="trivial")
    oracle = DiracFamily.affine(slope=config.m, interval=(0.0, stop))
    return ScenarioSetup(twist, dirac, oracle, crossing_oracle(oracle), "crossing count of k + m·s", xi_cancels=False)


def _hypersurface(config: ScenarioConfig) -> ScenarioSetup:
    base = build_family("hypersurface-circle", nodes=config.nodes, radius=config.radius)
    twist = _cover(base, config.degree, config.wobble)
    dirac = DiracFamily.fourier_circle(twist, config.cutoff, spin="bounding", radius=config.radius)
    d = config.degree
    oracle = DiracFamily.affine(slope=-d, offset=0.5 + d / 2, interval=twist.interval)
    return ScenarioSetup(twist, dirac, oracle, -d, "deg f of the circle self-map", xi_cancels=True)


SCENARIOS: dict[str, Scenario] = {
    "winding": Scenario("winding", _winding, lambda c: f"winding m={c.m}"),
    "winding-uN": Scenario("winding-uN", _winding_un, lambda c: f"winding-u{c.rank} m={c.m}"),
    "winding-partial": Scenario(
        "winding-partial", _winding_partial, lambda c: f"winding-partial m={c.m} s∈[0,{c.s_stop or 0.5:g}]"
    ),
    "hypersurface-circle": Scenario(
        "hypersurface-circle", _hypersurface, lambda c: f"hypersurface-circle d={c.degree} r={c.radius:g}"
    ),
}

SPIN_STRUCTURES: dict[str, SpinStructure] = {
    "winding": "trivial",
    "winding-uN": "trivial",
    "winding-partial": "trivial",
    "hypersurface-circle": "bounding",
}


def build(config: ScenarioConfig) -> ScenarioSetup:
    try:
        scenario = SCENARIOS[config.scenario]
    except KeyError:
        raise FamilyKindError(f"unknown scenario {config.scenario!r}; known: {', '.join(SCENARIOS)}") from None
    return scenario.build(config)


def default_suite() -> list[ScenarioConfig]:
    """Every scenario run by ``sflab verify --all``."""
    configs = [ScenarioConfig(scenario="winding", m=m) for m in (-3, -1, 1, 2, 3)]
    configs += [ScenarioConfig(scenario="hypersurface-circle", degree=d) for d in (-2, 0, 1, 3)]
    configs += [
        ScenarioConfig(scenario="hypersurface-circle", degree=2, radius=2.5),
        ScenarioConfig(scenario="winding", m=2, wobble=0.4),
        ScenarioConfig(scenario="winding-uN", m=2, rank=2),
        ScenarioConfig(scenario="winding-partial", m=1, s_stop=0.25),
        ScenarioConfig(scenario="winding-partial", m=2, s_stop=0.5),
    ]
    return configs
