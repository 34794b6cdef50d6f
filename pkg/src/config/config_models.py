#!/usr/bin/env python3
"""
Configuration Models - Typed Dataclasses for Scenarios

Every section rejects unknown keys so that a misspelt tolerance name fails
loudly instead of silently falling back to its default.
"""

import math
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

from src.boundary.bc_families import Branch, NMatrixParams, SeparatedBcParams, TransferMatrixV
from src.boundary.classification import BcClass, classify_bc
from src.states.grid import Grid, UnitsConfig
from src.utils.error_handler import ConfigurationError, ScenarioParseError

BC_KINDS = ("Periodic", "Antiperiodic", "FluxBalanced", "NMatrix", "ConfiningSeparated")
MAJORANA_SIGNS = ("plus", "minus")


@dataclass
class UnitsSection:
    """Physical constants (natural desk units by default)"""
    hbar: float = 1.0
    m: float = 1.0
    c: float = 1.0


@dataclass
class GridSection:
    """Closed uniform grid over [a, b]"""
    a: float = 0.0
    b: float = 2 * math.pi
    n: int = 256


@dataclass
class BcSection:
    """Boundary condition: a class name plus the parameters that class needs"""
    kind: str = "Antiperiodic"
    mu: Optional[float] = None
    branch: Optional[str] = None
    m0_sign: Optional[int] = None
    m0: Optional[float] = None
    m1: Optional[float] = None
    m3: Optional[float] = None


@dataclass
class SolverSection:
    """Solver settings"""
    cfl_factor: float = 0.5
    dt_factor: float = 0.2
    crossings: float = 10.0
    n_max: int = 5
    n_modes: int = 4
    snapshot_stride: Optional[int] = None
    energy_window: Optional[List[float]] = None
    k_list: List[float] = field(default_factory=lambda: [0.01, 0.02, 0.04])
    eigensolver_n: int = 400
    mu_samples: int = 64
    random_trials: int = 1000
    majorana_trials: int = 100
    max_workers: int = 1


@dataclass
class ToleranceSection:
    """Pass thresholds; every value is multiplied by ``scale``"""
    algebra: float = 1e-12
    majorana: float = 1e-13
    majorana_imag: float = 1e-12
    boundary: float = 1e-10
    cross_check: float = 1e-12
    flux: float = 1e-9
    domain: float = 1e-9
    quantization: float = 1e-10
    reconstruction: float = 1e-10
    energy_drift: float = 1e-6
    reversibility: float = 1e-9
    invariance: float = 1e-10
    fd_relative: float = 1e-3
    order: float = 1.9
    slope: float = 0.2
    scale: float = 1.0

    def get(self, name: str) -> float:
        """Scaled tolerance; convergence orders and slope windows are not scaled."""
        value = getattr(self, name)
        if name in ('order', 'slope', 'scale'):
            return value
        return value * self.scale

    def positive_violations(self) -> List[str]:
        return [f.name for f in fields(self) if not getattr(self, f.name) > 0]


def _section(cls, data: Any, path: str):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ScenarioParseError(f"'{path}' must be an object", path=path)
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ScenarioParseError(f"unknown key(s) in '{path}': {', '.join(unknown)}", path=path, keys=unknown)
    return cls(**data)


@dataclass
class Scenario:
    """
    Complete scenario for one CLI invocation.

    Combines physical units, the grid, the boundary condition, the Majorana
    sign, the seed, solver settings, tolerances and the output directory.
    """
    units: UnitsSection = field(default_factory=UnitsSection)
    grid: GridSection = field(default_factory=GridSection)
    bc: BcSection = field(default_factory=BcSection)
    majorana_sign: str = "plus"
    seed: int = 42
    solver: SolverSection = field(default_factory=SolverSection)
    tolerances: ToleranceSection = field(default_factory=ToleranceSection)
    output_dir: str = "Output"

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Scenario":
        """Create a Scenario from a parsed JSON document"""
        if not isinstance(data, dict):
            raise ScenarioParseError("scenario must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ScenarioParseError(f"unknown scenario key(s): {', '.join(unknown)}", keys=unknown)
        return cls(
            units=_section(UnitsSection, data.get("units"), "units"),
            grid=_section(GridSection, data.get("grid"), "grid"),
            bc=_section(BcSection, data.get("bc"), "bc"),
            majorana_sign=data.get("majorana_sign", "plus"),
            seed=data.get("seed", 42),
            solver=_section(SolverSection, data.get("solver"), "solver"),
            tolerances=_section(ToleranceSection, data.get("tolerances"), "tolerances"),
            output_dir=data.get("output_dir", "Output"),
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def units_config(self) -> UnitsConfig:
        return UnitsConfig(hbar=self.units.hbar, m=self.units.m, c=self.units.c)

    def build_grid(self, n: Optional[int] = None) -> Grid:
        return Grid(self.grid.a, self.grid.b, n if n is not None else self.grid.n)

    def bc_relation(self):
        """The configured boundary condition in its native parameterization."""
        bc = self.bc
        if bc.kind == "FluxBalanced":
            return TransferMatrixV.flux_balanced(bc.mu, Branch(bc.branch))
        if bc.kind == "NMatrix":
            return NMatrixParams(mu=bc.mu, m0=bc.m0, m1=bc.m1, m3=bc.m3)
        if bc.kind == "ConfiningSeparated":
            return SeparatedBcParams(m0_sign=bc.m0_sign)
        raise ConfigurationError(f"bc kind {bc.kind!r} has no parameterized relation")

    def bc_class(self) -> BcClass:
        if self.bc.kind == "Periodic":
            return BcClass.periodic()
        if self.bc.kind == "Antiperiodic":
            return BcClass.antiperiodic()
        return classify_bc(self.bc_relation(), self.grid.b - self.grid.a)
