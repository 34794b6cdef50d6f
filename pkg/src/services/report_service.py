"""
Report Service - invariant reports and CSV artifacts
"""

import csv
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from src import __version__
from src.analyzers.observables import ObservableField
from src.solvers.evolution import EvolutionRun
from src.solvers.nr_limit import NrLimitReport
from src.solvers.spectrum import SpectrumResult
from src.states.fv_states import FvState, fv_from_kfg
from src.states.grid import UnitsConfig
from src.utils.file_utils import ensure_directory_exists
from src.utils.logger import get_global_logger

logger = get_global_logger()

REPORT_FILENAME = 'report.json'


def _num(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    return format(float(value), '.17g')


def _json_value(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, complex):
        return {'re': value.real, 'im': value.imag}
    return value


@dataclass(frozen=True)
class ReportRow:
    check: str
    claim: str
    residual: Optional[float]
    tolerance: Optional[float]
    passed: bool
    comparison: str = '<='

    @classmethod
    def at_most(cls, check: str, claim: str, residual: float, tolerance: float) -> 'ReportRow':
        residual = float(residual)
        return cls(check, claim, residual, tolerance, bool(np.isfinite(residual) and residual <= tolerance))

    @classmethod
    def at_least(cls, check: str, claim: str, value: float, threshold: float) -> 'ReportRow':
        value = float(value)
        return cls(check, claim, value, threshold, bool(np.isfinite(value) and value >= threshold), '>=')

    @classmethod
    def within(cls, check: str, claim: str, value: float, target: float, tolerance: float) -> 'ReportRow':
        """Passes when ``|value - target| <= tolerance``; the residual column holds the value."""
        value = float(value)
        ok = bool(np.isfinite(value) and abs(value - target) <= tolerance)
        return cls(check, claim, value, tolerance, ok, f'~{target:g}')

    @classmethod
    def flag(cls, check: str, claim: str, ok: bool) -> 'ReportRow':
        return cls(check, claim, None, None, bool(ok), 'is')

    @classmethod
    def observation(cls, check: str, claim: str, value: Optional[float] = None) -> 'ReportRow':
        return cls(check, claim, None if value is None else float(value), None, True, 'info')

    def to_dict(self) -> Dict[str, Any]:
        return {
            'check': self.check,
            'claim': self.claim,
            'residual': self.residual,
            'tolerance': self.tolerance,
            'comparison': self.comparison,
            'pass': self.passed,
        }


@dataclass
class InvariantReport:
    """Pass/fail rows for one subcommand plus provenance"""
    command: str
    rows: List[ReportRow] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def failures(self) -> List[ReportRow]:
        return [row for row in self.rows if not row.passed]

    def add(self, row: ReportRow) -> ReportRow:
        self.rows.append(row)
        level = logger.debug if row.passed else logger.warning
        level(f"{'PASS' if row.passed else 'FAIL'} {row.check}", data=row.to_dict())
        return row

    def extend(self, rows: Iterable[ReportRow]):
        for row in rows:
            self.add(row)

    def to_dict(self, include_timestamp: bool = True) -> Dict[str, Any]:
        out = {
            'command': self.command,
            'pass': self.passed,
            'rows': [row.to_dict() for row in self.rows],
            'provenance': {**self.provenance, 'version': __version__},
            'details': self.details,
            'artifacts': sorted(self.artifacts),
        }
        if include_timestamp:
            out['generated_at'] = datetime.now(timezone.utc).isoformat()
        return out

    def save(self, out_dir: str, include_timestamp: bool = True) -> str:
        ensure_directory_exists(out_dir)
        path = os.path.join(out_dir, REPORT_FILENAME)
        with open(path, 'w', encoding='utf-8') as f:
            json.dump(self.to_dict(include_timestamp), f, indent=2, sort_keys=True, default=_json_value)
        logger.info(f"Report written to {path}", data={'rows': len(self.rows), 'pass': self.passed})
        return path

    def summary_lines(self) -> List[str]:
        lines = []
        for row in self.rows:
            status = 'PASS' if row.passed else 'FAIL'
            value = '' if row.residual is None else f" {row.residual:.3e}"
            bound = '' if row.tolerance is None else f" ({row.comparison} {row.tolerance:.1e})"
            lines.append(f"[{status}] {row.check}{value}{bound}  -- {row.claim}")
        return lines


def _write_rows(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]],
                footer: Sequence[str] = ()) -> str:
    ensure_directory_exists(os.path.dirname(path) or '.')
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_num(v) for v in row])
        for line in footer:
            f.write(f"# {line}\n")
    return path


def write_spectrum_csv(result: SpectrumResult, path: str) -> str:
    header = ['n', 'k', 'E_plus', 'E_minus', 'flux_residual', 'domain_residual']
    rows = ([e.n, e.k, e.e_plus, e.e_minus, e.flux_residual, e.domain_residual] for e in result.entries)
    return _write_rows(path, header, rows, footer=[f"bc={result.label}"] + list(result.notes))


def write_field_csv(state: FvState, path: str) -> str:
    header = ['x', 're_phi1', 'im_phi1', 're_phi2', 'im_phi2']
    rows = zip(state.grid.x, state.phi1.real, state.phi1.imag, state.phi2.real, state.phi2.imag)
    return _write_rows(path, header, rows)


def write_observable_csv(observable: ObservableField, path: str) -> str:
    x = observable.grid.x
    values = observable.values
    if np.iscomplexobj(values):
        header = ['x', 're', 'im']
        rows = zip(x, values.real, values.imag)
        at_a, at_b = complex(observable.at_a), complex(observable.at_b)
        footer = [f"at_a={_num(at_a.real)},{_num(at_a.imag)}", f"at_b={_num(at_b.real)},{_num(at_b.imag)}"]
    else:
        header = ['x', 'value']
        rows = zip(x, values)
        footer = [f"at_a={_num(observable.at_a)}", f"at_b={_num(observable.at_b)}"]
    return _write_rows(path, header, rows, footer=[f"kind={observable.kind}"] + footer)


def write_conservation_csv(run: EvolutionRun, path: str) -> str:
    header = ['time', 'staggered_energy', 'full_step_energy', 'j_en_a', 'j_en_b']
    return _write_rows(path, header, ([r.time, r.staggered_energy, r.full_step_energy, r.j_en_a, r.j_en_b]
                                      for r in run.conservation))


def write_snapshots(run: EvolutionRun, units: UnitsConfig, out_dir: str, seed: int) -> List[str]:
    """One FV field CSV per snapshot plus ``manifest.json``."""
    snap_dir = os.path.join(out_dir, 'snapshots')
    ensure_directory_exists(snap_dir)
    files = []
    for index, snap in enumerate(run.snapshots):
        name = f"snapshot_{index:04d}.csv"
        write_field_csv(fv_from_kfg(snap.state, units), os.path.join(snap_dir, name))
        files.append(name)
    manifest = {
        'dt': run.dt,
        'steps': run.steps,
        'stride': run.stride,
        'bc': run.bc.label(),
        'seed': seed,
        'majorana_sign': run.initial.majorana_sign.value,
        'times': [s.time for s in run.snapshots],
        'files': files,
    }
    manifest_path = os.path.join(snap_dir, 'manifest.json')
    with open(manifest_path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    return [os.path.join('snapshots', name) for name in files] + [os.path.join('snapshots', 'manifest.json')]


def write_nr_csv(report: NrLimitReport, path: str) -> str:
    header = ['k', 'ratio', 'sign', 'bracket_residual', 'schrodinger_residual', 'complement_residual']
    rows = ([r.k, r.ratio, r.sign.value, r.bracket_residual, r.schrodinger_residual, r.complement_residual]
            for r in report.rows)
    return _write_rows(path, header, rows, footer=[f"slope_plus={_num(report.slope_plus)}",
                                                   f"slope_minus={_num(report.slope_minus)}"])
