"""
Services package: invariant suites and their reports
"""

from .report_service import (
    InvariantReport,
    ReportRow,
    write_conservation_csv,
    write_field_csv,
    write_nr_csv,
    write_observable_csv,
    write_snapshots,
    write_spectrum_csv,
)
from .verification_service import VerificationService, convergence_order, load_bc_document, parse_bc_document

__all__ = [
    'InvariantReport',
    'ReportRow',
    'VerificationService',
    'convergence_order',
    'load_bc_document',
    'parse_bc_document',
    'write_conservation_csv',
    'write_field_csv',
    'write_nr_csv',
    'write_observable_csv',
    'write_snapshots',
    'write_spectrum_csv',
]
