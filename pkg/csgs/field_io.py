#!/usr/bin/env python3

# Copyright (c) csgs authors
# This code is licensed under MIT license (see LICENSE.txt for details)

import csv
import io
import struct
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence, Union

import numpy as np

from csgs import FieldFileError, GridError, log, utils
from csgs.diagnostics import PohozaevReport, NonexistenceCertificate
from csgs.grid import (
    FieldPair, Grid, GridSpec, BOUNDARIES, BOUNDARY_PERIODIC, LAPLACIAN_FD2, LAPLACIAN_SPECTRAL,
)
from csgs.potentials import ValidationReport
from csgs.solver import SolveReport, MuSweep, ComparisonReport, SobolevEstimate

MAGIC = b"CSGS"
FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (FORMAT_VERSION,)

# magic, version, dim, n per axis, L, boundary
HEADER = struct.Struct('<4sIIIdB')
PAYLOAD_DTYPE = np.dtype('<f8')

FLOAT_FORMAT = '.17g'


# ===========
# Field files
# ===========

def encode_field(fp: FieldPair) -> bytes:
    spec = fp.grid.spec
    header = HEADER.pack(MAGIC, FORMAT_VERSION, spec.dim, spec.points_per_dim, float(spec.half_width), BOUNDARIES.index(spec.boundary))

    return b''.join((
        header,
        np.ascontiguousarray(fp.u, dtype=PAYLOAD_DTYPE).tobytes(order='C'),
        np.ascontiguousarray(fp.v, dtype=PAYLOAD_DTYPE).tobytes(order='C'),
    ))


def write_field(fp: FieldPair, path: str) -> None:
    utils.atomic_write(path, encode_field(fp))
    log.debug(f"Wrote field ({fp.grid.spec.points_per_dim}^{fp.grid.dim} nodes) to '{path}'")


def decode_field(content: bytes, grid: Optional[Grid] = None, source: str = '<bytes>') -> FieldPair:
    if len(content) < HEADER.size:
        raise FieldFileError(f"{source}: header short: expected {HEADER.size} bytes, got {len(content)}")

    magic, version, dim, n, half_width, boundary_code = HEADER.unpack_from(content)
    if magic != MAGIC:
        raise FieldFileError(f"{source}: bad magic {magic!r} (expected {MAGIC!r})")
    if version not in SUPPORTED_VERSIONS:
        raise FieldFileError(f"{source}: unsupported format version {version} (supported: {', '.join(map(str, SUPPORTED_VERSIONS))})")
    if boundary_code >= len(BOUNDARIES):
        raise FieldFileError(f"{source}: unknown boundary code {boundary_code}")

    boundary = BOUNDARIES[boundary_code]

    if grid is None:
        mode = LAPLACIAN_SPECTRAL if boundary == BOUNDARY_PERIODIC else LAPLACIAN_FD2
        try:
            grid = Grid(GridSpec(dim, half_width, n, boundary, mode))
        except GridError as e:
            raise FieldFileError(f"{source}: header describes an invalid grid: {e}")
    else:
        spec = grid.spec
        if (spec.dim, spec.points_per_dim, spec.half_width, spec.boundary) != (dim, n, half_width, boundary):
            raise FieldFileError(
                f"{source}: field was written on dim={dim}, n={n}, L={half_width!r}, boundary={boundary}, which does not "
                f"match dim={spec.dim}, n={spec.points_per_dim}, L={spec.half_width!r}, boundary={spec.boundary}"
            )

    count = n ** dim
    expected = 2 * count * PAYLOAD_DTYPE.itemsize
    payload = memoryview(content)[HEADER.size:]
    if len(payload) < expected:
        raise FieldFileError(f"{source}: payload short: expected {expected} bytes, got {len(payload)}")
    if len(payload) > expected:
        raise FieldFileError(f"{source}: {len(payload) - expected} trailing bytes after the payload")

    values = np.frombuffer(payload, dtype=PAYLOAD_DTYPE).astype(float)
    u = values[:count].reshape(grid.shape)
    v = values[count:].reshape(grid.shape)

    try:
        return FieldPair(u, v, grid)
    except GridError as e:
        raise FieldFileError(f"{source}: {e}")


def read_field(path: str, grid: Optional[Grid] = None) -> FieldPair:
    """
    Read a field file. With `grid` the header must agree with it; otherwise the grid is rebuilt from the header
    (spectral laplacian on periodic boxes, fd2 on dirichlet ones)
    """
    try:
        with open(path, 'rb') as field_file:
            content = field_file.read()
    except OSError as e:
        raise FieldFileError(f"unable to read field file '{path}': {e}")

    return decode_field(content, grid, source=path)


# ===========
# CSV reports
# ===========

def format_value(value: Any) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), FLOAT_FORMAT)
    if isinstance(value, tuple):
        return ' '.join(format_value(v) for v in value)

    return str(value)


def parse_float(text: str) -> Optional[float]:
    return float(text) if text != '' else None


def write_rows_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)

    count = 0
    for row in rows:
        writer.writerow([format_value(v) for v in row])
        count += 1

    utils.atomic_write(path, buffer.getvalue())
    return count


ReportLike = Union[
    SolveReport, MuSweep, ValidationReport, ComparisonReport, PohozaevReport, NonexistenceCertificate,
    Mapping[int, PohozaevReport], Mapping[int, SobolevEstimate],
]


def write_report_csv(report: ReportLike, path: str) -> None:
    """
    One CSV per report type. Mappings keyed by nodes per axis hold refinement studies.
    """
    header, rows = report_rows(report)
    count = write_rows_csv(path, header, rows)
    log.debug(f"Wrote {count} rows to '{path}'")


def report_rows(report: ReportLike):
    if isinstance(report, SolveReport):
        return _solve_rows(report)
    elif isinstance(report, MuSweep):
        return _sweep_rows(report)
    elif isinstance(report, ValidationReport):
        return _validation_rows(report)
    elif isinstance(report, ComparisonReport):
        return (
            ['energy_periodic', 'energy_asymptotic', 'gap', 'margin', 'slack', 'passed'],
            [[report.energy_periodic, report.energy_asymptotic, report.gap, report.margin, report.slack, report.passed]],
        )
    elif isinstance(report, PohozaevReport):
        return _pohozaev_rows({None: report})
    elif isinstance(report, NonexistenceCertificate):
        summary = report.summary()
        return list(summary.keys()), [list(summary.values())]
    elif isinstance(report, Mapping) and report:
        first = next(iter(report.values()))
        if isinstance(first, PohozaevReport):
            return _pohozaev_rows(report)
        elif isinstance(first, SobolevEstimate):
            return _sobolev_rows(report)

    raise TypeError(f"no CSV layout for {type(report).__name__}")


def _solve_rows(report: SolveReport):
    rows = [[i, energy, grad] for i, (energy, grad) in enumerate(zip(report.energy_trace, report.grad_trace))]
    return ['iter', 'energy', 'grad_norm'], rows


def _sweep_rows(sweep: MuSweep):
    rows = [
        [mu, energy, sweep.threshold, sweep.below_threshold(i)]
        for i, (mu, energy) in enumerate(zip(sweep.mu_values, sweep.energies))
    ]
    return ['mu', 'c', 'threshold', 'below_threshold'], rows


def _validation_rows(report: ValidationReport):
    rows = [[c.assumption, c.subject, c.passed, c.worst_value, c.bound, c.coordinate] for c in report.checks]
    return ['assumption', 'subject', 'passed', 'worst_value', 'bound', 'coordinate'], rows


def _pohozaev_rows(reports: Mapping[Optional[int], PohozaevReport]):
    term_names: List[str] = []
    for report in reports.values():
        term_names.extend(name for name in report.terms if name not in term_names)

    header = ['n', 'lhs', 'rhs', 'residual', 'relative'] + term_names + ['shell_magnitude', 'grad_norm', 'critical_point']
    rows = [
        [n, r.lhs, r.rhs, r.residual, r.relative] + [r.terms.get(name) for name in term_names]
        + [r.shell_magnitude, r.grad_norm, r.critical_point]
        for n, r in reports.items()
    ]
    return header, rows


def _sobolev_rows(estimates: Mapping[int, SobolevEstimate]):
    rows = []
    previous = None
    for n in sorted(estimates):
        estimate = estimates[n]
        drift = abs(estimate.constant - previous) if previous is not None else None
        rows.append([n, estimate.nodes, estimate.bubble_quotient, estimate.constant, drift])
        previous = estimate.constant

    return ['n', 'nodes', 'bubble_quotient', 'constant', 'drift'], rows


def read_rows_csv(path: str) -> List[Dict[str, str]]:
    with open(path, 'r', encoding='utf-8', newline='') as csv_file:
        return list(csv.DictReader(csv_file))

