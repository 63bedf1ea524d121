"""Loading and preprocessing of weighted household wealth records.

Input is delimited text with a header row. Wealth is deflated to constant
prices and divided by the square root of household size.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import IngestError, NoDataError
from .sample import WeightedSample

__all__ = [
    "RawRecord",
    "Reject",
    "ColumnMap",
    "load_records",
    "load_deflators",
    "preprocess",
    "write_rejects",
    "write_records",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RawRecord:
    wealth: float
    weight: float
    household_size: int
    period: str


@dataclass(frozen=True)
class Reject:
    line: int
    reason: str
    row: tuple


@dataclass(frozen=True)
class ColumnMap:
    """Header names of the four input columns. ``size`` and ``period`` may be ``None``."""

    wealth: str = "wealth"
    weight: str = "weight"
    size: str | None = "size"
    period: str | None = "period"

    @classmethod
    def parse(cls, text):
        """From ``"wealth:weight:size:period"``; empty fields mean the column is absent."""
        parts = text.split(":")
        if len(parts) != 4 or not parts[0] or not parts[1]:
            raise IngestError(f"column map must look like wealth:weight:size:period, got {text!r}")
        return cls(parts[0], parts[1], parts[2] or None, parts[3] or None)


def _sniff_delimiter(header_line):
    return "\t" if header_line.count("\t") > header_line.count(",") else ","


def _parse_row(row, idx, has_size):
    try:
        wealth = float(row[idx["wealth"]])
    except ValueError:
        return None, "non-numeric wealth"
    if not math.isfinite(wealth):
        return None, "non-finite wealth"
    try:
        weight = float(row[idx["weight"]])
    except ValueError:
        return None, "non-numeric weight"
    if not math.isfinite(weight):
        return None, "non-finite weight"
    if weight <= 0:
        return None, "nonpositive weight"
    size = 1
    if has_size:
        raw = row[idx["size"]].strip()
        if raw:
            try:
                size_f = float(raw)
            except ValueError:
                return None, "non-numeric household size"
            if size_f != int(size_f) or size_f < 1:
                return None, "household size must be a positive integer"
            size = int(size_f)
    period = row[idx["period"]].strip() if "period" in idx else ""
    return RawRecord(wealth, weight, size, period), None


def load_records(path, columns=ColumnMap()):
    """Parse a delimited file into records plus a list of rejected rows.

    Returns ``(records, rejects)``. Raises :class:`IngestError` when the file
    or a mapped column is missing, or when no row survives validation.
    """
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"input file not found: {path}")
    with path.open(newline="") as fh:
        first = fh.readline()
        if not first.strip():
            raise IngestError(f"{path} has no header row")
        fh.seek(0)
        reader = csv.reader(fh, delimiter=_sniff_delimiter(first))
        header = [h.strip() for h in next(reader)]
        wanted = {"wealth": columns.wealth, "weight": columns.weight}
        if columns.size:
            wanted["size"] = columns.size
        if columns.period:
            wanted["period"] = columns.period
        missing = [name for name in wanted.values() if name not in header]
        if missing:
            raise IngestError(f"missing column(s) {missing} in {path}")
        idx = {k: header.index(v) for k, v in wanted.items()}
        if not columns.size:
            log.warning("no household size column; every record treated as size 1")
        records, rejects = [], []
        blank_sizes = 0
        width = max(idx.values()) + 1
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < width:
                rejects.append(Reject(lineno, "too few fields", tuple(row)))
                continue
            if "size" in idx and not row[idx["size"]].strip():
                blank_sizes += 1
            rec, reason = _parse_row(row, idx, "size" in idx)
            if rec is None:
                rejects.append(Reject(lineno, reason, tuple(row)))
            else:
                records.append(rec)
    if blank_sizes:
        log.warning("%d row(s) without household size treated as size 1", blank_sizes)
    if not records:
        raise NoDataError(f"no valid rows in {path} ({len(rejects)} rejected)")
    return records, rejects


def write_rejects(rejects, path):
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["line", "reason", "row"])
        for r in rejects:
            w.writerow([r.line, r.reason, "|".join(r.row)])


def write_records(records, path):
    """Write records in the default column layout (comma separated)."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["wealth", "weight", "size", "period"])
        for r in records:
            w.writerow([repr(r.wealth), repr(r.weight), r.household_size, r.period])


def load_deflators(path):
    """Two-column ``period,deflator`` file. The base period must have deflator 1."""
    path = Path(path)
    if not path.is_file():
        raise IngestError(f"deflator file not found: {path}")
    table = {}
    with path.open(newline="") as fh:
        first = fh.readline()
        fh.seek(0)
        for row in csv.reader(fh, delimiter=_sniff_delimiter(first)):
            if not row or row[0].strip().startswith("#"):
                continue
            key = row[0].strip()
            try:
                val = float(row[1])
            except (ValueError, IndexError):
                if not table:
                    continue  # header
                raise IngestError(f"bad deflator row {row!r}")
            if not val > 0:
                raise IngestError(f"deflator for {key!r} must be positive")
            table[key] = val
    if not table:
        raise IngestError(f"no deflators in {path}")
    if not any(v == 1.0 for v in table.values()):
        raise IngestError("deflator table has no base period (value 1)")
    return table


def preprocess(records, deflators=None):
    """Equivalized real wealth ``wealth / deflator / sqrt(size)`` grouped by period.

    ``deflators=None`` leaves nominal values unchanged. Returns a dict from
    period key to :class:`WeightedSample`, keys in sorted order.
    """
    if deflators is not None:
        unknown = sorted({r.period for r in records} - set(deflators))
        if unknown:
            raise IngestError(f"no deflator for period(s): {', '.join(unknown)}")
    groups = {}
    for r in records:
        d = 1.0 if deflators is None else deflators[r.period]
        groups.setdefault(r.period, ([], []))
        groups[r.period][0].append(r.wealth / d / math.sqrt(r.household_size))
        groups[r.period][1].append(r.weight)
    return {k: WeightedSample(np.array(v), np.array(w), label=k) for k, (v, w) in sorted(groups.items())}
