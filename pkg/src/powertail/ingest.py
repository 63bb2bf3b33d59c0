"""Reading and writing journal impact-factor tables.

Layout: UTF-8 text, a header row ``JOURNAL;IF_2011;IF_2012;...``, then one
journal per row. The delimiter is ``;``, tab or ``,``. Numeric cells match
``-?[0-9]+([.,][0-9]+)?``; decimal commas are only accepted with ``;`` or
tab delimiters. A blank cell means the year is missing for that journal.
"""

from dataclasses import dataclass, field
import csv
import io
import re

import numpy as np

from .errors import ConfigurationError, DataError

__all__ = [
    "JournalRecord",
    "IngestReport",
    "ParseOptions",
    "parse_table",
    "read_table",
    "write_table",
    "format_number",
    "apply_exclusions",
    "column_values",
]

DELIMITERS = {"semicolon": ";", "tab": "\t", "comma": ","}
_NUMBER = re.compile(r"-?[0-9]+([.,][0-9]+)?")


@dataclass
class JournalRecord:
    name: str
    impact_factors: dict = field(default_factory=dict)


@dataclass
class IngestReport:
    """Bookkeeping for one parse; ``rows_parsed + len(malformed) == rows_read``."""

    rows_read: int = 0
    rows_parsed: int = 0
    excluded: list = field(default_factory=list)
    malformed: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    years: list = field(default_factory=list)


@dataclass(frozen=True)
class ParseOptions:
    """``delimiter`` is ``"auto"``, a name from ``DELIMITERS`` or the character."""

    delimiter: str = "auto"
    decimal_comma: bool = True
    year_columns: str = r"^IF[_ ]?(\d{4})$"


def _resolve_delimiter(option, header_line):
    if option == "auto":
        counts = {d: header_line.count(d) for d in (";", "\t", ",")}
        best = max(counts, key=counts.get)
        if counts[best] == 0:
            raise DataError("cannot detect delimiter: header has a single column")
        return best, True
    delim = DELIMITERS.get(option, option)
    if delim not in DELIMITERS.values():
        raise ConfigurationError(f"unsupported delimiter {option!r}")
    return delim, False


def _parse_number(cell, decimal_comma):
    if not _NUMBER.fullmatch(cell):
        raise ValueError(f"not a number: {cell!r}")
    if "," in cell:
        if not decimal_comma:
            raise ValueError(f"decimal comma not allowed: {cell!r}")
        cell = cell.replace(",", ".")
    value = float(cell)
    if value < 0.0:
        raise ValueError(f"negative impact factor: {cell}")
    return value + 0.0  # folds -0.0 into 0.0


def parse_table(data, options=None):
    """Parse an impact-factor table.

    Parameters
    ----------
    data : bytes or binary file object
        UTF-8 encoded table (a leading byte-order mark is ignored).
    options : ParseOptions, optional

    Returns
    -------
    records : list of JournalRecord
    report : IngestReport

    Raises
    ------
    DataError
        Empty input, undecodable bytes, or a header without year columns.
    ConfigurationError
        Explicit comma delimiter combined with ``decimal_comma=True``.
    """
    options = ParseOptions() if options is None else options
    raw = data if isinstance(data, (bytes, bytearray)) else data.read()
    try:
        text = bytes(raw).decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise DataError(f"input is not valid UTF-8: {exc}") from None
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DataError("input is empty: no header row")

    delim, auto = _resolve_delimiter(options.delimiter, lines[0])
    decimal_comma = options.decimal_comma
    if delim == ",":
        if decimal_comma and not auto:
            raise ConfigurationError(
                "decimal commas are ambiguous with a comma delimiter"
            )
        decimal_comma = False

    rows = csv.reader(io.StringIO(text), delimiter=delim)
    header = [h.strip() for h in next(rows)]
    pattern = re.compile(options.year_columns)
    columns = []
    ignored = []
    for j, name in enumerate(header[1:], start=1):
        m = pattern.match(name)
        if m is None:
            ignored.append(name)
        else:
            columns.append((j, int(m.group(1))))
    if not columns:
        raise DataError(f"unreadable header: no year columns in {header!r}")

    report = IngestReport(years=[y for _, y in columns])
    report.warnings.extend(f"ignored non-year column {name!r}" for name in ignored)
    records = []
    seen = set()
    for line_no, row in enumerate(rows, start=2):
        if not any(cell.strip() for cell in row):
            continue
        report.rows_read += 1
        if len(row) != len(header):
            report.malformed.append((line_no, f"expected {len(header)} cells, got {len(row)}"))
            continue
        name = row[0].strip()
        if not name:
            report.malformed.append((line_no, "empty journal name"))
            continue
        factors = {}
        try:
            for j, year in columns:
                cell = row[j].strip()
                if cell:
                    factors[year] = _parse_number(cell, decimal_comma)
        except ValueError as exc:
            report.malformed.append((line_no, str(exc)))
            continue
        key = name.casefold()
        if key in seen:
            report.warnings.append(f"line {line_no}: duplicate journal name {name!r}")
        seen.add(key)
        records.append(JournalRecord(name, factors))
        report.rows_parsed += 1
    return records, report


def read_table(path, options=None):
    """:func:`parse_table` on the file at ``path``."""
    with open(path, "rb") as fh:
        return parse_table(fh, options)


def format_number(value):
    """Shortest round-trip decimal with a ``.`` separator and no exponent."""
    text = repr(float(value))
    if "e" in text or "E" in text:
        text = np.format_float_positional(float(value), unique=True, trim="-")
    elif text.endswith(".0"):
        text = text[:-2]
    return text


def write_table(records, stream, years=None):
    """Write ``records`` in canonical form: ``;`` delimiter, ``.`` decimals."""
    if years is None:
        years = sorted({y for rec in records for y in rec.impact_factors})
    writer = csv.writer(stream, delimiter=";", lineterminator="\n")
    writer.writerow(["JOURNAL"] + [f"IF_{y}" for y in years])
    for rec in records:
        writer.writerow(
            [rec.name]
            + [
                format_number(rec.impact_factors[y]) if y in rec.impact_factors else ""
                for y in years
            ]
        )


def apply_exclusions(records, names):
    """Drop records whose name matches one of ``names`` (case-insensitive).

    Returns
    -------
    kept : list of JournalRecord
    delta : IngestReport
        ``excluded`` lists removed names; ``warnings`` lists exclusion names
        that matched nothing.
    """
    wanted = {n.strip().casefold(): n for n in names}
    delta = IngestReport()
    matched = set()
    kept = []
    for rec in records:
        key = rec.name.strip().casefold()
        if key in wanted:
            delta.excluded.append(rec.name)
            matched.add(key)
        else:
            kept.append(rec)
    for key, original in wanted.items():
        if key not in matched:
            delta.warnings.append(f"exclusion {original!r} matched no journal")
    return kept, delta


def column_values(records, year):
    """Impact factors for ``year`` in input order, skipping journals without it."""
    year = int(year)
    values = [rec.impact_factors[year] for rec in records if year in rec.impact_factors]
    if not values:
        available = sorted({y for rec in records for y in rec.impact_factors})
        raise DataError(f"year {year} not present; available years: {available}")
    return values
