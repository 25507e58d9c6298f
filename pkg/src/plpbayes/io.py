"""Reading and writing failure-time files and analysis reports.

Failure files are plain text: one cumulative failure time per line, '#'
starts a comment (whole-line or trailing), blank lines are ignored.  Times
must be positive and strictly increasing; parse errors carry 1-based line
numbers.
"""

import importlib.resources
import json
import warnings

import numpy as np

from .exceptions import DataError
from .process import FailureTimes

__all__ = [
    "parse_failure_text",
    "parse_failure_file",
    "write_failure_file",
    "load_crow_times",
    "format_report_csv",
    "format_report_json",
]


def parse_failure_text(text, source="<string>", sorted_ok=False):
    """Parse failure times from text.

    Parameters
    ----------
    text : str
    source : str
        Name used in error messages.
    sorted_ok : bool, default False
        When True, out-of-order input is sorted (with a warning) instead of
        rejected.  Duplicate times are rejected either way.

    Returns
    -------
    FailureTimes
    """
    values = []
    lines = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        try:
            value = float(stripped)
        except ValueError:
            raise DataError(f"{source}:{lineno}: not a number: {stripped!r}") from None
        if not np.isfinite(value):
            raise DataError(f"{source}:{lineno}: non-finite value {stripped!r}")
        if value <= 0.0:
            raise DataError(f"{source}:{lineno}: failure time must be positive, got {value}")
        values.append(value)
        lines.append(lineno)

    if not values:
        raise DataError(f"{source}: no failure times found")
    for i in range(1, len(values)):
        if values[i] == values[i - 1]:
            raise DataError(
                f"{source}:{lines[i]}: duplicate failure time {values[i]}"
                f" (also on line {lines[i - 1]})"
            )
    out_of_order = [i for i in range(1, len(values)) if values[i] < values[i - 1]]
    if out_of_order:
        if not sorted_ok:
            i = out_of_order[0]
            raise DataError(
                f"{source}:{lines[i]}: failure times must be increasing"
                f" ({values[i]} after {values[i - 1]}); pass sorted_ok to sort instead"
            )
        if len(set(values)) != len(values):
            raise DataError(f"{source}: duplicate failure times after sorting")
        warnings.warn(f"{source}: failure times were out of order and have been sorted")
        values.sort()
    return FailureTimes(np.array(values))


def parse_failure_file(path, sorted_ok=False):
    """Read a failure-time file.  See parse_failure_text."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from None
    return parse_failure_text(text, source=str(path), sorted_ok=sorted_ok)


def write_failure_file(path, data, header=None):
    """Write failure times, one per line, at full float precision."""
    data = data if isinstance(data, FailureTimes) else FailureTimes(data)
    lines = []
    if header:
        lines.extend(f"# {line}" for line in str(header).splitlines())
    lines.extend(f"{t:.17g}" for t in data.times)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_crow_times():
    """Bundled benchmark record: 40 failure times of a tracked military
    vehicle under development testing, failure truncated at the 40th."""
    ref = importlib.resources.files("plpbayes").joinpath("data/crow.txt")
    return parse_failure_text(ref.read_text(encoding="utf-8"), source="crow.txt")


def _format_value(value):
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def _flatten(report, prefix=""):
    items = []
    for key, value in report.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            items.extend(_flatten(value, prefix=f"{name}."))
        elif isinstance(value, (list, tuple)):
            items.append((name, ";".join(_format_value(v) for v in value)))
        else:
            items.append((name, _format_value(value)))
    return items


def format_report_csv(report):
    """Key-value CSV rendering of a (possibly nested) report dict.

    Nested keys are dotted; floats print at 6 significant digits.
    """
    lines = ["key,value"]
    lines.extend(f"{key},{value}" for key, value in _flatten(report))
    return "\n".join(lines) + "\n"


def format_report_json(report):
    """Full-precision JSON rendering of a report dict."""
    return json.dumps(report, indent=2, sort_keys=False) + "\n"
