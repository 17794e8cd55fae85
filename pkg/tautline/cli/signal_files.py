"""Reading and writing signals as CSV or JSON files.

CSV comes in two layouts. With a ``value`` header, one value per row on the
grid [0, 1, ..., n]. With an ``x,value`` header, row i holds breakpoint x_i
and the value to its right, and a last row ``x,`` closes the interval. JSON
files hold ``{"interval": [a, b], "breakpoints": [...], "values": [...]}``
and may add a ``certificate`` block with ``lambda``, ``u`` and ``xi``.
"""

import csv
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

from tautline.analysis.battery import SuppliedCertificate
from tautline.core.signals import PiecewiseConstantSignal, PiecewiseLinearFunction
from tautline.errors import InvalidSignalError, SignalFormatError

logger = logging.getLogger(__name__)

NUMBER_FORMAT = ".17g"


@dataclass(frozen=True)
class SignalFile:
    """A parsed signal file."""

    path: Path
    format: str
    signal: PiecewiseConstantSignal
    certificate: Optional[SuppliedCertificate] = None


def format_number(x: float) -> str:
    return format(float(x), NUMBER_FORMAT)


def file_format(path: Path) -> str:
    return "json" if Path(path).suffix.lower() == ".json" else "csv"


def _parse_number(text: str, line: Optional[int], what: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise SignalFormatError(f"{what} {text!r} is not a number", line) from None
    if not math.isfinite(value):
        raise SignalFormatError(f"{what} must be finite, got {text!r}", line)
    return value


def _rows(handle) -> Iterable[Tuple[int, List[str]]]:
    reader = csv.reader(handle)
    for row in reader:
        cells = [cell.strip() for cell in row]
        if not any(cells):
            continue
        yield reader.line_num, cells


def _read_csv(path: Path) -> PiecewiseConstantSignal:
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(_rows(handle))
    if not rows:
        raise SignalFormatError("file is empty", 1)

    header_line, header = rows[0]
    header = [cell.lower() for cell in header]
    body = rows[1:]

    if header == ["value"]:
        values = []
        for line, cells in body:
            if len(cells) != 1:
                raise SignalFormatError(f"expected one column, got {len(cells)}", line)
            values.append(_parse_number(cells[0], line, "value"))
        if not values:
            raise SignalFormatError("no values after the header", header_line)
        return PiecewiseConstantSignal.uniform(values)

    if header == ["x", "value"]:
        if len(body) < 2:
            raise SignalFormatError("need at least one value row and a closing 'x,' row", header_line)
        breakpoints, values = [], []
        for index, (line, cells) in enumerate(body):
            last = index == len(body) - 1
            if len(cells) == 1:
                cells = cells + [""]
            if len(cells) != 2:
                raise SignalFormatError(f"expected two columns, got {len(cells)}", line)
            x = _parse_number(cells[0], line, "breakpoint")
            if breakpoints and x <= breakpoints[-1]:
                raise SignalFormatError(
                    f"breakpoint {x!r} does not increase past {breakpoints[-1]!r}", line
                )
            breakpoints.append(x)
            if last:
                if cells[1]:
                    raise SignalFormatError("the last row must leave the value empty", line)
            else:
                values.append(_parse_number(cells[1], line, "value"))
        return PiecewiseConstantSignal(breakpoints, values)

    raise SignalFormatError(f"unknown header {','.join(rows[0][1])!r}; use 'value' or 'x,value'", header_line)


def _reject_constant(token: str):
    raise SignalFormatError(f"non-finite number {token} is not allowed")


def _number_list(payload: dict, key: str, where: str) -> List[float]:
    raw = payload.get(key)
    if not isinstance(raw, list) or not raw:
        raise SignalFormatError(f"{where}{key!r} must be a non-empty list of numbers")
    numbers = []
    for item in raw:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise SignalFormatError(f"{where}{key!r} holds a non-number {item!r}")
        numbers.append(float(item))
    return numbers


def _signal_from_json(payload: dict, where: str = "") -> PiecewiseConstantSignal:
    if not isinstance(payload, dict):
        raise SignalFormatError(f"{where}expected a JSON object")
    breakpoints = _number_list(payload, "breakpoints", where)
    values = _number_list(payload, "values", where)
    for index in range(1, len(breakpoints)):
        if breakpoints[index] <= breakpoints[index - 1]:
            raise SignalFormatError(
                f"{where}breakpoints[{index}] = {breakpoints[index]!r} does not increase past "
                f"breakpoints[{index - 1}] = {breakpoints[index - 1]!r}"
            )
    if "interval" in payload:
        interval = _number_list(payload, "interval", where)
        if interval != [breakpoints[0], breakpoints[-1]]:
            raise SignalFormatError(
                f"{where}interval {interval!r} does not match breakpoints "
                f"[{breakpoints[0]!r}, {breakpoints[-1]!r}]"
            )
    try:
        return PiecewiseConstantSignal(breakpoints, values)
    except InvalidSignalError as e:
        raise SignalFormatError(f"{where}{e}") from None


def _certificate_from_json(payload: dict) -> SuppliedCertificate:
    if not isinstance(payload, dict):
        raise SignalFormatError("certificate must be a JSON object")
    lam = payload.get("lambda")
    if isinstance(lam, bool) or not isinstance(lam, (int, float)):
        raise SignalFormatError("certificate 'lambda' must be a number")
    u = _signal_from_json(payload.get("u"), "certificate u: ")
    xi_payload = payload.get("xi")
    if not isinstance(xi_payload, dict):
        raise SignalFormatError("certificate 'xi' must be a JSON object")
    nodes = _number_list(xi_payload, "nodes", "certificate xi: ")
    node_values = _number_list(xi_payload, "values", "certificate xi: ")
    try:
        xi = PiecewiseLinearFunction(nodes, node_values)
    except InvalidSignalError as e:
        raise SignalFormatError(f"certificate xi: {e}") from None
    return SuppliedCertificate(float(lam), u, xi)


def _read_json(path: Path) -> Tuple[PiecewiseConstantSignal, Optional[SuppliedCertificate]]:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    try:
        payload = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise SignalFormatError(e.msg, e.lineno) from None
    signal = _signal_from_json(payload)
    certificate = None
    if "certificate" in payload:
        certificate = _certificate_from_json(payload["certificate"])
    return signal, certificate


def read_signal(path) -> SignalFile:
    """Parses a signal file, choosing the format from the extension.

    Raises:
        OSError: if the file cannot be read.
        SignalFormatError: if the content is malformed (line number when known).
    """
    path = Path(path)
    fmt = file_format(path)
    if fmt == "json":
        signal, certificate = _read_json(path)
    else:
        signal, certificate = _read_csv(path), None
    logger.info(f"Read {signal.size}-piece signal on {signal.interval} from {path}")
    return SignalFile(path, fmt, signal, certificate)


def signal_payload(signal: PiecewiseConstantSignal) -> dict:
    return {
        "interval": [float(signal.breakpoints[0]), float(signal.breakpoints[-1])],
        "breakpoints": signal.breakpoints.tolist(),
        "values": signal.values.tolist(),
    }


def write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True, allow_nan=False)
        handle.write("\n")


def _write_rows(path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_signal(path, signal: PiecewiseConstantSignal) -> None:
    """Writes ``signal`` as JSON for a ``.json`` path, else as explicit-grid CSV."""
    path = Path(path)
    if file_format(path) == "json":
        write_json(path, signal_payload(signal))
    else:
        rows = [(format_number(x), format_number(v)) for x, v in zip(signal.breakpoints, signal.values)]
        rows.append((format_number(signal.breakpoints[-1]), ""))
        _write_rows(path, ("x", "value"), rows)
    logger.info(f"Wrote {signal.size}-piece signal to {path}")


def write_nodes(path, W: PiecewiseLinearFunction) -> None:
    """Writes a piecewise-linear function as an ``x,y`` node list."""
    _write_rows(
        path, ("x", "y"), ((format_number(x), format_number(y)) for x, y in zip(W.nodes, W.node_values))
    )


def write_tube(path, lower: PiecewiseLinearFunction, upper: PiecewiseLinearFunction) -> None:
    _write_rows(
        path,
        ("x", "lower", "upper"),
        (
            (format_number(x), format_number(lo), format_number(hi))
            for x, lo, hi in zip(lower.nodes, lower.node_values, upper(lower.nodes))
        ),
    )


def write_contacts(path, contacts: Iterable[Tuple[str, float, float]]) -> None:
    _write_rows(
        path,
        ("side", "start", "end"),
        ((side, format_number(start), format_number(end)) for side, start, end in contacts),
    )


def write_table(path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    _write_rows(path, header, ([format_number(x) for x in row] for row in rows))


def side_file(output, suffix: str) -> Path:
    """``out.csv`` plus ``string`` gives ``out.string.csv``."""
    output = Path(output)
    return output.with_name(f"{output.stem}.{suffix}.csv")
