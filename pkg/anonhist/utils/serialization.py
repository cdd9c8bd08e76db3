"""
Reading and writing partitions, vectors, bit strings and reports.

Partition text format: one positive integer per line, nonincreasing,
LF-terminated, no blank lines, plain decimal digits only. A file whose
first non-blank character is ``[`` is read as a JSON array of raw counts
and anonymized with ``from_counts``.

JSON output uses sorted keys and 2-space indentation so identical inputs
produce byte-identical files.
"""
import re
from pathlib import Path
from typing import Any, Iterable, List, Sequence, Union

import orjson
import pandas as pd
from pydantic import BaseModel

from anonhist.models.partition import INT64_MAX, IntegerPartition
from anonhist.services.partition_service import from_counts
from anonhist.utils.exceptions import (
    EncodingParameterError,
    InvalidPartitionError,
    PartitionFormatError,
    PartitionOverflowError,
)

PathLike = Union[str, Path]

_JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2

_UNSIGNED = re.compile(r"[0-9]+")
_SIGNED = re.compile(r"-?[0-9]+")


def _parse_int(token: str, line_number: int, pattern: "re.Pattern[str]" = _UNSIGNED) -> int:
    if not pattern.fullmatch(token):
        raise PartitionFormatError(f"line {line_number} is not an integer: {token!r}", line_number=line_number)
    value = int(token)
    if abs(value) > INT64_MAX:
        raise PartitionOverflowError(
            f"line {line_number} overflows a signed 64-bit integer",
            details={"line_number": line_number},
        )
    return value


def _numbered_lines(text: str) -> Iterable[tuple]:
    """(line_number, line) for LF-terminated text; blank lines and a missing final LF are errors."""
    if not text:
        return
    if not text.endswith("\n"):
        raise PartitionFormatError("input must end with a line feed", line_number=text.count("\n") + 1)
    for line_number, line in enumerate(text[:-1].split("\n"), start=1):
        if not line:
            raise PartitionFormatError(f"line {line_number} is empty", line_number=line_number)
        yield line_number, line


def _read_text(path: PathLike) -> str:
    try:
        return Path(path).read_bytes().decode("utf-8")
    except UnicodeDecodeError as e:
        raise PartitionFormatError(f"{path} is not valid UTF-8: {e.reason} at byte {e.start}")


def _parse_json_array(text: str) -> List[int]:
    try:
        data = orjson.loads(text)
    except orjson.JSONDecodeError as e:
        raise PartitionFormatError(f"invalid JSON: {e}")
    if not isinstance(data, list) or not all(isinstance(x, int) and not isinstance(x, bool) for x in data):
        raise PartitionFormatError("JSON input must be an array of integers")
    for i, value in enumerate(data):
        if abs(value) > INT64_MAX:
            raise PartitionOverflowError("JSON entry overflows a signed 64-bit integer", details={"index": i})
    return data


def parse_partition_text(text: str) -> IntegerPartition:
    """Parse the line format (or a JSON count array) into a partition."""
    if text.lstrip().startswith("["):
        return from_counts(_parse_json_array(text))

    parts: List[int] = []
    total = 0
    for line_number, token in _numbered_lines(text):
        value = _parse_int(token, line_number)
        if value < 1:
            raise PartitionFormatError(
                f"line {line_number}: parts must be positive, got {value}",
                line_number=line_number,
            )
        if parts and value > parts[-1]:
            raise InvalidPartitionError(
                f"line {line_number}: parts must be nonincreasing",
                details={"line_number": line_number, "previous": parts[-1], "value": value},
            )
        total += value
        if total > INT64_MAX:
            raise PartitionOverflowError("partition size overflows a signed 64-bit integer")
        parts.append(value)
    return IntegerPartition(parts=tuple(parts))


def read_partition(path: PathLike) -> IntegerPartition:
    """Read a partition file."""
    return parse_partition_text(_read_text(path))


def format_partition(partition: IntegerPartition) -> str:
    """Line format, one part per line, LF-terminated."""
    return "".join(f"{part}\n" for part in partition.parts)


def write_partition(partition: IntegerPartition, path: PathLike) -> None:
    Path(path).write_text(format_partition(partition), encoding="utf-8", newline="\n")


def parse_int_vector(text: str) -> List[int]:
    """Signed integer vector as a JSON array or one integer per line."""
    if text.lstrip().startswith("["):
        return _parse_json_array(text)
    return [_parse_int(token, line_number, _SIGNED) for line_number, token in _numbered_lines(text)]


def read_int_vector(path: PathLike) -> List[int]:
    return parse_int_vector(_read_text(path))


def parse_hex_bits(hex_string: str, m: int) -> List[int]:
    """Bit vector of length m from a hex string, most significant bit first."""
    digits = hex_string.strip().lower().removeprefix("0x")
    try:
        value = int(digits, 16) if digits else 0
    except ValueError:
        raise EncodingParameterError(f"not a hexadecimal string: {hex_string!r}")
    if value >> m:
        raise EncodingParameterError(
            f"hex value needs more than m = {m} bits",
            details={"m": m, "bit_length": value.bit_length()},
        )
    return [(value >> (m - 1 - i)) & 1 for i in range(m)]


def format_bits(bits: Sequence[int]) -> str:
    return "".join("1" if bit else "0" for bit in bits)


def to_payload(obj: Any) -> Any:
    """JSON-ready structure; models are dumped in JSON mode so enums become values."""
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, (list, tuple)):
        return [to_payload(item) for item in obj]
    return obj


def dumps_json(obj: Any) -> str:
    """Deterministic JSON text (sorted keys, 2-space indent, trailing LF)."""
    return orjson.dumps(to_payload(obj), option=_JSON_OPTIONS).decode("utf-8") + "\n"


def reports_to_csv(reports: Sequence[BaseModel]) -> str:
    """CSV with one row per report and columns in field order."""
    rows = [report.model_dump(mode="json") for report in reports]
    columns = list(type(reports[0]).model_fields) if reports else []
    return pd.DataFrame(rows, columns=columns).to_csv(index=False, lineterminator="\n")
