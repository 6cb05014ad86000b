"""Human-rating storage and per-method aggregation.

Ratings come from a CSV with header ``packet_file_id,method,rater_id,ca,ci``,
where ``ca`` (control accuracy) and ``ci`` (control informativeness) are
integers from 1 to 5. Every record carries equal weight in the means.
"""

from __future__ import annotations

import csv
import io
import json
from collections import defaultdict
from collections.abc import Iterable
from dataclasses import dataclass
from pathlib import Path

from bacsum.errors import DuplicateRatingError, NoDataError, RatingValidationError, RatingsError

HEADER = ["packet_file_id", "method", "rater_id", "ca", "ci"]
METHODS = ("m1", "m2", "m3", "m4")


@dataclass(frozen=True)
class RatingRecord:
    packet_file_id: str
    method: str
    rater_id: str
    ca: int
    ci: int


@dataclass(frozen=True)
class MethodScore:
    method: str
    mean_ca: float
    mean_ci: float
    n: int


def _score(value: str, column: str, row: int) -> int:
    try:
        score = int(value.strip())
    except ValueError:
        raise RatingValidationError(row, f"{column} must be an integer, got {value!r}") from None
    if not 1 <= score <= 5:
        raise RatingValidationError(row, f"{column}={score} outside 1..5")
    return score


def parse_ratings(text: str) -> list[RatingRecord]:
    """Parse ratings CSV text. Row numbers in errors are file line numbers (header is row 1)."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != HEADER:
        raise RatingValidationError(1, f"header must be {','.join(HEADER)}")
    records = []
    seen: dict[tuple[str, str, str], int] = {}
    for row_number, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(HEADER):
            raise RatingValidationError(row_number, f"expected {len(HEADER)} columns, got {len(row)}")
        file_id, method, rater = (cell.strip() for cell in row[:3])
        if not file_id or not rater:
            raise RatingValidationError(row_number, "packet_file_id and rater_id must not be empty")
        if method not in METHODS:
            raise RatingValidationError(row_number, f"method {method!r} not one of {', '.join(METHODS)}")
        key = (file_id, method, rater)
        if key in seen:
            raise DuplicateRatingError(f"row {row_number} repeats the rating on row {seen[key]}: {key}")
        seen[key] = row_number
        records.append(RatingRecord(file_id, method, rater, _score(row[3], "ca", row_number), _score(row[4], "ci", row_number)))
    return records


def load_ratings(path: str | Path) -> list[RatingRecord]:
    try:
        text = Path(path).read_text(encoding="utf-8-sig")
    except UnicodeDecodeError as exc:
        raise RatingsError(f"{path}: not UTF-8 text: {exc}") from None
    return parse_ratings(text)


def aggregate(records: Iterable[RatingRecord]) -> list[MethodScore]:
    """Per-method arithmetic means of CA and CI, methods in m1..m4 order."""
    totals: dict[str, list[int]] = defaultdict(lambda: [0, 0, 0])
    for r in records:
        t = totals[r.method]
        t[0] += r.ca
        t[1] += r.ci
        t[2] += 1
    if not totals:
        raise NoDataError("no ratings to aggregate")
    # integer sums, one division: the mean is the correctly rounded quotient
    return [
        MethodScore(m, totals[m][0] / totals[m][2], totals[m][1] / totals[m][2], totals[m][2])
        for m in sorted(totals, key=lambda m: (METHODS.index(m) if m in METHODS else len(METHODS), m))
    ]


def render_table(scores: list[MethodScore]) -> str:
    lines = [f"{'Method':<10}{'CI':>6}{'CA':>8}{'n':>6}"]
    for s in scores:
        label = f"Method {s.method[1:]}" if s.method in METHODS else s.method
        lines.append(f"{label:<10}{s.mean_ci:>6.2f}{s.mean_ca:>8.2f}{s.n:>6d}")
    return "\n".join(lines) + "\n"


def render_json(scores: list[MethodScore]) -> str:
    rows = [
        {"method": s.method, "mean_ci": s.mean_ci, "mean_ca": s.mean_ca, "n": s.n,
         "mean_ci_2dp": round(s.mean_ci, 2), "mean_ca_2dp": round(s.mean_ca, 2)}
        for s in scores
    ]
    return json.dumps({"schema": "bacsum.eval/1", "methods": rows}, indent=2) + "\n"
