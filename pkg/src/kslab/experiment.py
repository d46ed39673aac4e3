"""Measured-correlator ingestion and inequality evaluation.

Input is a CSV with header ``word,value,sigma``: one measured expectation
per Pauli word, with its standard error.  Words are matched against the
required set for the chosen inequality; each word's intrinsic sign is
applied to the measured value, and uncertainties propagate in quadrature.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable

import math

from .inequalities import (
    InequalityReport,
    decide_violation,
    multipartite_bound,
)
from .pauli import LambdaIndex, PauliString, lambda_element

KINDS = ("two-partite", "multipartite")


@dataclass(frozen=True)
class CorrelatorRecord:
    """One measured expectation value for a Pauli word."""

    word: str
    value: float
    sigma: float = 0.0

    def __post_init__(self) -> None:
        parsed = PauliString.from_text(self.word)
        if not parsed.is_hermitian:
            raise ValueError(f"word {self.word!r} is not an observable")
        if not math.isfinite(self.value):
            raise ValueError(f"non-finite value for {self.word!r}")
        if self.sigma < 0 or not math.isfinite(self.sigma):
            raise ValueError(f"bad standard error for {self.word!r}: {self.sigma}")
        if abs(self.value) > 1 + 3 * self.sigma:
            raise ValueError(
                f"value {self.value} for {self.word!r} exceeds |1| + 3*sigma"
            )

    @property
    def letters(self) -> str:
        return PauliString.from_text(self.word).letters

    @property
    def letter_value(self) -> float:
        """Measured value referred to the plain letter word (a signed word
        like ``-YY`` reports the negated observable)."""
        sign = {0: 1.0, 2: -1.0}[PauliString.from_text(self.word).sign_exp]
        return sign * self.value


def ingest_correlators(source: str | IO[str]) -> list[CorrelatorRecord]:
    """Parse a correlator CSV; duplicates and malformed lines are errors."""
    if isinstance(source, str):
        with open(source, encoding="utf-8", newline="") as fh:
            return ingest_correlators(fh)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("line 1: empty correlator file") from None
    if [h.strip().lower() for h in header] != ["word", "value", "sigma"]:
        raise ValueError(f"line 1: expected header word,value,sigma, got {header!r}")
    records: list[CorrelatorRecord] = []
    seen: set[str] = set()
    for lineno, row in enumerate(reader, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != 3:
            raise ValueError(f"line {lineno}: expected 3 fields, got {len(row)}")
        word, value, sigma = (field.strip() for field in row)
        try:
            record = CorrelatorRecord(word, float(value), float(sigma))
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if record.letters in seen:
            raise ValueError(f"line {lineno}: duplicate word {word!r}")
        seen.add(record.letters)
        records.append(record)
    return records


def required_words(kind: str, n: int) -> list[str]:
    """Letter form of the correlators an inequality needs."""
    if kind == "two-partite":
        if n != 2:
            raise ValueError("two-partite inequality needs n = 2")
        return ["XX", "YY", "ZZ"]
    if kind == "multipartite":
        if n < 2:
            raise ValueError("multipartite inequality needs n >= 2")
        return [
            lambda_element(LambdaIndex(n, p)).letters for p in range(1 << (n - 1))
        ]
    raise ValueError(f"unknown inequality kind {kind!r}; choose from {KINDS}")


def evaluate_experiment(
    records: Iterable[CorrelatorRecord], kind: str, n: int, k: float = 3.0
) -> InequalityReport:
    """Signed sum of measured correlators against the classical bound."""
    table = {record.letters: record for record in records}
    required = required_words(kind, n)
    missing = [w for w in required if w not in table]
    if missing:
        raise ValueError(
            f"missing correlators {missing} for {kind}; required set is {required}"
        )
    extra = sorted(set(table) - set(required))
    if extra:
        raise ValueError(
            f"unknown correlators {extra} for {kind}; required set is {required}"
        )

    if kind == "two-partite":
        lhs = (
            1.0
            + table["XX"].letter_value
            + table["YY"].letter_value
            - table["ZZ"].letter_value
        )
        variance = sum(table[w].sigma ** 2 for w in ("XX", "YY", "ZZ"))
        bound = 2.0
    else:
        lhs = 0.0
        variance = 0.0
        for p in range(1 << (n - 1)):
            word = lambda_element(LambdaIndex(n, p))
            sign = {0: 1.0, 2: -1.0}[word.sign_exp]
            record = table[word.letters]
            lhs += sign * record.letter_value
            variance += record.sigma**2
        bound = multipartite_bound(n)

    sigma = math.sqrt(variance)
    return InequalityReport(
        kind=kind,
        n=n,
        lhs=lhs,
        bound=bound,
        ratio=lhs / bound,
        violated=decide_violation(lhs, bound, sigma, k),
        uncertainty=sigma,
    )
