"""Experiment rows and their CSV serialization."""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Iterable


@dataclass(frozen=True)
class ExperimentRecord:
    """One output row.

    ``error`` is the normalized error ``symnorm/sqrt(d)``, except for
    ``density`` rows where it holds the nonzero fraction ``l0/d^2``.
    ``wall_time_ms`` is 0 unless timing was requested, so seeded runs stay
    byte-identical.
    """

    experiment: str
    d: int
    k_or_graph: str
    algorithm: str
    n_factors: int
    error: float
    seed: int
    wall_time_ms: int = 0

    def __post_init__(self) -> None:
        if self.n_factors < 0:
            raise ValueError("n_factors must be >= 0")
        if not self.error >= 0:
            raise ValueError("error must be a non-negative number")


FIELDNAMES = [f.name for f in fields(ExperimentRecord)]


def _row(rec: ExperimentRecord) -> dict:
    row = asdict(rec)
    row["error"] = format(rec.error, ".17g")
    return row


def records_to_csv(records: Iterable[ExperimentRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=FIELDNAMES, lineterminator="\n")
    writer.writeheader()
    for rec in records:
        writer.writerow(_row(rec))
    return buf.getvalue()


def write_records(path: str | Path, records: Iterable[ExperimentRecord]) -> None:
    Path(path).write_text(records_to_csv(records), encoding="utf-8")


def read_records(path: str | Path) -> list[ExperimentRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            ExperimentRecord(
                experiment=row["experiment"],
                d=int(row["d"]),
                k_or_graph=row["k_or_graph"],
                algorithm=row["algorithm"],
                n_factors=int(row["n_factors"]),
                error=float(row["error"]),
                seed=int(row["seed"]),
                wall_time_ms=int(row["wall_time_ms"]),
            )
            for row in csv.DictReader(fh)
        ]
