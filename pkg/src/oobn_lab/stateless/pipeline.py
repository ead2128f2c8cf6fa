"""Discretization and ingestion for the block/witness measurement data.

Bins are half-open intervals [b_i, b_{i+1}); a value equal to a boundary
falls into the upper bin. The last bin is unbounded unless an explicit
``upper`` edge is given. Midpoints feed deterministic sum nodes and must be
supplied explicitly for unbounded bins.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from ..errors import (
    MissingColumn,
    NonMonotoneBins,
    SchemaError,
    SumOutOfRange,
    UnitMismatch,
)
from ..learning import Column, Dataset, parse_float_cell, read_csv_dataset


@dataclass(frozen=True)
class BinSpec:
    """Named bins over a numeric quantity."""

    labels: tuple[str, ...]
    boundaries: tuple[float, ...]  # left edges, one per bin
    unit: str = ""
    upper: float | None = None  # finite top edge, None = unbounded
    midpoints: tuple[float, ...] | None = None
    column: str | None = None  # CSV column this discretizes

    def __post_init__(self):
        if len(self.boundaries) != len(self.labels):
            raise SchemaError(
                f"{len(self.labels)} labels need {len(self.labels)} left edges, "
                f"got {len(self.boundaries)}"
            )
        if self.midpoints is not None and len(self.midpoints) != len(self.labels):
            raise SchemaError("midpoints must match the number of bins")

    @property
    def n_bins(self) -> int:
        return len(self.labels)

    def edges(self) -> list[tuple[float, float]]:
        uppers = list(self.boundaries[1:]) + [
            self.upper if self.upper is not None else float("inf")
        ]
        return list(zip(self.boundaries, uppers))

    def midpoint(self, index: int) -> float:
        if self.midpoints is not None:
            return float(self.midpoints[index])
        lo, hi = self.edges()[index]
        if not np.isfinite(hi):
            raise SchemaError(
                f"bin {self.labels[index]!r} is unbounded; an explicit midpoint "
                "is required",
                label=self.labels[index],
            )
        return (lo + hi) / 2.0

    def locate(self, value: float) -> int:
        """Bin index of a value (boundary values go to the upper bin)."""
        edges = self.edges()
        if value < edges[0][0]:
            raise SumOutOfRange(
                f"value {value} below the first bin edge {edges[0][0]}",
                value=float(value),
            )
        for i, (lo, hi) in enumerate(edges):
            if lo <= value < hi:
                return i
        raise SumOutOfRange(
            f"value {value} above the last bin edge", value=float(value)
        )

    def to_dict(self) -> dict:
        doc: dict = {
            "labels": list(self.labels),
            "boundaries": [float(b) for b in self.boundaries],
        }
        if self.unit:
            doc["unit"] = self.unit
        if self.upper is not None:
            doc["upper"] = float(self.upper)
        if self.midpoints is not None:
            doc["midpoints"] = [float(m) for m in self.midpoints]
        if self.column is not None:
            doc["column"] = self.column
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping) -> "BinSpec":
        try:
            return cls(
                labels=tuple(doc["labels"]),
                boundaries=tuple(float(b) for b in doc["boundaries"]),
                unit=doc.get("unit", ""),
                upper=doc.get("upper"),
                midpoints=tuple(doc["midpoints"]) if "midpoints" in doc else None,
                column=doc.get("column"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError(f"malformed bin spec: {exc}") from exc


def _check_monotone(boundaries: Sequence[float], upper: float | None):
    # equal adjacent edges are collapsed (empty) bins from degenerate
    # quantile data and stay usable; decreasing edges are plain errors
    edges = list(boundaries) + ([upper] if upper is not None else [])
    for a, b in zip(edges, edges[1:]):
        if b < a:
            raise NonMonotoneBins(
                f"bin boundaries must be nondecreasing, got {a} then {b}",
                boundaries=[float(x) for x in edges],
            )


def discretize(values: Sequence[float], bins: BinSpec) -> tuple[list[str], BinSpec]:
    """Map numeric values to bin labels.

    Returns the label column together with the (unchanged) bin metadata so
    callers can record exactly what was applied.
    """
    _check_monotone(bins.boundaries, bins.upper)
    labels = [bins.labels[bins.locate(float(v))] for v in values]
    return labels, bins


def quantile_bins(values: Sequence[float], labels: Sequence[str],
                  unit: str = "", column: str | None = None) -> BinSpec:
    """Equal-mass bins from the data itself.

    Degenerate data (ties across quantiles) collapses bins; the collapsed
    bins are kept as zero-width (hence empty) and a warning is emitted, so
    a constant column ends up in a single occupied bin.
    """
    data = np.asarray(list(values), dtype=float)
    if data.size == 0:
        raise SchemaError("cannot derive quantile bins from an empty column")
    n = len(labels)
    qs = [i / n for i in range(n)]
    boundaries = tuple(float(np.quantile(data, q)) for q in qs)
    if len(set(boundaries)) < len(boundaries):
        warnings.warn(
            f"quantile bins for {column or 'column'} collapsed; some bins are empty",
            stacklevel=2,
        )
    return BinSpec(labels=tuple(labels), boundaries=boundaries, unit=unit, column=column)


def deterministic_sum_cpt(parent_bins_a: BinSpec, parent_bins_b: BinSpec,
                          child_bins: BinSpec) -> np.ndarray:
    """CPT of child = a + b on bin midpoints: every row is a point mass.

    Row order follows the (a, b) parent order with b varying fastest. Units
    must agree and the child bins must cover every reachable midpoint sum.
    """
    units = {parent_bins_a.unit, parent_bins_b.unit, child_bins.unit}
    if len(units) != 1:
        raise UnitMismatch(
            f"sum node mixes units {sorted(units)}", units=sorted(units)
        )
    for spec in (parent_bins_a, parent_bins_b, child_bins):
        _check_monotone(spec.boundaries, spec.upper)
    table = np.zeros((parent_bins_a.n_bins * parent_bins_b.n_bins, child_bins.n_bins))
    row = 0
    for i in range(parent_bins_a.n_bins):
        for j in range(parent_bins_b.n_bins):
            total = parent_bins_a.midpoint(i) + parent_bins_b.midpoint(j)
            table[row, child_bins.locate(total)] = 1.0
            row += 1
    return table


BLOCK_WITNESS_COLUMNS = (
    "block_number",
    "difficulty",
    "gas_limit",
    "tx_count",
    "state_entries_updated",
    "block_creation_time_s",
    "witness_size_bytes",
    "witness_creation_time_s",
)

# CSV columns that are physical magnitudes and must be nonnegative
_NONNEGATIVE = {
    "difficulty",
    "gas_limit",
    "tx_count",
    "state_entries_updated",
    "block_creation_time_s",
    "witness_size_bytes",
    "witness_creation_time_s",
}


def ingest_block_witness_csv(text: str, bins_by_variable: Mapping[str, BinSpec]) -> Dataset:
    """Parse and discretize a block/witness extraction CSV.

    ``bins_by_variable`` maps model variable names to bin specs whose
    ``column`` field names the CSV column to read. Rows with missing or
    unparseable cells are rejected with the row index and column reported.
    """
    by_column: dict[str, tuple[str, BinSpec]] = {}
    for variable, spec in bins_by_variable.items():
        if spec.column is None:
            continue
        by_column[spec.column] = (variable, spec)
    for column in by_column:
        if column not in BLOCK_WITNESS_COLUMNS:
            raise SchemaError(
                f"bin spec references unknown CSV column {column!r}", column=column
            )
    records = read_csv_dataset(text, [], required=BLOCK_WITNESS_COLUMNS)
    variables = sorted(by_column.values(), key=lambda pair: pair[0])
    columns = [Column(variable, spec.labels) for variable, spec in variables]
    rows: list[list[str]] = []
    for i, record in enumerate(records):
        row: list[str] = []
        for variable, spec in variables:
            raw = record.get(spec.column)
            if raw is None or raw == "":
                raise MissingColumn(
                    f"row {i} has no value for {spec.column!r}",
                    row=i,
                    column=spec.column,
                )
            minimum = 0.0 if spec.column in _NONNEGATIVE else None
            value = parse_float_cell(raw, i, spec.column, minimum=minimum)
            row.append(spec.labels[spec.locate(value)])
        rows.append(row)
    return Dataset.from_rows(columns, rows)


def tag_point_mass_rows(table: np.ndarray) -> bool:
    """True iff every row of the table is a point mass."""
    table = np.asarray(table)
    return bool(np.all(np.isin(table, (0.0, 1.0))) and np.all(table.sum(axis=1) == 1.0))
