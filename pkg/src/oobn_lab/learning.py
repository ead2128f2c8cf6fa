"""Quantify and structure networks from complete discrete data.

Datasets are complete (no missing cells); rows with unparseable or missing
values are rejected at ingestion time, never imputed.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    EmptyRowWithoutSmoothing,
    MissingColumn,
    SchemaError,
    UnknownVariable,
    UnparseableCell,
)
from .network import Cpt, Network, build_network


@dataclass(frozen=True)
class Column:
    name: str
    states: tuple[str, ...]

    def index_of(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise SchemaError(
                f"label {label!r} not a state of column {self.name!r}",
                column=self.name,
                label=label,
            ) from None


class Dataset:
    """Complete discrete records, stored as integer state codes."""

    def __init__(self, columns: Sequence[Column], codes: np.ndarray):
        self.columns = tuple(columns)
        codes = np.asarray(codes, dtype=np.int64)
        if codes.ndim != 2 or codes.shape[1] != len(self.columns):
            raise SchemaError("codes must be (n_rows, n_columns)")
        for j, col in enumerate(self.columns):
            if codes.size and (codes[:, j].min() < 0 or codes[:, j].max() >= len(col.states)):
                raise SchemaError(f"codes out of range for column {col.name!r}",
                                  column=col.name)
        self.codes = codes
        self._index = {c.name: j for j, c in enumerate(self.columns)}

    @classmethod
    def from_rows(cls, columns: Sequence[Column], rows: Sequence[Sequence[str]]) -> "Dataset":
        columns = tuple(columns)
        codes = np.empty((len(rows), len(columns)), dtype=np.int64)
        for i, row in enumerate(rows):
            if len(row) != len(columns):
                raise SchemaError(f"row {i} has {len(row)} cells, expected {len(columns)}",
                                  row=i)
            for j, col in enumerate(columns):
                codes[i, j] = col.index_of(row[j])
        return cls(columns, codes)

    def __len__(self) -> int:
        return self.codes.shape[0]

    def column(self, name: str) -> Column:
        try:
            return self.columns[self._index[name]]
        except KeyError:
            raise UnknownVariable(f"dataset has no column {name!r}", variable=name) from None

    def column_codes(self, name: str) -> np.ndarray:
        return self.codes[:, self._index[name]]

    def labels(self, row: int) -> tuple[str, ...]:
        return tuple(
            col.states[self.codes[row, j]] for j, col in enumerate(self.columns)
        )


def mle_cpts(structure: Network, dataset: Dataset, smoothing: float = 0.0,
             weights: np.ndarray | None = None) -> dict[str, Cpt]:
    """Maximum-likelihood CPTs with additive (pseudo-count) smoothing.

    Each row is (count + smoothing) / (total + smoothing * cardinality);
    a parent configuration never seen in the data is an error when
    smoothing is 0.
    """
    if smoothing < 0:
        raise SchemaError("smoothing must be >= 0")
    if weights is None:
        weights = np.ones(len(dataset))
    weights = np.asarray(weights, dtype=float)
    out: dict[str, Cpt] = {}
    for name in structure.variable_names:
        var = structure.variable(name)
        col = dataset.column(name)
        if col.states != var.states:
            raise SchemaError(
                f"column {name!r} states {list(col.states)} do not match the "
                f"structure's {list(var.states)}",
                column=name,
            )
        parents = structure.parents(name)
        child_codes = dataset.column_codes(name)
        n_rows = 1
        row_codes = np.zeros(len(dataset), dtype=np.int64)
        for parent in parents:
            dataset.column(parent)
            card = structure.cardinality(parent)
            row_codes = row_codes * card + dataset.column_codes(parent)
            n_rows *= card
        counts = np.zeros((n_rows, var.cardinality))
        np.add.at(counts, (row_codes, child_codes), weights)
        totals = counts.sum(axis=1, keepdims=True)
        if smoothing == 0.0 and np.any(totals == 0.0):
            empty = int(np.argwhere(totals[:, 0] == 0.0)[0][0])
            raise EmptyRowWithoutSmoothing(
                f"parent configuration {empty} of {name!r} unseen in the data "
                "and smoothing is 0",
                variable=name,
                row=empty,
            )
        table = (counts + smoothing) / (totals + smoothing * var.cardinality)
        out[name] = Cpt(name, parents, table)
    return out


def fit_network(structure: Network, dataset: Dataset, smoothing: float = 0.0) -> Network:
    """The structure re-quantified with MLE CPTs from the data."""
    variables = [structure.variable(n) for n in structure.variable_names]
    return build_network(variables, structure.edges, mle_cpts(structure, dataset, smoothing))


def empirical_mutual_information(dataset: Dataset, x: str, y: str,
                                 weights: np.ndarray | None = None) -> float:
    """Mutual information of the empirical joint of two columns, in bits."""
    if x == y:
        raise SchemaError("mutual information needs two distinct columns")
    cx, cy = dataset.column(x), dataset.column(y)
    if weights is None:
        weights = np.ones(len(dataset))
    weights = np.asarray(weights, dtype=float)
    joint = np.zeros((len(cx.states), len(cy.states)))
    np.add.at(joint, (dataset.column_codes(x), dataset.column_codes(y)), weights)
    total = joint.sum()
    if total <= 0:
        return 0.0
    joint /= total
    px = joint.sum(axis=1)
    py = joint.sum(axis=0)
    mi = 0.0
    for i in range(joint.shape[0]):
        for j in range(joint.shape[1]):
            p = joint[i, j]
            if p > 0.0:
                mi += p * math.log2(p / (px[i] * py[j]))
    return max(0.0, float(mi))


def chow_liu_tree(dataset: Dataset, root: str) -> list[tuple[str, str]]:
    """Maximum-weight spanning tree under empirical MI, directed from ``root``.

    Edge weights tie-break lexicographically by the (sorted) name pair, so
    the skeleton is reproducible on equal-information data.
    """
    dataset.column(root)
    names = [c.name for c in dataset.columns]
    if len(names) < 2:
        raise SchemaError("chow_liu_tree needs at least 2 variables")
    scored: list[tuple[float, str, str]] = []
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            lo, hi = sorted((a, b))
            scored.append((empirical_mutual_information(dataset, lo, hi), lo, hi))
    scored.sort(key=lambda item: (-item[0], item[1], item[2]))

    component = {name: name for name in names}

    def find(n: str) -> str:
        while component[n] != n:
            component[n] = component[component[n]]
            n = component[n]
        return n

    undirected: dict[str, list[str]] = {name: [] for name in names}
    picked = 0
    for _, a, b in scored:
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        component[ra] = rb
        undirected[a].append(b)
        undirected[b].append(a)
        picked += 1
        if picked == len(names) - 1:
            break

    edges: list[tuple[str, str]] = []
    seen = {root}
    frontier = [root]
    while frontier:
        node = frontier.pop(0)
        for neighbor in sorted(undirected[node]):
            if neighbor not in seen:
                seen.add(neighbor)
                edges.append((node, neighbor))
                frontier.append(neighbor)
    return edges


def sample_dataset(net: Network, n: int, rng: np.random.Generator) -> Dataset:
    """Ancestral samples from a network, as a Dataset (column per variable)."""
    order = net.topological_order()
    columns = [Column(name, net.variable(name).states) for name in net.variable_names]
    col_index = {c.name: j for j, c in enumerate(columns)}
    codes = np.zeros((n, len(columns)), dtype=np.int64)
    for name in order:
        cpt = net.cpt(name)
        j = col_index[name]
        if not cpt.parents:
            cumulative = np.cumsum(cpt.table[0])
            draws = rng.random(n)
            codes[:, j] = np.searchsorted(cumulative, draws, side="right")
        else:
            rows = np.zeros(n, dtype=np.int64)
            for parent in cpt.parents:
                rows = rows * net.cardinality(parent) + codes[:, col_index[parent]]
            cumulative = np.cumsum(cpt.table, axis=1)
            draws = rng.random(n)
            row_cum = cumulative[rows]
            codes[:, j] = (draws[:, None] > row_cum).sum(axis=1)
        np.clip(codes[:, j], 0, net.cardinality(name) - 1, out=codes[:, j])
    return Dataset(columns, codes)


# -- CSV ingestion ------------------------------------------------------------------

def read_csv_dataset(text: str, columns: Sequence[Column],
                     required: Sequence[str] | None = None) -> list[dict[str, str]]:
    """Raw string records from CSV text, checking the header covers ``required``."""
    reader = csv.DictReader(io.StringIO(text))
    header = reader.fieldnames or []
    for needed in (required if required is not None else [c.name for c in columns]):
        if needed not in header:
            raise MissingColumn(f"CSV is missing column {needed!r}", column=needed)
    return [dict(row) for row in reader]


def parse_float_cell(raw: str, row: int, column: str,
                     minimum: float | None = None) -> float:
    try:
        value = float(raw)
    except (TypeError, ValueError):
        raise UnparseableCell(
            f"row {row}, column {column!r}: cannot parse {raw!r}",
            row=row,
            column=column,
            value=raw,
        ) from None
    if math.isnan(value) or math.isinf(value):
        raise UnparseableCell(
            f"row {row}, column {column!r}: non-finite value {raw!r}",
            row=row,
            column=column,
            value=raw,
        )
    if minimum is not None and value < minimum:
        raise UnparseableCell(
            f"row {row}, column {column!r}: {value} below minimum {minimum}",
            row=row,
            column=column,
            value=raw,
        )
    return value
