"""Discrete variables, DAG structure and conditional probability tables.

Row convention used everywhere, including the JSON file format: CPT rows are
indexed row-major over the parent configuration with the *last parent varying
fastest*; columns follow the child's state order. Rows must sum to 1 within
``ROW_SUM_TOL`` and are never renormalized silently.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    CptShapeMismatch,
    CycleDetected,
    DanglingReference,
    InvalidEvidence,
    PartialAssignment,
    RowNotNormalized,
    SchemaError,
    UnknownVariable,
)

ROW_SUM_TOL = 1e-9

Evidence = Mapping[str, str]
Assignment = Mapping[str, str]


@dataclass(frozen=True)
class Variable:
    """A named discrete variable with an ordered list of state labels."""

    name: str
    states: tuple[str, ...]

    def __post_init__(self):
        if not self.name:
            raise SchemaError("variable name must be nonempty")
        if not isinstance(self.states, tuple):
            object.__setattr__(self, "states", tuple(self.states))
        if len(self.states) < 2:
            raise SchemaError(
                f"variable {self.name!r} needs at least 2 states", variable=self.name
            )
        if len(set(self.states)) != len(self.states):
            raise SchemaError(
                f"variable {self.name!r} has duplicate state labels", variable=self.name
            )

    @property
    def cardinality(self) -> int:
        return len(self.states)

    def state_index(self, label: str) -> int:
        try:
            return self.states.index(label)
        except ValueError:
            raise InvalidEvidence(
                f"{label!r} is not a state of {self.name!r}",
                variable=self.name,
                state=label,
                states=list(self.states),
            ) from None


@dataclass(frozen=True)
class Cpt:
    """P(child | parents) as a dense table, one row per parent configuration."""

    child: str
    parents: tuple[str, ...]
    table: np.ndarray  # shape (n_parent_configs, child_cardinality)

    def __post_init__(self):
        if not isinstance(self.parents, tuple):
            object.__setattr__(self, "parents", tuple(self.parents))
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2:
            raise CptShapeMismatch(
                f"CPT for {self.child!r} must be a 2-d row list", variable=self.child
            )
        table = table.copy()
        table.setflags(write=False)
        object.__setattr__(self, "table", table)

    @property
    def n_rows(self) -> int:
        return self.table.shape[0]

    def row_index(self, net: "Network", parent_states: Mapping[str, str]) -> int:
        """Row of the configuration ``parent_states`` (last parent fastest)."""
        idx = 0
        for parent in self.parents:
            var = net.variable(parent)
            try:
                state = parent_states[parent]
            except KeyError:
                raise PartialAssignment(
                    f"missing state for parent {parent!r} of {self.child!r}",
                    variable=parent,
                ) from None
            idx = idx * var.cardinality + var.state_index(state)
        return idx


class Network:
    """An immutable discrete Bayesian network.

    Construct through :func:`build_network`, which performs full validation.
    """

    def __init__(self, variables: Sequence[Variable], edges: Sequence[tuple[str, str]],
                 cpts: Mapping[str, Cpt], _validated: bool = False):
        if not _validated:
            raise TypeError("use build_network() to construct a Network")
        self._variables: dict[str, Variable] = {v.name: v for v in variables}
        self._edges: tuple[tuple[str, str], ...] = tuple(edges)
        self._cpts: dict[str, Cpt] = dict(cpts)
        self._parents: dict[str, tuple[str, ...]] = {
            name: cpt.parents for name, cpt in self._cpts.items()
        }
        self._children: dict[str, tuple[str, ...]] = {name: () for name in self._variables}
        child_acc: dict[str, list[str]] = {name: [] for name in self._variables}
        for parent, child in self._edges:
            child_acc[parent].append(child)
        self._children = {name: tuple(sorted(kids)) for name, kids in child_acc.items()}
        self._topo: tuple[str, ...] = tuple(_toposort(set(self._variables), self._parents))
        # elimination orders depend on structure only; shared across
        # same-structure copies produced by with_cpt
        self._order_cache: dict = {}

    # -- structure accessors ---------------------------------------------

    @property
    def variable_names(self) -> tuple[str, ...]:
        return tuple(self._variables)

    @property
    def edges(self) -> tuple[tuple[str, str], ...]:
        return self._edges

    def variable(self, name: str) -> Variable:
        try:
            return self._variables[name]
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}", variable=name) from None

    def __contains__(self, name: str) -> bool:
        return name in self._variables

    def __len__(self) -> int:
        return len(self._variables)

    def cpt(self, name: str) -> Cpt:
        self.variable(name)
        return self._cpts[name]

    def parents(self, name: str) -> tuple[str, ...]:
        self.variable(name)
        return self._parents[name]

    def children(self, name: str) -> tuple[str, ...]:
        self.variable(name)
        return self._children[name]

    def cardinality(self, name: str) -> int:
        return self.variable(name).cardinality

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Network):
            return NotImplemented
        return (
            self._variables == other._variables
            and set(self._edges) == set(other._edges)
            and self._cpts.keys() == other._cpts.keys()
            and all(
                self._cpts[k].parents == other._cpts[k].parents
                and np.array_equal(self._cpts[k].table, other._cpts[k].table)
                for k in self._cpts
            )
        )

    def with_cpt(self, cpt: Cpt) -> "Network":
        """Copy of the network with one CPT replaced (same structure)."""
        current = self.cpt(cpt.child)
        if current.parents != cpt.parents or current.table.shape != cpt.table.shape:
            raise CptShapeMismatch(
                f"replacement CPT for {cpt.child!r} changes structure", variable=cpt.child
            )
        cpts = dict(self._cpts)
        cpts[cpt.child] = cpt
        twin = Network(list(self._variables.values()), self._edges, cpts, _validated=True)
        twin._order_cache = self._order_cache
        return twin

    # -- graph queries ------------------------------------------------------

    def topological_order(self) -> list[str]:
        """Parents before children; ties broken by lexicographic name."""
        return list(self._topo)

    def ancestors(self, names: Iterable[str]) -> set[str]:
        seen: set[str] = set()
        stack = [n for n in names]
        while stack:
            node = stack.pop()
            for p in self._parents[node]:
                if p not in seen:
                    seen.add(p)
                    stack.append(p)
        return seen

    # -- probabilities ---------------------------------------------------------

    def joint_probability(self, assignment: Assignment) -> float:
        """Product of the CPT entries selected by a total assignment."""
        missing = [n for n in self._variables if n not in assignment]
        if missing:
            raise PartialAssignment(
                f"assignment misses {len(missing)} variable(s)", missing=sorted(missing)
            )
        validate_evidence(self, assignment)
        prob = 1.0
        for name, var in self._variables.items():
            cpt = self._cpts[name]
            row = cpt.row_index(self, assignment)
            prob *= cpt.table[row, var.state_index(assignment[name])]
        return float(prob)


def topological_order(net: Network) -> list[str]:
    return net.topological_order()


def joint_probability(net: Network, assignment: Assignment) -> float:
    return net.joint_probability(assignment)


def _toposort(names: set[str], parents: Mapping[str, tuple[str, ...]]) -> list[str]:
    remaining = dict.fromkeys(sorted(names))
    placed: set[str] = set()
    order: list[str] = []
    while remaining:
        ready = [n for n in remaining if all(p in placed for p in parents[n])]
        if not ready:
            raise CycleDetected(
                "edge set has a directed cycle", involved=sorted(remaining)
            )
        nxt = min(ready)
        order.append(nxt)
        placed.add(nxt)
        del remaining[nxt]
    return order


def validate_evidence(net: Network, evidence: Evidence) -> dict[str, str]:
    """Check every binding names a real variable and a real state."""
    checked: dict[str, str] = {}
    for name, state in evidence.items():
        var = net.variable(name)
        var.state_index(state)
        checked[name] = state
    return checked


def parent_configurations(net: Network, parents: Sequence[str]):
    """Yield parent-state dicts in row order (last parent fastest)."""
    if not parents:
        yield {}
        return
    cards = [net.cardinality(p) for p in parents]
    total = int(np.prod(cards))
    for row in range(total):
        combo: dict[str, str] = {}
        rem = row
        for parent, card in zip(reversed(parents), reversed(cards)):
            rem, idx = divmod(rem, card)
            combo[parent] = net.variable(parent).states[idx]
        yield combo


# -- construction -------------------------------------------------------------

def build_network(variables: Sequence[Variable],
                  edges: Iterable[tuple[str, str]],
                  cpts: Mapping[str, Cpt | Sequence[Sequence[float]]] | Sequence[Cpt]) -> Network:
    """Validate and assemble a Network.

    ``cpts`` may map child name to a Cpt or a bare table (parents taken from
    the edge set in the order the edges were declared), or be a list of Cpt.

    Raises CycleDetected, CptShapeMismatch, RowNotNormalized or
    DanglingReference; see :func:`collect_diagnostics` for a non-raising
    variant that reports every violation at once.
    """
    diagnostics = collect_diagnostics(variables, edges, cpts)
    if diagnostics:
        raise diagnostics[0]
    variables = list(variables)
    edge_list = list(edges)
    cpt_map = _normalize_cpts(variables, edge_list, cpts)
    return Network(variables, edge_list, cpt_map, _validated=True)


def collect_diagnostics(variables: Sequence[Variable],
                        edges: Iterable[tuple[str, str]],
                        cpts) -> list:
    """All construction errors, in a deterministic order (may be empty)."""
    errors: list = []
    variables = list(variables)
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        errors.append(SchemaError("duplicate variable names", variables=dupes))
        return errors
    known = set(names)
    edge_list = list(edges)

    for parent, child in edge_list:
        for end in (parent, child):
            if end not in known:
                errors.append(
                    DanglingReference(
                        f"edge ({parent!r}, {child!r}) references unknown variable {end!r}",
                        variable=end,
                    )
                )
    if errors:
        return errors

    parents_of: dict[str, list[str]] = {n: [] for n in known}
    for parent, child in edge_list:
        parents_of[child].append(parent)

    try:
        _toposort(known, {n: tuple(ps) for n, ps in parents_of.items()})
    except CycleDetected as exc:
        errors.append(exc)

    try:
        cpt_map = _normalize_cpts(variables, edge_list, cpts)
    except (SchemaError, CptShapeMismatch, DanglingReference) as exc:
        errors.append(exc)
        return errors

    var_by_name = {v.name: v for v in variables}
    for name in sorted(known):
        if name not in cpt_map:
            errors.append(SchemaError(f"variable {name!r} has no CPT", variable=name))
    for name, cpt in cpt_map.items():
        if name not in known:
            errors.append(
                DanglingReference(f"CPT for unknown variable {name!r}", variable=name)
            )
            continue
        if sorted(cpt.parents) != sorted(parents_of[name]):
            errors.append(
                CptShapeMismatch(
                    f"CPT parents {list(cpt.parents)} of {name!r} do not match "
                    f"graph parents {sorted(parents_of[name])}",
                    variable=name,
                )
            )
            continue
        for p in cpt.parents:
            if p not in known:
                errors.append(
                    DanglingReference(
                        f"CPT of {name!r} references unknown parent {p!r}", variable=p
                    )
                )
        expected_rows = 1
        for p in cpt.parents:
            expected_rows *= var_by_name[p].cardinality
        expected_cols = var_by_name[name].cardinality
        if cpt.table.shape != (expected_rows, expected_cols):
            errors.append(
                CptShapeMismatch(
                    f"CPT of {name!r} has shape {cpt.table.shape}, "
                    f"expected ({expected_rows}, {expected_cols})",
                    variable=name,
                    shape=list(cpt.table.shape),
                    expected=[expected_rows, expected_cols],
                )
            )
            continue
        if np.any(cpt.table < 0) or np.any(cpt.table > 1):
            bad = int(np.argwhere((cpt.table < 0) | (cpt.table > 1))[0][0])
            errors.append(
                RowNotNormalized(
                    f"CPT of {name!r} has entries outside [0, 1] (row {bad})",
                    variable=name,
                    row=bad,
                )
            )
            continue
        sums = cpt.table.sum(axis=1)
        bad_rows = np.argwhere(np.abs(sums - 1.0) > ROW_SUM_TOL)
        if bad_rows.size:
            row = int(bad_rows[0][0])
            errors.append(
                RowNotNormalized(
                    f"CPT row {row} of {name!r} sums to {sums[row]:.12g}, not 1",
                    variable=name,
                    row=row,
                    sum=float(sums[row]),
                )
            )
    return errors


def _normalize_cpts(variables, edges, cpts) -> dict[str, Cpt]:
    declared_parents: dict[str, list[str]] = {v.name: [] for v in variables}
    for parent, child in edges:
        if child in declared_parents:
            declared_parents[child].append(parent)
    if isinstance(cpts, Mapping):
        items = cpts.items()
    else:
        items = [(c.child, c) for c in cpts]
    out: dict[str, Cpt] = {}
    for name, value in items:
        if name in out:
            raise SchemaError(f"more than one CPT for {name!r}", variable=name)
        if isinstance(value, Cpt):
            out[name] = value
        else:
            out[name] = Cpt(name, tuple(declared_parents.get(name, ())), np.asarray(value, dtype=float))
    return out


# -- JSON file format ----------------------------------------------------------
#
# {"variables": [{"name": ..., "states": [...]}, ...],
#  "edges": [[parent, child], ...],
#  "cpts": {name: {"parents": [...], "table": [[...], ...]}, ...}}

def network_to_dict(net: Network) -> dict:
    return {
        "variables": [
            {"name": v.name, "states": list(v.states)} for v in map(net.variable, net.variable_names)
        ],
        "edges": [list(e) for e in sorted(net.edges)],
        "cpts": {
            name: {
                "parents": list(net.cpt(name).parents),
                "table": [[float(x) for x in row] for row in net.cpt(name).table],
            }
            for name in net.variable_names
        },
    }


def network_from_dict(doc: Mapping) -> Network:
    if not isinstance(doc, Mapping):
        raise SchemaError("network document must be a JSON object")
    for key in ("variables", "edges", "cpts"):
        if key not in doc:
            raise SchemaError(f"network document missing {key!r} key", key=key)
    try:
        variables = [Variable(v["name"], tuple(v["states"])) for v in doc["variables"]]
        edges = [(str(e[0]), str(e[1])) for e in doc["edges"]]
        cpts = {
            name: Cpt(name, tuple(spec["parents"]), np.asarray(spec["table"], dtype=float))
            for name, spec in doc["cpts"].items()
        }
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"malformed network document: {exc}") from exc
    return build_network(variables, edges, cpts)


def network_to_json(net: Network, indent: int | None = 2) -> str:
    return json.dumps(network_to_dict(net), indent=indent, sort_keys=True)


def network_from_json(text: str) -> Network:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return network_from_dict(doc)
