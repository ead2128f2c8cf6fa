"""Dense factors over ordered variable scopes.

Values are numpy arrays with one axis per scope variable, so the flattened
(C-order) layout has the last scope variable varying fastest, matching the
CPT row convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .network import Network


@dataclass(frozen=True)
class Factor:
    scope: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != len(self.scope):
            raise ValueError("factor values must have one axis per scope variable")
        object.__setattr__(self, "values", values)

    @property
    def size(self) -> int:
        return int(self.values.size)

    def axis(self, name: str) -> int:
        return self.scope.index(name)


def cpt_factor(net: Network, name: str) -> Factor:
    """The CPT of ``name`` as a factor with scope (parents..., child)."""
    cpt = net.cpt(name)
    scope = cpt.parents + (name,)
    shape = tuple(net.cardinality(v) for v in scope)
    return Factor(scope, cpt.table.reshape(shape))


def align(factor: Factor, full_scope: tuple[str, ...]) -> np.ndarray:
    """Broadcastable view of the factor's values over ``full_scope``."""
    missing = len(full_scope) - len(factor.scope)
    values = factor.values.reshape(factor.values.shape + (1,) * missing)
    positions = [full_scope.index(v) for v in factor.scope]
    return np.moveaxis(values, range(len(factor.scope)), positions)


def multiply(factors: list[Factor]) -> Factor:
    if not factors:
        return Factor((), np.asarray(1.0).reshape(()))
    full_scope: tuple[str, ...] = ()
    for f in factors:
        full_scope += tuple(v for v in f.scope if v not in full_scope)
    out = align(factors[0], full_scope)
    for f in factors[1:]:
        out = out * align(f, full_scope)
    # ascontiguousarray would promote 0-d results to 1-d
    out = np.ascontiguousarray(out) if np.ndim(out) else np.asarray(out, dtype=float)
    return Factor(full_scope, out)


def sum_out(factor: Factor, name: str) -> Factor:
    ax = factor.axis(name)
    scope = factor.scope[:ax] + factor.scope[ax + 1:]
    return Factor(scope, factor.values.sum(axis=ax))


def restrict(factor: Factor, name: str, state_index: int) -> Factor:
    """Condition on ``name`` taking the given state; drops the axis."""
    if name not in factor.scope:
        return factor
    ax = factor.axis(name)
    scope = factor.scope[:ax] + factor.scope[ax + 1:]
    return Factor(scope, np.take(factor.values, state_index, axis=ax))


def reorder(factor: Factor, scope: tuple[str, ...]) -> Factor:
    """Permute axes into the given scope order (same variable set)."""
    if scope == factor.scope:
        return factor
    perm = [factor.axis(v) for v in scope]
    return Factor(scope, np.ascontiguousarray(np.transpose(factor.values, perm)))
