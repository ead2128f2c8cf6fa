"""Exact posteriors by variable elimination, with an enumeration oracle.

All queries are pure functions of (immutable network, evidence) and raise
:class:`ZeroProbabilityEvidence` instead of returning NaNs when the evidence
has probability zero. Probabilities are plain doubles; log-space is not used
(bundled models are small and well conditioned).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import factors as fx
from .errors import TooLargeForEnumeration, ZeroProbabilityEvidence
from .network import Evidence, Network, validate_evidence

ENUMERATION_LIMIT = 24


@dataclass(frozen=True)
class Posterior:
    """Distribution of one variable under some evidence."""

    variable: str
    distribution: dict[str, float]

    def __getitem__(self, state: str) -> float:
        return self.distribution[state]

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(self.distribution.values())


def _evidence_factors(net: Network, evidence: Evidence) -> list[fx.Factor]:
    """All CPT factors, conditioned on the evidence."""
    validate_evidence(net, evidence)
    out = []
    for name in net.variable_names:
        f = fx.cpt_factor(net, name)
        for ev_var, ev_state in evidence.items():
            if ev_var in f.scope:
                f = fx.restrict(f, ev_var, net.variable(ev_var).state_index(ev_state))
        out.append(f)
    return out


def elimination_order(net: Network, targets=(), evidence: Evidence = ()) -> list[str]:
    """Greedy min-fill order over all variables except targets and evidence.

    Ties are broken by (fill count, lexicographic name), so the order is
    deterministic across runs and platforms.
    """
    evidence_vars = set(evidence.keys()) if hasattr(evidence, "keys") else set(evidence)
    cache_key = (tuple(targets), frozenset(evidence_vars))
    cached = net._order_cache.get(cache_key)
    if cached is not None:
        return list(cached)
    keep = set(targets) | evidence_vars
    neighbors: dict[str, set[str]] = {v: set() for v in net.variable_names if v not in evidence_vars}
    for name in net.variable_names:
        clique = [v for v in (*net.parents(name), name) if v not in evidence_vars]
        for a in clique:
            for b in clique:
                if a != b:
                    neighbors[a].add(b)
    order: list[str] = []
    remaining = {v for v in neighbors if v not in keep}
    while remaining:
        best = None
        for v in sorted(remaining):
            nbrs = [u for u in neighbors[v] if u != v]
            fill = sum(
                1
                for i, a in enumerate(nbrs)
                for b in nbrs[i + 1:]
                if b not in neighbors[a]
            )
            if best is None or fill < best[0]:
                best = (fill, v)
        _, chosen = best
        nbrs = list(neighbors[chosen])
        for a in nbrs:
            neighbors[a].discard(chosen)
            for b in nbrs:
                if a != b:
                    neighbors[a].add(b)
        del neighbors[chosen]
        remaining.discard(chosen)
        order.append(chosen)
    net._order_cache[cache_key] = tuple(order)
    return order


def _eliminate(net: Network, targets: tuple[str, ...], evidence: Evidence,
               order: list[str] | None = None) -> fx.Factor:
    """Unnormalized factor over ``targets`` after summing everything else out."""
    if order is None:
        order = elimination_order(net, targets, evidence)
    pool = _evidence_factors(net, evidence)
    for var in order:
        touching = [f for f in pool if var in f.scope]
        if not touching:
            continue
        pool = [f for f in pool if var not in f.scope]
        pool.append(fx.sum_out(fx.multiply(touching), var))
    result = fx.multiply(pool)
    # evidence variables were dropped from every scope; only targets remain
    return fx.reorder(result, tuple(t for t in targets if t in result.scope))


def induced_width(net: Network, targets=(), evidence: Evidence = {}) -> int:
    """Largest intermediate factor scope minus one, under the min-fill order."""
    order = elimination_order(net, targets, evidence)
    pool = [set(f.scope) for f in _evidence_factors(net, evidence)]
    width = 0
    for var in order:
        touching = [s for s in pool if var in s]
        if not touching:
            continue
        merged = set().union(*touching)
        width = max(width, len(merged) - 1)
        pool = [s for s in pool if var not in s]
        pool.append(merged - {var})
    return width


def max_factor_scope(net: Network, targets=(), evidence: Evidence = {}) -> int:
    return induced_width(net, targets, evidence) + 1


def joint_posterior(net: Network, targets, evidence: Evidence,
                    order: list[str] | None = None) -> tuple[fx.Factor, float]:
    """Normalized joint posterior over ``targets`` plus P(evidence).

    Observed targets are kept as point-mass axes so the factor always covers
    the full requested scope.
    """
    targets = tuple(targets)
    validate_evidence(net, evidence)
    free = tuple(t for t in targets if t not in evidence)
    raw = _eliminate(net, free, evidence)
    p_evidence = float(raw.values.sum())
    if p_evidence <= 0.0:
        raise ZeroProbabilityEvidence(
            "evidence has probability 0", evidence=dict(evidence)
        )
    values = raw.values / p_evidence
    factor = fx.Factor(raw.scope, values)
    for t in targets:
        if t in evidence:
            var = net.variable(t)
            point = np.zeros(var.cardinality)
            point[var.state_index(evidence[t])] = 1.0
            factor = fx.multiply([factor, fx.Factor((t,), point)])
    return fx.reorder(factor, targets), p_evidence


def marginal(net: Network, target: str, evidence: Evidence = {}) -> Posterior:
    """Exact posterior of one variable given hard evidence."""
    var = net.variable(target)
    factor, _ = joint_posterior(net, (target,), evidence)
    return Posterior(target, {s: float(p) for s, p in zip(var.states, factor.values)})


def probability_of_evidence(net: Network, evidence: Evidence) -> float:
    """P(evidence); empty evidence yields 1. Zero is a valid return."""
    validate_evidence(net, evidence)
    if not evidence:
        return 1.0
    raw = _eliminate(net, (), evidence)
    return float(raw.values.sum())


def posterior_all(net: Network, evidence: Evidence = {}) -> dict[str, Posterior]:
    """Posterior of every variable under the same evidence."""
    validate_evidence(net, evidence)
    if probability_of_evidence(net, evidence) <= 0.0 and evidence:
        raise ZeroProbabilityEvidence(
            "evidence has probability 0", evidence=dict(evidence)
        )
    return {name: marginal(net, name, evidence) for name in net.variable_names}


# -- enumeration oracle ---------------------------------------------------------

def full_joint(net: Network) -> fx.Factor:
    """The complete joint distribution as one factor (guarded by size)."""
    if len(net) > ENUMERATION_LIMIT:
        raise TooLargeForEnumeration(
            f"{len(net)} variables exceeds the enumeration guard of {ENUMERATION_LIMIT}",
            variables=len(net),
        )
    return fx.multiply([fx.cpt_factor(net, name) for name in net.variable_names])


def brute_force_marginal(net: Network, target: str, evidence: Evidence = {}) -> Posterior:
    """Posterior by full joint enumeration; the test oracle for marginal()."""
    var = net.variable(target)
    validate_evidence(net, evidence)
    joint = full_joint(net)
    for ev_var, ev_state in evidence.items():
        joint = fx.restrict(joint, ev_var, net.variable(ev_var).state_index(ev_state))
    for other in list(joint.scope):
        if other != target:
            joint = fx.sum_out(joint, other)
    if target in evidence:
        total = float(joint.values.sum()) if joint.scope == () else float(joint.values)
        if total <= 0.0:
            raise ZeroProbabilityEvidence(
                "evidence has probability 0", evidence=dict(evidence)
            )
        dist = {s: (1.0 if s == evidence[target] else 0.0) for s in var.states}
        return Posterior(target, dist)
    total = float(joint.values.sum())
    if total <= 0.0:
        raise ZeroProbabilityEvidence(
            "evidence has probability 0", evidence=dict(evidence)
        )
    values = joint.values / total
    return Posterior(target, {s: float(p) for s, p in zip(var.states, values)})
