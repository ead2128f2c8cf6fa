"""Parameter and evidence sensitivity analysis.

One-way parameter sensitivity uses proportional co-variation: when a CPT
entry is set to t, the remaining entries of the same row are scaled by
(1 - t) / (1 - t0) so the row stays normalized. Under this scheme the
posterior of a hypothesis is a ratio of two functions linear in t,

    f(t) = (alpha * t + beta) / (gamma * t + delta),

whose coefficients are recovered exactly from inference runs at t = 0 and
t = 1. Coefficients are scaled so the denominator equals one at t0; with
empty evidence this yields gamma = 0, delta = 1 exactly.

The reported "sensitivity value" is |f'(t0)|. The underlying methodology
uses the term without fixing a formula; ranking uses |f'(t0)| while f(t0)
is reported alongside, so either reading is available downstream.

Information metrics (entropy, mutual information) are in bits (log base 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateRow,
    HypothesisObserved,
    OverlappingSets,
    SchemaError,
    ZeroProbabilityEvidence,
)
from .inference import _eliminate, joint_posterior, marginal
from .network import Cpt, Evidence, Network, validate_evidence

DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class ParameterRef:
    """One CPT cell: variable, parent states (in CPT parent order), state."""

    variable: str
    parent_states: tuple[str, ...]
    state: str

    def row_index(self, net: Network) -> int:
        cpt = net.cpt(self.variable)
        if len(self.parent_states) != len(cpt.parents):
            raise SchemaError(
                f"parameter ref for {self.variable!r} names "
                f"{len(self.parent_states)} parent states, CPT has "
                f"{len(cpt.parents)} parents",
                variable=self.variable,
            )
        return cpt.row_index(net, dict(zip(cpt.parents, self.parent_states)))

    def column_index(self, net: Network) -> int:
        return net.variable(self.variable).state_index(self.state)

    def current_value(self, net: Network) -> float:
        return float(net.cpt(self.variable).table[self.row_index(net), self.column_index(net)])


@dataclass(frozen=True)
class SensitivityFunction:
    """f(t) = (alpha*t + beta) / (gamma*t + delta), with f(t0) the current posterior."""

    alpha: float
    beta: float
    gamma: float
    delta: float
    t0: float
    hypothesis: tuple[str, str]
    evidence: dict[str, str]
    parameter: ParameterRef

    def __call__(self, t: float) -> float:
        return (self.alpha * t + self.beta) / (self.gamma * t + self.delta)

    def derivative(self, t: float) -> float:
        num = self.alpha * self.delta - self.beta * self.gamma
        return num / (self.gamma * t + self.delta) ** 2

    @property
    def sensitivity_value(self) -> float:
        return abs(self.derivative(self.t0))


def covary_cpt_row(net: Network, ref: ParameterRef, t: float) -> Cpt:
    """CPT with the referenced entry set to t under proportional co-variation.

    The other entries of the row scale by (1 - t) / (1 - t0); a row whose
    current entry is 1 cannot be co-varied away from 1.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter value {t} outside [0, 1]")
    cpt = net.cpt(ref.variable)
    row = ref.row_index(net)
    col = ref.column_index(net)
    t0 = float(cpt.table[row, col])
    if t == t0:
        return cpt
    if 1.0 - t0 <= DEGENERATE_TOL:
        if t == 1.0:
            return cpt
        raise DegenerateRow(
            f"entry {ref.state!r} of row {row} in {ref.variable!r} is 1; "
            "the rest of the row cannot be scaled",
            variable=ref.variable,
            row=row,
        )
    table = np.array(cpt.table, dtype=float)
    scale = (1.0 - t) / (1.0 - t0)
    table[row, :] *= scale
    table[row, col] = t
    # exact renormalization guards against accumulated rounding
    table[row, :] /= table[row, :].sum()
    return Cpt(cpt.child, cpt.parents, table)


def _network_at(net: Network, ref: ParameterRef, t: float) -> Network:
    return net.with_cpt(covary_cpt_row(net, ref, t))


def _unnormalized_hypothesis(net: Network, variable: str, evidence: Evidence) -> tuple[np.ndarray, float]:
    """Unnormalized P(variable, evidence) per state and P(evidence)."""
    raw = _eliminate(net, (variable,), evidence)
    values = np.asarray(raw.values, dtype=float)
    return values, float(values.sum())


def sensitivity_function(net: Network, hypothesis: tuple[str, str],
                         evidence: Evidence, ref: ParameterRef) -> SensitivityFunction:
    """Recover the sensitivity function of P(hypothesis | evidence) in one cell."""
    h_var, h_state = hypothesis
    validate_evidence(net, evidence)
    net.variable(h_var).state_index(h_state)
    if h_var in evidence:
        raise HypothesisObserved(
            f"hypothesis variable {h_var!r} is observed", variable=h_var
        )
    h_index = net.variable(h_var).state_index(h_state)
    t0 = ref.current_value(net)
    if 1.0 - t0 <= DEGENERATE_TOL:
        raise DegenerateRow(
            f"parameter {ref} has value 1; co-variation undefined",
            variable=ref.variable,
        )

    n = np.empty(2)
    d = np.empty(2)
    for i, t in enumerate((0.0, 1.0)):
        at_t = _network_at(net, ref, t)
        values, total = _unnormalized_hypothesis(at_t, h_var, evidence)
        n[i] = values[h_index]
        d[i] = total

    alpha, beta = n[1] - n[0], n[0]
    if evidence:
        gamma, delta = d[1] - d[0], d[0]
    else:
        # total probability is identically 1 for every re-quantification
        gamma, delta = 0.0, 1.0
    denom_at_t0 = gamma * t0 + delta
    if denom_at_t0 <= 0.0:
        raise ZeroProbabilityEvidence(
            "evidence has probability 0 at the current parameter value",
            evidence=dict(evidence),
        )
    return SensitivityFunction(
        alpha=float(alpha / denom_at_t0),
        beta=float(beta / denom_at_t0),
        gamma=float(gamma / denom_at_t0),
        delta=float(delta / denom_at_t0),
        t0=t0,
        hypothesis=(h_var, h_state),
        evidence=dict(evidence),
        parameter=ref,
    )


def sensitivity_value(sf: SensitivityFunction) -> float:
    """|f'(t0)| = |alpha*delta - beta*gamma| / (gamma*t0 + delta)^2."""
    return sf.sensitivity_value


def all_parameter_refs(net: Network) -> list[ParameterRef]:
    """Every CPT cell, in (variable, row, state) order."""
    from .network import parent_configurations

    refs: list[ParameterRef] = []
    for name in sorted(net.variable_names):
        cpt = net.cpt(name)
        for combo in parent_configurations(net, cpt.parents):
            parent_states = tuple(combo[p] for p in cpt.parents)
            for state in net.variable(name).states:
                refs.append(ParameterRef(name, parent_states, state))
    return refs


def ranked_sensitivity_functions(net: Network, hypothesis: tuple[str, str],
                                 evidence: Evidence,
                                 candidate_refs: Sequence[ParameterRef] | None = None
                                 ) -> list[tuple[ParameterRef, SensitivityFunction]]:
    """Sensitivity functions for the candidates, ranked by |f'(t0)| descending.

    Cells with current value 1 are skipped: proportional co-variation is
    undefined there (deterministic rows stay deterministic). Ties break by
    (variable, row, state) for reproducible output.
    """
    h_var, _ = hypothesis
    if h_var in evidence:
        raise HypothesisObserved(
            f"hypothesis variable {h_var!r} is observed", variable=h_var
        )
    if candidate_refs is None:
        candidate_refs = all_parameter_refs(net)
    scored: list[tuple[float, str, int, int, ParameterRef, SensitivityFunction]] = []
    for ref in candidate_refs:
        t0 = ref.current_value(net)
        if 1.0 - t0 <= DEGENERATE_TOL:
            continue
        sf = sensitivity_function(net, hypothesis, evidence, ref)
        scored.append(
            (sf.sensitivity_value, ref.variable, ref.row_index(net),
             ref.column_index(net), ref, sf)
        )
    scored.sort(key=lambda item: (-item[0], item[1], item[2], item[3]))
    return [(ref, sf) for _, _, _, _, ref, sf in scored]


def rank_parameters(net: Network, hypothesis: tuple[str, str], evidence: Evidence,
                    candidate_refs: Sequence[ParameterRef] | None = None
                    ) -> list[tuple[ParameterRef, float]]:
    """Candidates ranked by descending |f'(t0)|; see ranked_sensitivity_functions."""
    return [
        (ref, sf.sensitivity_value)
        for ref, sf in ranked_sensitivity_functions(net, hypothesis, evidence, candidate_refs)
    ]


@dataclass(frozen=True)
class EvidenceSensitivityRange:
    """Extremes of the hypothesis posterior over single findings of one variable."""

    variable: str
    min_posterior: float
    max_posterior: float
    current: float

    @property
    def width(self) -> float:
        return self.max_posterior - self.min_posterior


def evidence_sensitivity_ranges(net: Network, hypothesis: tuple[str, str],
                                evidence: Evidence) -> list[EvidenceSensitivityRange]:
    """Per-variable min/max of P(hypothesis | evidence + one extra finding).

    Findings that contradict the evidence (probability 0) are skipped.
    Sorted by descending range width, then variable name.
    """
    h_var, h_state = hypothesis
    validate_evidence(net, evidence)
    if h_var in evidence:
        raise HypothesisObserved(
            f"hypothesis variable {h_var!r} is observed", variable=h_var
        )
    h_index = net.variable(h_var).state_index(h_state)
    current = marginal(net, h_var, evidence)[h_state]
    ranges: list[EvidenceSensitivityRange] = []
    for name in net.variable_names:
        if name == h_var or name in evidence:
            continue
        raw = _eliminate(net, (name, h_var), evidence)
        values = np.asarray(raw.values, dtype=float)  # axes: (name, h_var)
        per_finding = []
        for i in range(net.cardinality(name)):
            mass = float(values[i].sum())
            if mass <= 0.0:
                continue
            per_finding.append(float(values[i, h_index]) / mass)
        if not per_finding:
            continue
        ranges.append(
            EvidenceSensitivityRange(
                variable=name,
                min_posterior=min(per_finding),
                max_posterior=max(per_finding),
                current=current,
            )
        )
    ranges.sort(key=lambda r: (-r.width, r.variable))
    return ranges


def entropy(net: Network, variable: str, evidence: Evidence = {}) -> float:
    """H(variable | evidence) in bits, with 0 * log 0 = 0."""
    posterior = marginal(net, variable, evidence)
    h = 0.0
    for p in posterior.distribution.values():
        if p > 0.0:
            h -= p * math.log2(p)
    return h


def mutual_information(net: Network, x: str, y: str, evidence: Evidence = {}) -> float:
    """I(x; y | evidence) in bits from the pairwise joint posterior."""
    if x == y:
        raise OverlappingSets("mutual information needs two distinct variables",
                              overlap=[x])
    joint, _ = joint_posterior(net, (x, y), evidence)
    p_xy = np.asarray(joint.values, dtype=float)
    p_x = p_xy.sum(axis=1)
    p_y = p_xy.sum(axis=0)
    mi = 0.0
    for i in range(p_xy.shape[0]):
        for j in range(p_xy.shape[1]):
            p = p_xy[i, j]
            if p > 0.0:
                mi += p * math.log2(p / (p_x[i] * p_y[j]))
    return max(0.0, float(mi))
