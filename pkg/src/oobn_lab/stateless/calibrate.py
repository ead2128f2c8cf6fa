"""Calibrate elicited CPT cells toward published endpoint values.

The exact tables behind the published model are not available, so the
bundle starts from documented priors and is tuned: coordinate descent over
the free cells, where each step inverts the (rational, linear-over-linear)
response of the target query to a single cell under proportional
co-variation and therefore solves that one-dimensional problem exactly.

Learned and deterministic CPTs are never touched. A target that cannot be
met is reported, not forced: the report marks it unsatisfied with its
residual and the run still returns the best bundle found.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..errors import SchemaError, ZeroProbabilityEvidence
from ..network import Network, parent_configurations
from ..sensitivity import DEGENERATE_TOL, ParameterRef, covary_cpt_row
from ..inference import probability_of_evidence
from .bundle import FREE_TAGS, ModelBundle, bundle_from_dict

CLAMP = (0.001, 0.999)  # keep calibrated cells away from degenerate rows


@dataclass(frozen=True)
class CalibrationTarget:
    name: str
    kind: str  # "posterior" | "evidence_probability"
    query: dict[str, str]
    evidence: dict[str, str]
    value: float
    tolerance: float
    best_effort: bool = False  # may only spend slack left by strict targets

    @classmethod
    def from_dict(cls, bundle: ModelBundle, doc: Mapping) -> "CalibrationTarget":
        try:
            kind = doc.get("kind", "posterior")
            if kind not in ("posterior", "evidence_probability"):
                raise SchemaError(f"unknown target kind {kind!r}", kind=kind)
            query = bundle.resolve_evidence(doc.get("query", {}))
            evidence = bundle.resolve_evidence(doc.get("evidence", {}))
            if kind == "posterior" and not query:
                raise SchemaError("posterior target needs a nonempty query")
            if kind == "evidence_probability" and not evidence:
                raise SchemaError("evidence_probability target needs evidence")
            return cls(
                name=str(doc.get("name", "target")),
                kind=kind,
                query=query,
                evidence=evidence,
                value=float(doc["value"]),
                tolerance=float(doc.get("tolerance", 0.01)),
                best_effort=bool(doc.get("best_effort", False)),
            )
        except KeyError as exc:
            raise SchemaError(f"calibration target missing {exc}", target=dict(doc)) from exc


@dataclass
class CalibrationReport:
    converged: bool
    sweeps: int
    targets: list[dict] = field(default_factory=list)
    changed_cells: list[dict] = field(default_factory=list)

    @property
    def unsatisfied(self) -> list[str]:
        return [t["name"] for t in self.targets if not t["satisfied"]]

    def to_dict(self) -> dict:
        return {
            "schema": "calibration-report/1",
            "converged": self.converged,
            "sweeps": self.sweeps,
            "unsatisfied": self.unsatisfied,
            "targets": self.targets,
            "changed_cells": self.changed_cells,
        }


def evaluate_target(net: Network, target: CalibrationTarget) -> float:
    if target.kind == "evidence_probability":
        return probability_of_evidence(net, target.evidence)
    p_evidence = probability_of_evidence(net, target.evidence)
    if p_evidence <= 0.0:
        raise ZeroProbabilityEvidence(
            "target evidence has probability 0", evidence=target.evidence
        )
    return probability_of_evidence(net, {**target.evidence, **target.query}) / p_evidence


def _affine(net: Network, event: Mapping[str, str], ref: ParameterRef) -> tuple[float, float]:
    """(value at t=0, value at t=1) of P(event) as a function of the cell."""
    p0 = probability_of_evidence(net.with_cpt(covary_cpt_row(net, ref, 0.0)), event)
    p1 = probability_of_evidence(net.with_cpt(covary_cpt_row(net, ref, 1.0)), event)
    return p0, p1


def _response(net: Network, target: CalibrationTarget, ref: ParameterRef):
    """Coefficients of f(t) = (alpha t + beta) / (gamma t + delta) for a target."""
    if target.kind == "evidence_probability":
        n0, n1 = _affine(net, target.evidence, ref)
        return n1 - n0, n0, 0.0, 1.0
    n0, n1 = _affine(net, {**target.evidence, **target.query}, ref)
    if target.evidence:
        d0, d1 = _affine(net, target.evidence, ref)
    else:
        d0, d1 = 1.0, 1.0
    return n1 - n0, n0, d1 - d0, d0


def _solve(alpha: float, beta: float, gamma: float, delta: float,
           value: float) -> float | None:
    denom = alpha - value * gamma
    if abs(denom) < 1e-14:
        return None
    return (value * delta - beta) / denom


def _candidate_cells(net: Network, free_vars: set[str],
                     target: CalibrationTarget) -> list[ParameterRef]:
    involved = set(target.query) | set(target.evidence)
    relevant = involved | net.ancestors(involved)
    refs: list[ParameterRef] = []
    for name in sorted(free_vars & relevant):
        cpt = net.cpt(name)
        for combo in parent_configurations(net, cpt.parents):
            parent_states = tuple(combo[p] for p in cpt.parents)
            for state in net.variable(name).states:
                refs.append(ParameterRef(name, parent_states, state))
    return refs


def _free_variables(bundle: ModelBundle) -> set[str]:
    provenance = bundle.provenance()
    free: set[str] = set()
    seen_templates: dict[tuple[str, str], int] = {}
    for qualified, origin in bundle.flat.origins.items():
        seen_templates[origin] = seen_templates.get(origin, 0) + 1
    for qualified in bundle.network.variable_names:
        origin = bundle.flat.origins[qualified]
        key = f"{origin[0]}.{origin[1]}"
        if provenance.get(key) in FREE_TAGS:
            if seen_templates[origin] > 1:
                raise SchemaError(
                    f"template CPT {key} is instantiated {seen_templates[origin]} "
                    "times; calibration requires single instantiation",
                    cpt=key,
                )
            free.add(qualified)
    return free


def _rebuild_bundle(bundle: ModelBundle, net: Network, changed: set[str]) -> ModelBundle:
    doc = bundle.to_dict()
    changed_templates: set[str] = set()
    for qualified in changed:
        template, local = bundle.flat.origins[qualified]
        table = net.cpt(qualified).table
        doc["templates"][template]["cpts"][local]["table"] = [
            [float(x) for x in row] for row in table
        ]
        changed_templates.add(f"{template}.{local}")
    provenance = dict(doc["metadata"].get("provenance", {}))
    for key in changed_templates:
        if provenance.get(key) == "elicited":
            provenance[key] = "calibrated"
    doc["metadata"]["provenance"] = provenance
    return bundle_from_dict(json.loads(json.dumps(doc)))


def calibrate(bundle: ModelBundle, targets: Sequence[Mapping] | None = None,
              max_sweeps: int = 200,
              free_refs: Sequence[ParameterRef] | None = None,
              verbose: bool = False
              ) -> tuple[ModelBundle, CalibrationReport]:
    """Tune free cells until every target sits inside its tolerance.

    Returns the calibrated bundle and a residual report; an unchanged
    bundle comes back identical (same object) when every target is already
    satisfied.
    """
    raw_targets = bundle.calibration_targets if targets is None else list(targets)
    parsed = [CalibrationTarget.from_dict(bundle, t) for t in raw_targets]
    net = bundle.network
    if free_refs is None:
        free_vars = _free_variables(bundle)
        candidates_for = {
            id(t): _candidate_cells(net, free_vars, t) for t in parsed
        }
    else:
        free_vars = {ref.variable for ref in free_refs}
        candidates_for = {id(t): list(free_refs) for t in parsed}

    strict = [t for t in parsed if not t.best_effort]
    best_effort = [t for t in parsed if t.best_effort]
    changed: set[str] = set()
    changed_cells: list[dict] = []

    def violated(target: CalibrationTarget, network: Network) -> bool:
        try:
            return abs(evaluate_target(network, target) - target.value) > target.tolerance
        except ZeroProbabilityEvidence:
            return True

    def scored_candidates(target: CalibrationTarget, network: Network):
        """Cells sorted by (achieved error, move size); exact solves first."""
        options = []
        for index, ref in enumerate(candidates_for[id(target)]):
            t0 = ref.current_value(network)
            if 1.0 - t0 <= DEGENERATE_TOL:
                continue
            alpha, beta, gamma, delta = _response(network, target, ref)
            t_star = _solve(alpha, beta, gamma, delta, target.value)
            if t_star is None:
                continue
            t_new = min(max(t_star, CLAMP[0]), CLAMP[1])
            denom = gamma * t_new + delta
            if denom <= 0.0:
                continue
            achieved = (alpha * t_new + beta) / denom
            options.append((abs(achieved - target.value), abs(t_new - t0), index,
                            ref, t_new))
        options.sort(key=lambda item: item[:3])
        return options

    def record(ref, t_new: float, target: CalibrationTarget):
        changed.add(ref.variable)
        changed_cells.append(
            {
                "variable": ref.variable,
                "parent_states": list(ref.parent_states),
                "state": ref.state,
                "value": t_new,
                "target": target.name,
            }
        )

    sweeps = 0
    converged = False
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        any_violation = False
        any_progress = False

        # phase 1: strict targets. Each step solves one target exactly in one
        # cell, choosing among the near-exact solvers the cell that least
        # disturbs the other strict targets (otherwise two targets sharing
        # their most effective cell ping-pong it forever).
        for target in strict:
            try:
                current = evaluate_target(net, target)
            except ZeroProbabilityEvidence:
                any_violation = True
                continue
            error = abs(current - target.value)
            if error <= target.tolerance:
                continue
            any_violation = True
            options = scored_candidates(target, net)
            if not options or options[0][0] >= error * 0.999:
                continue  # no cell makes progress on this target
            exact = [o for o in options if o[0] <= target.tolerance * 0.5][:10]
            shortlist = exact if exact else options[:3]
            best = None  # ((damage, err, move), ref, t_new, network)
            for err_opt, move, _, ref, t_new in shortlist:
                tentative = net.with_cpt(covary_cpt_row(net, ref, t_new))
                damage = 0.0
                for other in strict:
                    if other is target:
                        continue
                    try:
                        value = evaluate_target(tentative, other)
                    except ZeroProbabilityEvidence:
                        damage += 1.0
                        continue
                    damage += max(0.0, abs(value - other.value) - other.tolerance)
                key = (round(damage, 9), err_opt, move)
                if best is None or key < best[0]:
                    best = (key, ref, t_new, tentative)
            _, ref, t_new, net = best
            record(ref, t_new, target)
            if verbose:
                print(f"    sweep {sweeps}: {target.name} {current:.4f}->"
                      f"{target.value:.4f} via {ref.variable}"
                      f"[{','.join(ref.parent_states)}]={ref.state} -> {t_new:.4f} "
                      f"(damage {best[0][0]:.4f})")
            any_progress = True

        # phase 2: best-effort targets may only use slack; a step that knocks
        # any strict target out of tolerance is rolled back
        if not any_violation:
            for target in best_effort:
                if not violated(target, net):
                    continue
                error = abs(evaluate_target(net, target) - target.value)
                applied = False
                for achieved_error, _, _, ref, t_new in scored_candidates(target, net)[:8]:
                    if achieved_error >= error * 0.999:
                        break
                    tentative = net.with_cpt(covary_cpt_row(net, ref, t_new))
                    if any(violated(s, tentative) for s in strict):
                        continue
                    net = tentative
                    record(ref, t_new, target)
                    if verbose:
                        print(f"    sweep {sweeps}: [best-effort] {target.name} via "
                              f"{ref.variable}[{','.join(ref.parent_states)}]="
                              f"{ref.state} -> {t_new:.4f}")
                    applied = True
                    break
                if applied:
                    any_progress = True
                else:
                    any_violation = True

        if not any_violation:
            converged = True
            break
        if not any_progress:
            break  # stuck: residuals are reported below

    entries = []
    for target in parsed:
        try:
            value = evaluate_target(net, target)
            residual = value - target.value
            satisfied = abs(residual) <= target.tolerance
            note = "" if satisfied else (
                f"target not met at tolerance {target.tolerance}: "
                f"residual {residual:+.6f} under the fixed structure"
            )
        except ZeroProbabilityEvidence:
            value, residual, satisfied = None, None, False
            note = "target evidence has probability 0"
        entries.append(
            {
                "name": target.name,
                "kind": target.kind,
                "query": target.query,
                "evidence": target.evidence,
                "target": target.value,
                "tolerance": target.tolerance,
                "value": value,
                "residual": residual,
                "satisfied": satisfied,
                "note": note,
            }
        )
    converged = converged or all(e["satisfied"] for e in entries)
    report = CalibrationReport(
        converged=converged,
        sweeps=sweeps,
        targets=entries,
        changed_cells=changed_cells,
    )
    if not changed:
        return bundle, report
    return _rebuild_bundle(bundle, net, changed), report
