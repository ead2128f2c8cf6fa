"""Report builders shared by the CLI and the HTTP service.

Both front ends serialize these dicts through
:func:`oobn_lab.reporting.render_report`, which is what makes their bodies
byte-identical for the same request.
"""

from __future__ import annotations

from typing import Mapping

from ..errors import HypothesisObserved
from ..inference import marginal, posterior_all, probability_of_evidence
from ..sensitivity import (
    evidence_sensitivity_ranges,
    ranked_sensitivity_functions,
)
from .bundle import ModelBundle


def build_infer_report(bundle: ModelBundle, evidence: Mapping[str, str]) -> dict:
    resolved = bundle.resolve_evidence(evidence)
    posteriors = posterior_all(bundle.network, resolved)
    return {
        "schema": "infer-response/1",
        "model": bundle.bundle_hash,
        "evidence": resolved,
        "probability_of_evidence": probability_of_evidence(bundle.network, resolved),
        "posteriors": {
            name: dict(posteriors[name].distribution)
            for name in bundle.network.variable_names
        },
    }


def build_model_report(bundle: ModelBundle) -> dict:
    """Structure, states and presets; what an interactive client needs."""
    flat = bundle.flat
    titles = bundle.metadata.get("submodel_titles", {})
    ordinal = set(bundle.metadata.get("ordinal_variables", []))
    variables = []
    for name in bundle.network.variable_names:
        prefix, _, leaf = name.rpartition(".")
        variables.append(
            {
                "name": name,
                "leaf": leaf,
                "states": list(bundle.network.variable(name).states),
                "submodel": prefix,
                "submodel_title": titles.get(prefix, prefix or "top"),
                "ordinal": leaf in ordinal,
            }
        )
    return {
        "schema": "model-structure/1",
        "bundle_hash": bundle.bundle_hash,
        "title": bundle.metadata.get("title", ""),
        "top": bundle.library.top,
        "variables": variables,
        "edges": [list(edge) for edge in sorted(bundle.network.edges)],
        "headline_metrics": [
            {"name": m.name, "variable": m.variable, "state": m.state}
            for m in bundle.headline_metrics()
        ],
        "presets": {
            name: {
                "description": p.description,
                "evidence": bundle.resolve_evidence(p.evidence),
            }
            for name, p in sorted(bundle.presets.items())
        },
    }


def build_sensitivity_report(bundle: ModelBundle, hypothesis: tuple[str, str],
                             evidence: Mapping[str, str],
                             scenario: str | None = None,
                             include_parameters: bool = True,
                             include_evidence_ranges: bool = True,
                             top: int | None = None) -> dict:
    h_var = bundle.resolve_variable(hypothesis[0])
    h_state = hypothesis[1]
    bundle.network.variable(h_var).state_index(h_state)
    resolved = bundle.resolve_evidence(evidence)
    if h_var in resolved:
        raise HypothesisObserved(
            f"hypothesis variable {h_var!r} is observed in the scenario",
            variable=h_var,
        )
    report: dict = {
        "schema": "sensitivity-report/1",
        "bundle_hash": bundle.bundle_hash,
        "hypothesis": {"variable": h_var, "state": h_state},
        "scenario": scenario,
        "evidence": resolved,
        "posterior": marginal(bundle.network, h_var, resolved)[h_state],
    }
    if include_parameters:
        ranked = ranked_sensitivity_functions(bundle.network, (h_var, h_state), resolved)
        if top is not None:
            ranked = ranked[:top]
        entries = []
        for ref, sf in ranked:
            entries.append(
                {
                    "parameter": {
                        "variable": ref.variable,
                        "parent_states": {
                            parent: state
                            for parent, state in zip(
                                bundle.network.cpt(ref.variable).parents,
                                ref.parent_states,
                            )
                        },
                        "state": ref.state,
                    },
                    "alpha": sf.alpha,
                    "beta": sf.beta,
                    "gamma": sf.gamma,
                    "delta": sf.delta,
                    "t0": sf.t0,
                    "f_t0": sf(sf.t0),
                    "sensitivity_value": sf.sensitivity_value,
                }
            )
        report["parameter_sensitivity"] = entries
    if include_evidence_ranges:
        report["evidence_sensitivity"] = [
            {
                "variable": r.variable,
                "min": r.min_posterior,
                "max": r.max_posterior,
                "current": r.current,
            }
            for r in evidence_sensitivity_ranges(bundle.network, (h_var, h_state), resolved)
        ]
    return report
