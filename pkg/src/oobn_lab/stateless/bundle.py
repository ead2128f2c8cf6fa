"""The bundled Stateless Ethereum model: loading, validation and scenarios.

A model bundle is the OOBN template library plus everything the engine
cannot infer from structure alone: bin metadata with units, per-CPT
provenance tags, scenario presets, headline metrics and calibration
targets. Bundles are immutable after loading; calibration produces a new
bundle.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from ..errors import (
    InvalidEvidence,
    SchemaError,
    UnknownPreset,
    UnknownVariable,
)
from ..inference import posterior_all, probability_of_evidence
from ..network import Network
from ..oobn import FlatModel, TemplateLibrary, flatten, library_from_dict, library_to_dict
from .pipeline import BinSpec

PROVENANCE_TAGS = ("elicited", "learned", "deterministic", "calibrated")
# tags whose cells calibration may move
FREE_TAGS = ("elicited", "calibrated")

DEFAULT_BUNDLE_RESOURCE = "stateless-ethereum.oobn.json"
DEFAULT_BUNDLE_PATH = Path(__file__).parent / "data" / DEFAULT_BUNDLE_RESOURCE


@dataclass(frozen=True)
class ScenarioPreset:
    name: str
    evidence: dict[str, str]
    description: str = ""
    annotations: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class HeadlineMetric:
    name: str
    variable: str
    state: str


class ModelBundle:
    """Validated OOBN bundle with metadata, presets and calibration targets."""

    def __init__(self, library: TemplateLibrary, metadata: dict,
                 presets: Mapping[str, ScenarioPreset],
                 calibration_targets: list[dict]):
        self.library = library
        self.metadata = metadata
        self.presets = dict(presets)
        self.calibration_targets = list(calibration_targets)
        self.flat: FlatModel = flatten(library)
        self.network: Network = self.flat.network
        self._leaf_index: dict[str, list[str]] = {}
        for name in self.network.variable_names:
            self._leaf_index.setdefault(name.rsplit(".", 1)[-1], []).append(name)
        self._validate_presets()
        self._validate_provenance()
        self._validate_bins()

    # -- identity -------------------------------------------------------------

    def to_dict(self) -> dict:
        doc = library_to_dict(self.library)
        doc["metadata"] = self.metadata
        doc["presets"] = {
            name: {
                "description": p.description,
                "evidence": p.evidence,
                "annotations": p.annotations,
            }
            for name, p in sorted(self.presets.items())
        }
        doc["calibration_targets"] = self.calibration_targets
        return doc

    @property
    def bundle_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    # -- name resolution -------------------------------------------------------

    def resolve_variable(self, name: str) -> str:
        """Accept either a qualified path or an unambiguous leaf name."""
        if name in self.network:
            return name
        candidates = self._leaf_index.get(name, [])
        if len(candidates) == 1:
            return candidates[0]
        if not candidates:
            raise UnknownVariable(f"unknown variable {name!r}", variable=name)
        raise InvalidEvidence(
            f"variable name {name!r} is ambiguous", variable=name,
            candidates=sorted(candidates),
        )

    def resolve_evidence(self, evidence: Mapping[str, str]) -> dict[str, str]:
        resolved: dict[str, str] = {}
        for name, state in evidence.items():
            qualified = self.resolve_variable(name)
            if qualified in resolved:
                raise InvalidEvidence(
                    f"variable {qualified!r} bound twice", variable=qualified
                )
            self.network.variable(qualified).state_index(state)
            resolved[qualified] = state
        return resolved

    # -- metadata accessors ------------------------------------------------------

    def bins(self) -> dict[str, BinSpec]:
        return {
            variable: BinSpec.from_dict(doc)
            for variable, doc in self.metadata.get("bins", {}).items()
        }

    def headline_metrics(self) -> list[HeadlineMetric]:
        return [
            HeadlineMetric(m["name"], self.resolve_variable(m["variable"]), m["state"])
            for m in self.metadata.get("headline_metrics", [])
        ]

    def provenance(self) -> dict[str, str]:
        """Tag per template-local CPT, keyed '<Template>.<Node>'."""
        return dict(self.metadata.get("provenance", {}))

    def provenance_of(self, qualified: str) -> str:
        template, local = self.flat.origins[qualified]
        return self.provenance()[f"{template}.{local}"]

    def preset(self, name: str) -> ScenarioPreset:
        try:
            return self.presets[name]
        except KeyError:
            raise UnknownPreset(
                f"unknown preset {name!r}", preset=name,
                available=sorted(self.presets),
            ) from None

    # -- validation -----------------------------------------------------------------

    def _validate_presets(self):
        for preset in self.presets.values():
            self.resolve_evidence(preset.evidence)

    def _validate_provenance(self):
        tags = self.provenance()
        for bad in sorted(set(tags.values()) - set(PROVENANCE_TAGS)):
            raise SchemaError(f"unknown provenance tag {bad!r}", tag=bad)
        for template in self.library.templates.values():
            for node in template.cpts:
                key = f"{template.name}.{node}"
                if key not in tags:
                    raise SchemaError(
                        f"CPT {key} carries no provenance tag", cpt=key
                    )
        known = {
            f"{t.name}.{node}"
            for t in self.library.templates.values()
            for node in t.cpts
        }
        for key in sorted(set(tags) - known):
            raise SchemaError(f"provenance tag for unknown CPT {key}", cpt=key)

    def _validate_bins(self):
        for variable in self.metadata.get("bins", {}):
            self.resolve_variable(variable)


def bundle_from_dict(doc: Mapping) -> ModelBundle:
    if not isinstance(doc, Mapping):
        raise SchemaError("bundle document must be a JSON object")
    library = library_from_dict(doc)
    metadata = dict(doc.get("metadata", {}))
    presets = {}
    for name, spec in doc.get("presets", {}).items():
        if not isinstance(spec, Mapping) or "evidence" not in spec:
            raise SchemaError(f"preset {name!r} needs an 'evidence' map", preset=name)
        presets[name] = ScenarioPreset(
            name=name,
            evidence=dict(spec["evidence"]),
            description=spec.get("description", ""),
            annotations=dict(spec.get("annotations", {})),
        )
    targets = list(doc.get("calibration_targets", []))
    return ModelBundle(library, metadata, presets, targets)


def load_bundle(path: str | Path) -> ModelBundle:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read bundle {path}: {exc}", path=str(path)) from exc
    if not text.strip():
        raise SchemaError(f"bundle file {path} is empty", path=str(path))
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"bundle {path} is not valid JSON: {exc}", path=str(path)) from exc
    return bundle_from_dict(doc)


def load_default_bundle() -> ModelBundle:
    return load_bundle(DEFAULT_BUNDLE_PATH)


def save_bundle(bundle: ModelBundle, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(bundle.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


# -- scenarios ---------------------------------------------------------------------

def _scenario_body(bundle: ModelBundle, evidence: dict[str, str]) -> dict:
    posteriors = posterior_all(bundle.network, evidence)
    p_evidence = probability_of_evidence(bundle.network, evidence)
    headline = {
        metric.name: posteriors[metric.variable][metric.state]
        for metric in bundle.headline_metrics()
    }
    monitors = {
        name: dict(posteriors[name].distribution)
        for name in bundle.network.variable_names
    }
    return {
        "probability_of_evidence": p_evidence,
        "headline": headline,
        "monitors": monitors,
    }


def _relative(old: float, new: float) -> float | None:
    if old == 0.0:
        return None
    return (new - old) / old


def run_scenario(bundle: ModelBundle, preset_or_evidence: str | Mapping[str, str],
                 compare: str | None = None,
                 extra_evidence: Mapping[str, str] | None = None) -> dict:
    """Scenario report: headline metrics, evidence probability, all monitors.

    ``compare`` names a baseline preset; the report then carries absolute
    and relative changes ((new - old) / old) for headline metrics and every
    monitor state.
    """
    if isinstance(preset_or_evidence, str):
        preset = bundle.preset(preset_or_evidence)
        evidence = dict(preset.evidence)
        preset_name = preset.name
        description = preset.description
    else:
        preset = None
        evidence = dict(preset_or_evidence)
        preset_name = None
        description = ""
    if extra_evidence:
        evidence.update(extra_evidence)
    resolved = bundle.resolve_evidence(evidence)
    report: dict = {
        "schema": "scenario-report/1",
        "bundle_hash": bundle.bundle_hash,
        "preset": preset_name,
        "description": description,
        "evidence": resolved,
        **_scenario_body(bundle, resolved),
    }
    if compare is not None:
        baseline_preset = bundle.preset(compare)
        baseline_evidence = bundle.resolve_evidence(baseline_preset.evidence)
        baseline = _scenario_body(bundle, baseline_evidence)
        report["compare"] = {
            "baseline": compare,
            "headline": {
                name: {
                    "old": baseline["headline"][name],
                    "new": value,
                    "absolute_change": value - baseline["headline"][name],
                    "relative_change": _relative(baseline["headline"][name], value),
                }
                for name, value in report["headline"].items()
            },
            "monitors": {
                variable: {
                    state: {
                        "old": baseline["monitors"][variable][state],
                        "new": p,
                        "absolute_change": p - baseline["monitors"][variable][state],
                        "relative_change": _relative(
                            baseline["monitors"][variable][state], p
                        ),
                    }
                    for state, p in states.items()
                }
                for variable, states in report["monitors"].items()
            },
        }
    return report
