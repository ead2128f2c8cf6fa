"""Object-oriented composition: reusable sub-model templates.

A template owns input placeholders (no CPT, no internal parents), output
nodes (visible to enclosing models) and private nodes. Templates nest by
instantiating other templates and binding child inputs to providers.
Flattening expands the instance tree into one plain Network whose variables
carry dot-separated instance paths; every bound placeholder is unified with
its provider node.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DanglingReference,
    InputHasCpt,
    MissingStandInPrior,
    NameCollision,
    OutputMissingCpt,
    SchemaError,
    SignatureMismatch,
    TemplateCycle,
    UnboundInput,
    UnknownTemplateReference,
    UnknownVariable,
)
from .inference import Posterior, posterior_all
from .network import Cpt, Network, Variable, build_network


@dataclass(frozen=True)
class Instance:
    name: str
    template: str


@dataclass(frozen=True)
class Binding:
    """Wire a child instance's input placeholder to a provider node.

    ``consumer`` is "<instance>.<input name>"; ``source`` is either a local
    node of the enclosing template or "<instance>.<output name>".
    """

    consumer: str
    source: str


@dataclass(frozen=True)
class OobnTemplate:
    name: str
    inputs: tuple[Variable, ...] = ()
    outputs: tuple[Variable, ...] = ()
    privates: tuple[Variable, ...] = ()
    edges: tuple[tuple[str, str], ...] = ()
    cpts: Mapping[str, Cpt] = field(default_factory=dict)
    instances: tuple[Instance, ...] = ()
    bindings: tuple[Binding, ...] = ()
    standin_priors: Mapping[str, tuple[float, ...]] = field(default_factory=dict)

    def input_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.inputs)

    def local_nodes(self) -> dict[str, Variable]:
        return {v.name: v for v in (*self.inputs, *self.outputs, *self.privates)}

    def owned_nodes(self) -> dict[str, Variable]:
        return {v.name: v for v in (*self.outputs, *self.privates)}

    def node(self, name: str) -> Variable:
        try:
            return self.local_nodes()[name]
        except KeyError:
            raise UnknownVariable(
                f"template {self.name!r} has no node {name!r}",
                template=self.name,
                variable=name,
            ) from None


def define_template(name: str,
                    inputs: Sequence[Variable] = (),
                    outputs: Sequence[Variable] = (),
                    privates: Sequence[Variable] = (),
                    edges: Sequence[tuple[str, str]] = (),
                    cpts: Mapping[str, Cpt | Sequence[Sequence[float]]] = {},
                    instances: Sequence[Instance] = (),
                    bindings: Sequence[Binding] = (),
                    standin_priors: Mapping[str, Sequence[float]] = {}) -> OobnTemplate:
    """Validate and assemble a sub-model template."""
    inputs, outputs, privates = tuple(inputs), tuple(outputs), tuple(privates)
    all_nodes = [*inputs, *outputs, *privates]
    seen: set[str] = set()
    for v in all_nodes:
        if "." in v.name:
            raise SchemaError(
                f"node name {v.name!r} may not contain '.'", template=name
            )
        if v.name in seen:
            raise NameCollision(
                f"duplicate node {v.name!r} in template {name!r}",
                template=name,
                variable=v.name,
            )
        seen.add(v.name)
    instances = tuple(instances)
    inst_seen: set[str] = set()
    for inst in instances:
        if "." in inst.name or not inst.name:
            raise SchemaError(
                f"instance name {inst.name!r} invalid", template=name
            )
        if inst.name in inst_seen:
            raise NameCollision(
                f"duplicate instance {inst.name!r} in template {name!r}",
                template=name,
                instance=inst.name,
            )
        inst_seen.add(inst.name)

    node_by_name = {v.name: v for v in all_nodes}
    input_names = {v.name for v in inputs}
    instance_names = {i.name for i in instances}
    edges = tuple((str(p), str(c)) for p, c in edges)
    for parent, child in edges:
        # a parent may be an output of a child instance ("inst.Node");
        # that reference is checked when the template library is assembled
        if "." in parent:
            inst_name = parent.split(".", 1)[0]
            if inst_name not in instance_names:
                raise DanglingReference(
                    f"edge parent {parent!r} references unknown instance "
                    f"{inst_name!r}",
                    template=name,
                    instance=inst_name,
                )
        elif parent not in node_by_name:
            raise DanglingReference(
                f"edge ({parent!r}, {child!r}) references unknown node {parent!r}",
                template=name,
                variable=parent,
            )
        if child not in node_by_name:
            raise DanglingReference(
                f"edge ({parent!r}, {child!r}) references unknown node {child!r}",
                template=name,
                variable=child,
            )
        if child in input_names:
            raise SchemaError(
                f"input placeholder {child!r} cannot have internal parents",
                template=name,
                variable=child,
            )

    declared_parents: dict[str, list[str]] = {v.name: [] for v in all_nodes}
    for parent, child in edges:
        declared_parents[child].append(parent)

    cpt_map: dict[str, Cpt] = {}
    for node_name, value in cpts.items():
        if node_name in input_names:
            raise InputHasCpt(
                f"input placeholder {node_name!r} carries a CPT",
                template=name,
                variable=node_name,
            )
        if node_name not in node_by_name:
            raise DanglingReference(
                f"CPT for unknown node {node_name!r}", template=name, variable=node_name
            )
        if isinstance(value, Cpt):
            cpt_map[node_name] = value
        else:
            cpt_map[node_name] = Cpt(
                node_name, tuple(declared_parents[node_name]), np.asarray(value, dtype=float)
            )
    for v in (*outputs, *privates):
        if v.name not in cpt_map:
            raise OutputMissingCpt(
                f"node {v.name!r} of template {name!r} has no CPT",
                template=name,
                variable=v.name,
            )
        cpt = cpt_map[v.name]
        if list(cpt.parents) != declared_parents[v.name]:
            raise SchemaError(
                f"CPT parents of {v.name!r} do not match declared edges",
                template=name,
                variable=v.name,
            )
        if all("." not in p for p in cpt.parents):
            # instance-qualified parents are shape-checked at library level
            rows = 1
            for p in cpt.parents:
                rows *= node_by_name[p].cardinality
            if cpt.table.shape != (rows, v.cardinality):
                raise SchemaError(
                    f"CPT of {v.name!r} has shape {cpt.table.shape}, expected "
                    f"({rows}, {v.cardinality})",
                    template=name,
                    variable=v.name,
                )

    priors: dict[str, tuple[float, ...]] = {}
    for input_name, dist in standin_priors.items():
        if input_name not in input_names:
            raise DanglingReference(
                f"stand-in prior for unknown input {input_name!r}",
                template=name,
                variable=input_name,
            )
        dist = tuple(float(x) for x in dist)
        if len(dist) != node_by_name[input_name].cardinality:
            raise SchemaError(
                f"stand-in prior for {input_name!r} has wrong length",
                template=name,
                variable=input_name,
            )
        priors[input_name] = dist

    bindings = tuple(bindings)
    bound: set[str] = set()
    for b in bindings:
        if b.consumer.count(".") != 1:
            raise SchemaError(
                f"binding consumer {b.consumer!r} must be '<instance>.<input>'",
                template=name,
            )
        if b.consumer in bound:
            raise SchemaError(
                f"input {b.consumer!r} bound more than once", template=name
            )
        bound.add(b.consumer)

    return OobnTemplate(
        name=name,
        inputs=inputs,
        outputs=outputs,
        privates=privates,
        edges=edges,
        cpts=cpt_map,
        instances=instances,
        bindings=bindings,
        standin_priors=priors,
    )


class TemplateLibrary:
    """A set of templates closed under instantiation, with a designated top."""

    def __init__(self, templates: Sequence[OobnTemplate], top: str):
        self._templates = {t.name: t for t in templates}
        if len(self._templates) != len(templates):
            raise NameCollision("duplicate template names")
        if top not in self._templates:
            raise UnknownTemplateReference(f"unknown top template {top!r}", template=top)
        self.top = top
        self._check_references()
        self._check_acyclic()
        self._check_bindings()
        self._check_instance_parents()

    def __getitem__(self, name: str) -> OobnTemplate:
        try:
            return self._templates[name]
        except KeyError:
            raise UnknownTemplateReference(
                f"unknown template {name!r}", template=name
            ) from None

    @property
    def templates(self) -> dict[str, OobnTemplate]:
        return dict(self._templates)

    def _check_references(self):
        for t in self._templates.values():
            for inst in t.instances:
                if inst.template not in self._templates:
                    raise UnknownTemplateReference(
                        f"template {t.name!r} instantiates unknown {inst.template!r}",
                        template=inst.template,
                    )

    def _check_acyclic(self):
        state: dict[str, int] = {}  # 1 = in progress, 2 = done

        def visit(name: str, chain: list[str]):
            if state.get(name) == 2:
                return
            if state.get(name) == 1:
                raise TemplateCycle(
                    "template composition graph has a cycle",
                    chain=chain + [name],
                )
            state[name] = 1
            for inst in self._templates[name].instances:
                visit(inst.template, chain + [name])
            state[name] = 2

        for name in sorted(self._templates):
            visit(name, [])

    def _check_bindings(self):
        for t in self._templates.values():
            inst_by_name = {i.name: i for i in t.instances}
            for b in t.bindings:
                inst_name, input_name = b.consumer.split(".", 1)
                if inst_name not in inst_by_name:
                    raise DanglingReference(
                        f"binding consumer references unknown instance {inst_name!r}",
                        template=t.name,
                        instance=inst_name,
                    )
                consumer_tpl = self[inst_by_name[inst_name].template]
                if input_name not in consumer_tpl.input_names():
                    raise DanglingReference(
                        f"{input_name!r} is not an input of template "
                        f"{consumer_tpl.name!r}",
                        template=consumer_tpl.name,
                        variable=input_name,
                    )
                provider_tpl, provider_node = self._resolve_source(t, b.source)
                check_binding_signature(
                    consumer_tpl.node(input_name),
                    provider_node,
                    consumer=f"{consumer_tpl.name}.{input_name}",
                    provider=f"{provider_tpl.name}.{provider_node.name}",
                )

    def _check_instance_parents(self):
        """Edges whose parent is 'inst.Node' must point at an output node."""
        for t in self._templates.values():
            inst_by_name = {i.name: i for i in t.instances}
            for parent, child in t.edges:
                if "." not in parent:
                    continue
                inst_name, leaf = parent.split(".", 1)
                child_tpl = self[inst_by_name[inst_name].template]
                if leaf not in {v.name for v in child_tpl.outputs}:
                    raise SchemaError(
                        f"edge parent {parent!r} is not an output node of "
                        f"{child_tpl.name!r}",
                        template=t.name,
                        variable=parent,
                    )

    def _resolve_source(self, template: OobnTemplate, source: str):
        """Template and node a binding source refers to (one level deep)."""
        if "." in source:
            inst_name, node_name = source.split(".", 1)
            inst = next((i for i in template.instances if i.name == inst_name), None)
            if inst is None:
                raise DanglingReference(
                    f"binding source references unknown instance {inst_name!r}",
                    template=template.name,
                    instance=inst_name,
                )
            child = self[inst.template]
            node = child.node(node_name)
            if node_name not in {v.name for v in child.outputs}:
                raise SchemaError(
                    f"binding source {source!r} is not an output node of "
                    f"{child.name!r}",
                    template=template.name,
                )
            return child, node
        return template, template.node(source)


def check_binding(binding: Binding, provider_template: OobnTemplate,
                  consumer_template: OobnTemplate) -> None:
    """Raise SignatureMismatch unless the state signatures match exactly."""
    _, input_name = binding.consumer.split(".", 1)
    source_leaf = binding.source.split(".", 1)[-1]
    check_binding_signature(
        consumer_template.node(input_name),
        provider_template.node(source_leaf),
        consumer=f"{consumer_template.name}.{input_name}",
        provider=f"{provider_template.name}.{source_leaf}",
    )


def check_binding_signature(input_var: Variable, provider_var: Variable,
                            consumer: str = "", provider: str = "") -> None:
    if input_var.states != provider_var.states:
        raise SignatureMismatch(
            f"state signature of {consumer or input_var.name} "
            f"{list(input_var.states)} does not match provider "
            f"{provider or provider_var.name} {list(provider_var.states)}",
            consumer=consumer or input_var.name,
            consumer_states=list(input_var.states),
            provider=provider or provider_var.name,
            provider_states=list(provider_var.states),
        )


@dataclass(frozen=True)
class FlatModel:
    """A flattened OOBN: the network plus bookkeeping for provenance."""

    network: Network
    # qualified variable name -> (template name, local node name)
    origins: dict[str, tuple[str, str]]
    # qualified instance path -> template name ("" = top)
    instance_templates: dict[str, str]


def flatten(library: TemplateLibrary, top: str | None = None,
            use_standins: bool = False) -> FlatModel:
    """Expand the instance tree under ``top`` into one plain Network.

    Bound input placeholders are unified with their providers (one node,
    the provider's CPT). Unbound inputs raise UnboundInput unless
    ``use_standins`` is set, in which case the top template's own inputs
    become root nodes carrying their stand-in priors.
    """
    top = top or library.top

    real_vars: dict[str, Variable] = {}
    origins: dict[str, tuple[str, str]] = {}
    instance_templates: dict[str, str] = {}
    placeholders: dict[str, Variable] = {}
    source_of: dict[str, str] = {}
    edges: list[tuple[str, str]] = []
    cpt_specs: list[tuple[str, str, tuple[str, ...], np.ndarray]] = []
    top_template = library[top]

    def add_real(qualified: str, var: Variable, template: str, local: str):
        if qualified in real_vars or qualified in placeholders:
            raise NameCollision(f"name {qualified!r} produced twice", variable=qualified)
        real_vars[qualified] = Variable(qualified, var.states)
        origins[qualified] = (template, local)

    def visit(template: OobnTemplate, prefix: str):
        instance_templates[prefix.rstrip(".")] = template.name
        for v in template.inputs:
            qualified = prefix + v.name
            if qualified in real_vars or qualified in placeholders:
                raise NameCollision(
                    f"name {qualified!r} produced twice", variable=qualified
                )
            placeholders[qualified] = v
        for v in (*template.outputs, *template.privates):
            add_real(prefix + v.name, v, template.name, v.name)
        for node_name, cpt in template.cpts.items():
            cpt_specs.append(
                (prefix + node_name, template.name,
                 tuple(prefix + p for p in cpt.parents), cpt.table)
            )
        for parent, child in template.edges:
            edges.append((prefix + parent, prefix + child))
        for inst in template.instances:
            visit(library[inst.template], prefix + inst.name + ".")
        for b in template.bindings:
            source_of[prefix + b.consumer] = prefix + b.source

    visit(top_template, "")

    if use_standins:
        for v in top_template.inputs:
            if v.name in source_of:
                continue
            prior = top_template.standin_priors.get(v.name)
            if prior is None:
                raise MissingStandInPrior(
                    f"input {v.name!r} of {top_template.name!r} has no stand-in prior",
                    template=top_template.name,
                    variable=v.name,
                )
            del placeholders[v.name]
            add_real(v.name, v, top_template.name, v.name)
            cpt_specs.append((v.name, top_template.name, (), np.asarray([prior])))

    def resolve(qualified: str, trail: tuple[str, ...] = ()) -> str:
        if qualified in real_vars:
            return qualified
        if qualified in trail:
            raise SchemaError(
                "binding chain forms a cycle", chain=list(trail) + [qualified]
            )
        if qualified in placeholders:
            source = source_of.get(qualified)
            if source is None:
                raise UnboundInput(
                    f"input placeholder {qualified!r} is not bound",
                    variable=qualified,
                )
            return resolve(source, trail + (qualified,))
        raise DanglingReference(
            f"binding references unknown node {qualified!r}", variable=qualified
        )

    flat_edges = [(resolve(p), resolve(c)) for p, c in edges]
    cpts = {
        child: Cpt(child, tuple(resolve(p) for p in parents), table)
        for child, _, parents, table in cpt_specs
    }
    network = build_network(list(real_vars.values()), flat_edges, cpts)
    return FlatModel(network=network, origins=origins, instance_templates=instance_templates)


def run_submodel(library: TemplateLibrary, template_name: str,
                 evidence: Mapping[str, str] = {}) -> dict[str, Posterior]:
    """Run one template standalone, with stand-in priors on unbound inputs."""
    flat = flatten(library, template_name, use_standins=True)
    return posterior_all(flat.network, evidence)


# -- JSON bundle format -----------------------------------------------------------

def _variables_from_spec(items) -> tuple[Variable, ...]:
    return tuple(Variable(v["name"], tuple(v["states"])) for v in items)


def template_from_dict(name: str, doc: Mapping) -> OobnTemplate:
    try:
        inputs = _variables_from_spec(doc.get("inputs", ()))
        outputs = _variables_from_spec(doc.get("outputs", ()))
        privates = _variables_from_spec(doc.get("privates", ()))
        edges = [(str(p), str(c)) for p, c in doc.get("edges", ())]
        cpts = {
            child: np.asarray(spec["table"], dtype=float)
            for child, spec in doc.get("cpts", {}).items()
        }
        instances = [Instance(i["name"], i["template"]) for i in doc.get("instances", ())]
        bindings = [Binding(b["input"], b["source"]) for b in doc.get("bindings", ())]
        standins = {k: tuple(v) for k, v in doc.get("standin_priors", {}).items()}
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(
            f"malformed template {name!r}: {exc}", template=name
        ) from exc
    # declared CPT parent order is authoritative; check it against the doc
    for child, spec in doc.get("cpts", {}).items():
        declared = [p for p, c in edges if c == child]
        if list(spec.get("parents", declared)) != declared:
            raise SchemaError(
                f"CPT parents for {child!r} disagree with edge declarations",
                template=name,
                variable=child,
            )
    return define_template(
        name,
        inputs=inputs,
        outputs=outputs,
        privates=privates,
        edges=edges,
        cpts=cpts,
        instances=instances,
        bindings=bindings,
        standin_priors=standins,
    )


def template_to_dict(t: OobnTemplate) -> dict:
    return {
        "inputs": [{"name": v.name, "states": list(v.states)} for v in t.inputs],
        "outputs": [{"name": v.name, "states": list(v.states)} for v in t.outputs],
        "privates": [{"name": v.name, "states": list(v.states)} for v in t.privates],
        "edges": [list(e) for e in t.edges],
        "cpts": {
            child: {
                "parents": list(cpt.parents),
                "table": [[float(x) for x in row] for row in cpt.table],
            }
            for child, cpt in t.cpts.items()
        },
        "instances": [{"name": i.name, "template": i.template} for i in t.instances],
        "bindings": [{"input": b.consumer, "source": b.source} for b in t.bindings],
        "standin_priors": {k: list(v) for k, v in t.standin_priors.items()},
    }


def library_from_dict(doc: Mapping) -> TemplateLibrary:
    if not isinstance(doc, Mapping) or "templates" not in doc or "top" not in doc:
        raise SchemaError("OOBN document needs 'templates' and 'top' keys")
    templates = [
        template_from_dict(name, spec) for name, spec in doc["templates"].items()
    ]
    return TemplateLibrary(templates, doc["top"])


def library_to_dict(library: TemplateLibrary) -> dict:
    return {
        "templates": {
            name: template_to_dict(t) for name, t in sorted(library.templates.items())
        },
        "top": library.top,
    }
