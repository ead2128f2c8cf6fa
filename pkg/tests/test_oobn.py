import numpy as np
import pytest

from oobn_lab import (
    Binding,
    Cpt,
    Instance,
    TemplateLibrary,
    Variable,
    build_network,
    d_separated,
    define_template,
    check_binding,
    flatten,
    library_from_dict,
    library_to_dict,
    marginal,
    posterior_all,
    run_submodel,
)
from oobn_lab.errors import (
    InputHasCpt,
    MissingStandInPrior,
    NameCollision,
    OutputMissingCpt,
    SchemaError,
    SignatureMismatch,
    TemplateCycle,
    UnboundInput,
    UnknownTemplateReference,
)

LMH = ("low", "medium", "high")


def witness_like_template():
    """Two inputs, one private, one output; mirrors the witness sub-model shape."""
    return define_template(
        "WitnessCreation",
        inputs=[Variable("Difficulty", LMH), Variable("StateEntriesUpdated", LMH)],
        privates=[Variable("WitnessSize", ("small", "large"))],
        outputs=[Variable("WitnessCreationTime", LMH)],
        edges=[("Difficulty", "WitnessSize"), ("StateEntriesUpdated", "WitnessSize"),
               ("WitnessSize", "WitnessCreationTime")],
        cpts={
            "WitnessSize": np.tile([0.7, 0.3], (9, 1)),
            "WitnessCreationTime": [[0.8, 0.15, 0.05], [0.1, 0.4, 0.5]],
        },
        standin_priors={"Difficulty": (0.3, 0.4, 0.3),
                        "StateEntriesUpdated": (0.2, 0.5, 0.3)},
    )


class TestDefineTemplate:
    def test_witness_shape_accepted(self):
        t = witness_like_template()
        assert t.input_names() == ("Difficulty", "StateEntriesUpdated")
        assert [v.name for v in t.privates] == ["WitnessSize"]

    def test_input_with_cpt_rejected(self):
        with pytest.raises(InputHasCpt):
            define_template(
                "T",
                inputs=[Variable("I", ("a", "b"))],
                outputs=[Variable("O", ("a", "b"))],
                edges=[("I", "O")],
                cpts={"I": [[0.5, 0.5]], "O": [[0.5, 0.5], [0.5, 0.5]]},
            )

    def test_output_without_cpt_rejected(self):
        with pytest.raises(OutputMissingCpt):
            define_template("T", outputs=[Variable("O", ("a", "b"))], cpts={})

    def test_input_cannot_have_internal_parents(self):
        with pytest.raises(SchemaError):
            define_template(
                "T",
                inputs=[Variable("I", ("a", "b"))],
                outputs=[Variable("O", ("a", "b"))],
                edges=[("O", "I")],
                cpts={"O": [[0.5, 0.5]]},
            )

    def test_self_instantiation_is_a_cycle(self):
        t = define_template(
            "T",
            outputs=[Variable("O", ("a", "b"))],
            cpts={"O": [[0.5, 0.5]]},
            instances=[Instance("inner", "T")],
        )
        with pytest.raises(TemplateCycle):
            TemplateLibrary([t], "T")

    def test_unknown_template_reference(self):
        t = define_template(
            "T",
            outputs=[Variable("O", ("a", "b"))],
            cpts={"O": [[0.5, 0.5]]},
            instances=[Instance("inner", "Ghost")],
        )
        with pytest.raises(UnknownTemplateReference):
            TemplateLibrary([t], "T")


class TestCheckBinding:
    def test_matching_signature_ok(self):
        provider = define_template(
            "P", outputs=[Variable("Out", LMH)],
            cpts={"Out": [[0.2, 0.3, 0.5]]},
        )
        consumer = witness_like_template()
        check_binding(Binding("w.Difficulty", "p.Out"), provider, consumer)

    def test_mismatch_reports_both_signatures(self):
        provider = define_template(
            "P", outputs=[Variable("Out", ("low", "high"))],
            cpts={"Out": [[0.5, 0.5]]},
        )
        consumer = witness_like_template()
        with pytest.raises(SignatureMismatch) as err:
            check_binding(Binding("w.Difficulty", "p.Out"), provider, consumer)
        assert err.value.details["consumer_states"] == list(LMH)
        assert err.value.details["provider_states"] == ["low", "high"]

    def test_library_rejects_bad_wiring(self):
        provider = define_template(
            "P", outputs=[Variable("Out", ("low", "high"))],
            cpts={"Out": [[0.5, 0.5]]},
        )
        top = define_template(
            "Top",
            instances=[Instance("p", "P"), Instance("w", "WitnessCreation")],
            bindings=[Binding("w.Difficulty", "p.Out"),
                      Binding("w.StateEntriesUpdated", "p.Out")],
        )
        with pytest.raises(SignatureMismatch):
            TemplateLibrary([provider, witness_like_template(), top], "Top")


class TestFlatten:
    def test_identity_flatten_keeps_bare_names(self):
        t = define_template(
            "Solo",
            outputs=[Variable("A", ("x", "y"))],
            privates=[Variable("B", ("x", "y"))],
            edges=[("A", "B")],
            cpts={"A": [[0.3, 0.7]], "B": [[0.9, 0.1], [0.2, 0.8]]},
        )
        flat = flatten(TemplateLibrary([t], "Solo"))
        assert set(flat.network.variable_names) == {"A", "B"}
        assert flat.network.edges == (("A", "B"),)

    def test_two_level_nesting_builds_paths(self):
        inner = define_template(
            "Inner", outputs=[Variable("C", ("x", "y"))], cpts={"C": [[0.4, 0.6]]},
        )
        middle = define_template(
            "Middle",
            outputs=[Variable("B", ("x", "y"))],
            cpts={"B": [[0.5, 0.5]]},
            instances=[Instance("i", "Inner")],
        )
        top = define_template(
            "Top",
            outputs=[Variable("A", ("x", "y"))],
            cpts={"A": [[0.5, 0.5]]},
            instances=[Instance("m", "Middle")],
        )
        flat = flatten(TemplateLibrary([inner, middle, top], "Top"))
        assert set(flat.network.variable_names) == {"A", "m.B", "m.i.C"}

    def test_bound_input_unifies_with_provider(self):
        provider = define_template(
            "P", outputs=[Variable("Out", ("x", "y"))], cpts={"Out": [[0.25, 0.75]]},
        )
        consumer = define_template(
            "C",
            inputs=[Variable("In", ("x", "y"))],
            outputs=[Variable("Val", ("x", "y"))],
            edges=[("In", "Val")],
            cpts={"Val": [[0.9, 0.1], [0.3, 0.7]]},
        )
        top = define_template(
            "Top",
            instances=[Instance("p", "P"), Instance("c", "C")],
            bindings=[Binding("c.In", "p.Out")],
        )
        flat = flatten(TemplateLibrary([provider, consumer, top], "Top"))
        # the placeholder disappears; the provider node feeds the consumer CPT
        assert set(flat.network.variable_names) == {"p.Out", "c.Val"}
        assert flat.network.parents("c.Val") == ("p.Out",)
        post = marginal(flat.network, "c.Val")
        assert post["x"] == pytest.approx(0.25 * 0.9 + 0.75 * 0.3)

    def test_unbound_input_rejected(self):
        top = define_template(
            "Top", instances=[Instance("w", "WitnessCreation")], bindings=[],
        )
        with pytest.raises(UnboundInput):
            flatten(TemplateLibrary([witness_like_template(), top], "Top"))

    def test_flatten_matches_hand_built_flat_network(self):
        """Composed model posteriors equal the manually assembled equivalent."""
        source = define_template(
            "Source", outputs=[Variable("S", ("x", "y", "z"))],
            cpts={"S": [[0.5, 0.3, 0.2]]},
        )
        sink = define_template(
            "Sink",
            inputs=[Variable("In", ("x", "y", "z"))],
            outputs=[Variable("T", ("x", "y"))],
            privates=[Variable("U", ("x", "y"))],
            edges=[("In", "T"), ("T", "U")],
            cpts={"T": [[0.9, 0.1], [0.4, 0.6], [0.2, 0.8]],
                  "U": [[0.7, 0.3], [0.1, 0.9]]},
        )
        top = define_template(
            "Top",
            outputs=[Variable("R", ("x", "y"))],
            edges=[],
            cpts={"R": [[0.6, 0.4]]},
            instances=[Instance("a", "Source"), Instance("b", "Sink")],
            bindings=[Binding("b.In", "a.S")],
        )
        flat = flatten(TemplateLibrary([source, sink, top], "Top"))
        hand = build_network(
            [Variable("a.S", ("x", "y", "z")), Variable("b.T", ("x", "y")),
             Variable("b.U", ("x", "y")), Variable("R", ("x", "y"))],
            [("a.S", "b.T"), ("b.T", "b.U")],
            {"a.S": [[0.5, 0.3, 0.2]],
             "b.T": [[0.9, 0.1], [0.4, 0.6], [0.2, 0.8]],
             "b.U": [[0.7, 0.3], [0.1, 0.9]],
             "R": [[0.6, 0.4]]},
        )
        for evidence in ({}, {"b.U": "y"}, {"a.S": "z", "b.U": "x"}):
            flat_post = posterior_all(flat.network, evidence)
            hand_post = posterior_all(hand, evidence)
            for name in hand.variable_names:
                for state, p in hand_post[name].distribution.items():
                    assert flat_post[name][state] == pytest.approx(p, abs=1e-10)

    def test_flatten_deterministic_bytes(self):
        from oobn_lab import network_to_json

        lib = TemplateLibrary([witness_like_template()], "WitnessCreation")
        a = network_to_json(flatten(lib, use_standins=True).network)
        b = network_to_json(flatten(lib, use_standins=True).network)
        assert a == b

    def test_name_collision_between_instances(self):
        t = define_template(
            "T", outputs=[Variable("O", ("x", "y"))], cpts={"O": [[0.5, 0.5]]},
        )
        with pytest.raises(NameCollision):
            define_template(
                "Top", instances=[Instance("i", "T"), Instance("i", "T")],
            )


class TestInstanceOutputParents:
    def test_local_node_fed_by_instance_output(self):
        provider = define_template(
            "P", outputs=[Variable("Out", ("x", "y"))], cpts={"Out": [[0.25, 0.75]]},
        )
        top = define_template(
            "Top",
            outputs=[Variable("R", ("x", "y"))],
            edges=[("p.Out", "R")],
            cpts={"R": [[0.9, 0.1], [0.2, 0.8]]},
            instances=[Instance("p", "P")],
        )
        flat = flatten(TemplateLibrary([provider, top], "Top"))
        assert flat.network.parents("R") == ("p.Out",)
        assert marginal(flat.network, "R")["x"] == pytest.approx(0.25 * 0.9 + 0.75 * 0.2)

    def test_private_nodes_not_wireable(self):
        provider = define_template(
            "P",
            outputs=[Variable("Out", ("x", "y"))],
            privates=[Variable("Hidden", ("x", "y"))],
            cpts={"Out": [[0.25, 0.75]], "Hidden": [[0.5, 0.5]]},
        )
        top = define_template(
            "Top",
            outputs=[Variable("R", ("x", "y"))],
            edges=[("p.Hidden", "R")],
            cpts={"R": [[0.9, 0.1], [0.2, 0.8]]},
            instances=[Instance("p", "P")],
        )
        with pytest.raises(SchemaError):
            TemplateLibrary([provider, top], "Top")


class TestRunSubmodel:
    def test_standin_priors_apply(self):
        lib = TemplateLibrary([witness_like_template()], "WitnessCreation")
        posts = run_submodel(lib, "WitnessCreation")
        assert posts["Difficulty"].distribution == pytest.approx(
            {"low": 0.3, "medium": 0.4, "high": 0.3}
        )

    def test_missing_standin_prior(self):
        t = define_template(
            "T",
            inputs=[Variable("In", ("x", "y"))],
            outputs=[Variable("O", ("x", "y"))],
            edges=[("In", "O")],
            cpts={"O": [[0.5, 0.5], [0.5, 0.5]]},
        )
        with pytest.raises(MissingStandInPrior):
            run_submodel(TemplateLibrary([t], "T"), "T")

    def test_inputs_observed_condition_output(self):
        lib = TemplateLibrary([witness_like_template()], "WitnessCreation")
        posts = run_submodel(
            lib, "WitnessCreation",
            {"Difficulty": "high", "StateEntriesUpdated": "high"},
        )
        expected = 0.7 * 0.8 + 0.3 * 0.1  # size-weighted mixture row
        assert posts["WitnessCreationTime"]["low"] == pytest.approx(expected)

    def test_encapsulation_of_private_nodes(self):
        """Changing a private CPT moves parent posteriors only via outputs."""
        inner_a = define_template(
            "Inner",
            outputs=[Variable("Out", ("x", "y"))],
            privates=[Variable("Hidden", ("x", "y")), Variable("Dead", ("x", "y"))],
            edges=[("Hidden", "Out")],
            cpts={
                "Hidden": [[0.5, 0.5]],
                "Dead": [[0.9, 0.1]],
                "Out": [[0.8, 0.2], [0.3, 0.7]],
            },
        )
        # same template, but the dead-end private changed
        inner_b = define_template(
            "Inner",
            outputs=[Variable("Out", ("x", "y"))],
            privates=[Variable("Hidden", ("x", "y")), Variable("Dead", ("x", "y"))],
            edges=[("Hidden", "Out")],
            cpts={
                "Hidden": [[0.5, 0.5]],
                "Dead": [[0.1, 0.9]],
                "Out": [[0.8, 0.2], [0.3, 0.7]],
            },
        )
        top = define_template(
            "Top",
            outputs=[Variable("R", ("x", "y"))],
            instances=[Instance("i", "Inner")],
            cpts={"R": [[0.5, 0.5]]},
        )
        flat_a = flatten(TemplateLibrary([inner_a, top], "Top"))
        flat_b = flatten(TemplateLibrary([inner_b, top], "Top"))
        assert d_separated(flat_a.network, {"i.Dead"}, {"R"}, set())
        assert marginal(flat_a.network, "R").distribution == pytest.approx(
            marginal(flat_b.network, "R").distribution
        )


class TestLibrarySerialization:
    def test_round_trip(self):
        lib = TemplateLibrary([witness_like_template()], "WitnessCreation")
        doc = library_to_dict(lib)
        again = library_from_dict(doc)
        assert library_to_dict(again) == doc
