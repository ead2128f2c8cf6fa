import numpy as np
import pytest

from oobn_lab import (
    Variable,
    brute_force_marginal,
    build_network,
    elimination_order,
    marginal,
    posterior_all,
    probability_of_evidence,
)
from oobn_lab.errors import TooLargeForEnumeration, ZeroProbabilityEvidence
from oobn_lab.inference import _eliminate, induced_width, joint_posterior
from conftest import random_evidence, random_network

ORACLE_TOL = 1e-10


def two_node():
    return build_network(
        [Variable("A", ("a1", "a2")), Variable("B", ("b1", "b2"))],
        [("A", "B")],
        {"A": [[0.6, 0.4]], "B": [[0.7, 0.3], [0.2, 0.8]]},
    )


class TestBruteForce:
    def test_single_node_prior(self):
        net = build_network([Variable("A", ("x", "y"))], [], {"A": [[0.3, 0.7]]})
        assert brute_force_marginal(net, "A").distribution == pytest.approx(
            {"x": 0.3, "y": 0.7}
        )

    def test_two_node_bayes_rule(self):
        # P(A|b1) by hand: (0.6*0.7, 0.4*0.2) normalized = (0.84, 0.16)
        post = brute_force_marginal(two_node(), "A", {"B": "b1"})
        assert post["a1"] == pytest.approx(0.84, abs=1e-12)
        assert post["a2"] == pytest.approx(0.16, abs=1e-12)

    def test_guard_on_large_networks(self, rng):
        net = random_network(rng, 25, max_card=2, edge_prob=0.05)
        with pytest.raises(TooLargeForEnumeration):
            brute_force_marginal(net, "V00")

    def test_zero_probability_evidence(self):
        net = build_network(
            [Variable("A", ("x", "y")), Variable("B", ("x", "y"))],
            [("A", "B")],
            {"A": [[1.0, 0.0]], "B": [[1.0, 0.0], [0.5, 0.5]]},
        )
        with pytest.raises(ZeroProbabilityEvidence):
            brute_force_marginal(net, "A", {"B": "y"})


class TestMarginal:
    def test_root_prior_without_evidence(self):
        assert marginal(two_node(), "A").distribution == pytest.approx(
            {"a1": 0.6, "a2": 0.4}
        )

    def test_evidence_on_target_is_point_mass(self):
        post = marginal(two_node(), "A", {"A": "a2"})
        assert post.distribution == {"a1": 0.0, "a2": 1.0}

    def test_zero_probability_evidence_raises(self):
        net = build_network(
            [Variable("A", ("x", "y")), Variable("B", ("x", "y"))],
            [("A", "B")],
            {"A": [[1.0, 0.0]], "B": [[1.0, 0.0], [0.5, 0.5]]},
        )
        with pytest.raises(ZeroProbabilityEvidence):
            marginal(net, "A", {"B": "y"})

    def test_matches_oracle_on_random_networks(self, rng):
        for _ in range(25):
            net = random_network(rng, int(rng.integers(3, 13)), max_card=4,
                                 positive=False)
            evidence = random_evidence(rng, net)
            try:
                expected = {
                    name: brute_force_marginal(net, name, evidence)
                    for name in net.variable_names
                }
            except ZeroProbabilityEvidence:
                with pytest.raises(ZeroProbabilityEvidence):
                    posterior_all(net, evidence)
                continue
            got = posterior_all(net, evidence)
            for name in net.variable_names:
                for state, p in expected[name].distribution.items():
                    assert got[name][state] == pytest.approx(p, abs=ORACLE_TOL)

    def test_support_zeros_preserved(self, rng):
        # any state the oracle gives probability 0 is exactly 0 under elimination
        for _ in range(10):
            net = random_network(rng, 6, max_card=3, positive=False)
            zero_cpt = np.array(net.cpt(net.variable_names[-1]).table)
            zero_cpt[:, 0] = 0.0
            zero_cpt /= zero_cpt.sum(axis=1, keepdims=True)
            from oobn_lab import Cpt
            net = net.with_cpt(Cpt(net.variable_names[-1], net.parents(net.variable_names[-1]), zero_cpt))
            evidence = random_evidence(rng, net, max_vars=2)
            try:
                oracle = {n: brute_force_marginal(net, n, evidence) for n in net.variable_names}
            except ZeroProbabilityEvidence:
                continue
            ve = posterior_all(net, evidence)
            for name in net.variable_names:
                for state, p in oracle[name].distribution.items():
                    if p == 0.0:
                        assert ve[name][state] == 0.0


class TestProbabilityOfEvidence:
    def test_empty_evidence_is_one(self):
        assert probability_of_evidence(two_node(), {}) == 1.0

    def test_zero_is_a_valid_return(self):
        net = build_network(
            [Variable("A", ("x", "y")), Variable("B", ("x", "y"))],
            [("A", "B")],
            {"A": [[1.0, 0.0]], "B": [[1.0, 0.0], [0.5, 0.5]]},
        )
        assert probability_of_evidence(net, {"B": "y"}) == 0.0

    def test_chain_rule(self, rng):
        """P(e1 ∪ e2) = P(e1) * P(e2 | e1) via the conditioned joint posterior."""
        for _ in range(15):
            net = random_network(rng, int(rng.integers(3, 9)), max_card=3)
            names = list(net.variable_names)
            rng.shuffle(names)
            e1_vars = names[: max(1, len(names) // 3)]
            e2_vars = names[len(e1_vars): len(e1_vars) + 2]
            if not e2_vars:
                continue
            pick = lambda n: net.variable(n).states[int(rng.integers(0, net.cardinality(n)))]
            e1 = {n: pick(n) for n in e1_vars}
            e2 = {n: pick(n) for n in e2_vars}
            p1 = probability_of_evidence(net, e1)
            if p1 <= 0:
                continue
            joint, _ = joint_posterior(net, tuple(e2_vars), e1)
            idx = tuple(net.variable(n).state_index(e2[n]) for n in e2_vars)
            p2_given_1 = float(joint.values[idx])
            combined = probability_of_evidence(net, {**e1, **e2})
            assert combined == pytest.approx(p1 * p2_given_1, abs=1e-9)


class TestPosteriorAll:
    def test_no_evidence_gives_marginals(self, rng):
        net = random_network(rng, 6, max_card=3)
        everything = posterior_all(net)
        for name in net.variable_names:
            assert everything[name].distribution == pytest.approx(
                marginal(net, name).distribution
            )

    def test_full_evidence_gives_point_masses(self, rng):
        net = random_network(rng, 5, max_card=3)
        assignment = {
            n: net.variable(n).states[0] for n in net.variable_names
        }
        if probability_of_evidence(net, assignment) > 0:
            out = posterior_all(net, assignment)
            for name, state in assignment.items():
                assert out[name][state] == 1.0

    def test_order_invariance(self, rng):
        """Identical posteriors under two different elimination orders."""
        for _ in range(10):
            net = random_network(rng, 8, max_card=3)
            evidence = random_evidence(rng, net, max_vars=2)
            if probability_of_evidence(net, evidence) <= 0:
                continue
            for target in net.variable_names[:3]:
                if target in evidence:
                    continue
                forward = elimination_order(net, (target,), evidence)
                backward = list(reversed(forward))
                a = _eliminate(net, (target,), evidence, order=forward)
                b = _eliminate(net, (target,), evidence, order=backward)
                pa = a.values / a.values.sum()
                pb = b.values / b.values.sum()
                assert np.max(np.abs(pa - pb)) <= ORACLE_TOL


class TestEliminationOrder:
    def test_chain_order(self):
        net = build_network(
            [Variable(n, ("x", "y")) for n in "ABC"],
            [("A", "B"), ("B", "C")],
            {"A": [[0.5, 0.5]], "B": np.full((2, 2), 0.5), "C": np.full((2, 2), 0.5)},
        )
        assert elimination_order(net, ("C",)) == ["A", "B"]

    def test_tree_has_induced_width_one(self):
        variables = [Variable(f"N{i}", ("x", "y")) for i in range(7)]
        edges = [("N0", "N1"), ("N0", "N2"), ("N1", "N3"), ("N1", "N4"),
                 ("N2", "N5"), ("N2", "N6")]
        cpts = {"N0": [[0.5, 0.5]]}
        cpts.update({f"N{i}": np.full((2, 2), 0.5) for i in range(1, 7)})
        net = build_network(variables, edges, cpts)
        assert induced_width(net) == 1

    def test_excludes_targets_and_evidence(self, rng):
        net = random_network(rng, 8)
        order = elimination_order(net, ("V01",), {"V03": "s0"})
        assert "V01" not in order and "V03" not in order
        assert len(order) == 6
