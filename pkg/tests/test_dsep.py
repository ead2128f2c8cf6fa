import numpy as np
import pytest

from oobn_lab import Variable, build_network, d_separated, markov_blanket
from oobn_lab.errors import OverlappingSets, UnknownVariable
from conftest import ci_deviation, random_network

CI_TOL = 1e-10


def collider():
    return build_network(
        [Variable(n, ("x", "y")) for n in "XZY"],
        [("X", "Z"), ("Y", "Z")],
        {"X": [[0.3, 0.7]], "Y": [[0.6, 0.4]],
         "Z": [[0.9, 0.1], [0.5, 0.5], [0.4, 0.6], [0.2, 0.8]]},
    )


def chain():
    return build_network(
        [Variable(n, ("x", "y")) for n in "XZY"],
        [("X", "Z"), ("Z", "Y")],
        {"X": [[0.3, 0.7]], "Z": [[0.9, 0.1], [0.2, 0.8]],
         "Y": [[0.7, 0.3], [0.4, 0.6]]},
    )


class TestCanonicalPatterns:
    def test_collider_marginally_separated(self):
        net = collider()
        assert d_separated(net, {"X"}, {"Y"}, set())

    def test_collider_opened_by_conditioning(self):
        net = collider()
        assert not d_separated(net, {"X"}, {"Y"}, {"Z"})

    def test_chain_blocked_by_middle(self):
        net = chain()
        assert d_separated(net, {"X"}, {"Y"}, {"Z"})
        assert not d_separated(net, {"X"}, {"Y"}, set())

    def test_fork_blocked_by_root(self):
        net = build_network(
            [Variable(n, ("x", "y")) for n in "XZY"],
            [("Z", "X"), ("Z", "Y")],
            {"Z": [[0.3, 0.7]], "X": [[0.9, 0.1], [0.2, 0.8]],
             "Y": [[0.7, 0.3], [0.4, 0.6]]},
        )
        assert d_separated(net, {"X"}, {"Y"}, {"Z"})
        assert not d_separated(net, {"X"}, {"Y"}, set())

    def test_descendant_of_collider_opens_path(self):
        net = build_network(
            [Variable(n, ("x", "y")) for n in "XZYW"],
            [("X", "Z"), ("Y", "Z"), ("Z", "W")],
            {"X": [[0.3, 0.7]], "Y": [[0.6, 0.4]],
             "Z": [[0.9, 0.1], [0.5, 0.5], [0.4, 0.6], [0.2, 0.8]],
             "W": [[0.8, 0.2], [0.3, 0.7]]},
        )
        assert d_separated(net, {"X"}, {"Y"}, set())
        assert not d_separated(net, {"X"}, {"Y"}, {"W"})

    def test_overlapping_sets_rejected(self):
        with pytest.raises(OverlappingSets):
            d_separated(chain(), {"X"}, {"X"}, set())
        with pytest.raises(OverlappingSets):
            d_separated(chain(), {"X"}, {"Y"}, {"X"})

    def test_unknown_variable(self):
        with pytest.raises(UnknownVariable):
            d_separated(chain(), {"X"}, {"Q"}, set())


class TestMarkovBlanket:
    def test_isolated_node(self):
        net = build_network(
            [Variable("A", ("x", "y")), Variable("B", ("x", "y"))], [],
            {"A": [[0.5, 0.5]], "B": [[0.5, 0.5]]},
        )
        assert markov_blanket(net, "A") == set()

    def test_coparent_rule(self):
        net = collider()
        assert markov_blanket(net, "X") == {"Z", "Y"}

    def test_unknown_variable(self):
        with pytest.raises(UnknownVariable):
            markov_blanket(chain(), "Q")

    def test_blanket_separates_rest(self, rng):
        for _ in range(10):
            net = random_network(rng, 8, max_card=3)
            for name in net.variable_names:
                blanket = markov_blanket(net, name)
                rest = set(net.variable_names) - blanket - {name}
                if rest:
                    assert d_separated(net, {name}, rest, blanket)


class TestAgainstEnumeration:
    def test_symmetry(self, rng):
        net = random_network(rng, 8, max_card=3)
        for _ in range(30):
            names = list(net.variable_names)
            rng.shuffle(names)
            x, y = names[0], names[1]
            z = tuple(names[2:2 + int(rng.integers(0, 4))])
            assert d_separated(net, {x}, {y}, set(z)) == d_separated(net, {y}, {x}, set(z))

    def test_matches_conditional_independence(self, rng):
        """d-separation iff numerical CI on strictly positive quantifications."""
        agree_sep = agree_dep = 0
        for _ in range(8):
            net = random_network(rng, 8, max_card=3, positive=True)
            names = list(net.variable_names)
            for _ in range(12):
                rng.shuffle(names)
                x, y = names[0], names[1]
                z = tuple(sorted(names[2:2 + int(rng.integers(0, 4))]))
                separated = d_separated(net, {x}, {y}, set(z))
                deviation = ci_deviation(net, x, y, z)
                if separated:
                    assert deviation <= CI_TOL, (x, y, z, deviation)
                    agree_sep += 1
                else:
                    assert deviation > CI_TOL, (x, y, z, deviation)
                    agree_dep += 1
        # both directions must actually have been exercised
        assert agree_sep > 5 and agree_dep > 5
