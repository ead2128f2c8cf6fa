import numpy as np
import pytest

from oobn_lab import Cpt, Network, Variable, build_network
from oobn_lab.factors import cpt_factor, multiply, restrict, sum_out


def random_network(rng: np.random.Generator, n_vars: int, max_card: int = 4,
                   edge_prob: float = 0.4, positive: bool = True,
                   min_card: int = 2) -> Network:
    """A random DAG over V00..Vnn with Dirichlet-quantified CPTs.

    Edges only go from lower to higher index, so the graph is acyclic by
    construction. positive=True keeps every entry strictly positive.
    """
    names = [f"V{i:02d}" for i in range(n_vars)]
    cards = rng.integers(min_card, max_card + 1, size=n_vars)
    variables = [
        Variable(name, tuple(f"s{k}" for k in range(card)))
        for name, card in zip(names, cards)
    ]
    edges = []
    parents = {name: [] for name in names}
    for j in range(n_vars):
        for i in range(j):
            if rng.random() < edge_prob:
                edges.append((names[i], names[j]))
                parents[names[j]].append(names[i])
    cpts = {}
    for j, name in enumerate(names):
        rows = int(np.prod([cards[names.index(p)] for p in parents[name]])) if parents[name] else 1
        alpha = np.ones(cards[j]) * (2.0 if positive else 0.4)
        table = rng.dirichlet(alpha, size=rows)
        if positive:
            table = np.maximum(table, 1e-3)
            table = table / table.sum(axis=1, keepdims=True)
        cpts[name] = Cpt(name, tuple(parents[name]), table)
    return build_network(variables, edges, cpts)


def random_evidence(rng: np.random.Generator, net: Network, max_vars: int = 3) -> dict:
    chosen = rng.choice(net.variable_names, size=min(max_vars, len(net)), replace=False)
    n_pick = int(rng.integers(0, len(chosen) + 1))
    evidence = {}
    for name in list(chosen)[:n_pick]:
        var = net.variable(name)
        evidence[name] = var.states[int(rng.integers(0, var.cardinality))]
    return evidence


def enumerate_joint(net: Network):
    """Full joint as a factor over all variables (test-side oracle)."""
    return multiply([cpt_factor(net, name) for name in net.variable_names])


def ci_deviation(net: Network, x: str, y: str, z: tuple[str, ...]) -> float:
    """max |P(x,y|z) - P(x|z)P(y|z)| over all configurations, by enumeration."""
    joint = enumerate_joint(net)
    keep = (x, y, *z)
    for name in net.variable_names:
        if name not in keep:
            joint = sum_out(joint, name)
    worst = 0.0
    z_cards = [net.cardinality(name) for name in z]
    for z_flat in range(int(np.prod(z_cards)) if z else 1):
        f = joint
        rem = z_flat
        for name, card in zip(reversed(z), reversed(z_cards)):
            rem, idx = divmod(rem, card)
            f = restrict(f, name, idx)
        values = np.asarray(f.values, dtype=float)
        if x != f.scope[0]:
            values = values.T
        p_z = values.sum()
        if p_z <= 0:
            continue
        p_xy = values / p_z
        p_x = p_xy.sum(axis=1, keepdims=True)
        p_y = p_xy.sum(axis=0, keepdims=True)
        worst = max(worst, float(np.max(np.abs(p_xy - p_x * p_y))))
    return worst


def known_five_node_model() -> Network:
    """Fixed 5-node model for learning-recovery oracles.

    Every parent configuration keeps at least ~12% mass so that counts at
    100k samples pin each CPT cell well inside 0.02.
    """
    return build_network(
        [
            Variable("A", ("a0", "a1")),
            Variable("B", ("b0", "b1")),
            Variable("C", ("c0", "c1", "c2")),
            Variable("D", ("d0", "d1")),
            Variable("E", ("e0", "e1", "e2")),
        ],
        [("A", "B"), ("B", "C"), ("A", "D"), ("B", "E"), ("D", "E")],
        {
            "A": [[0.45, 0.55]],
            "B": [[0.7, 0.3], [0.25, 0.75]],
            "C": [[0.5, 0.3, 0.2], [0.2, 0.35, 0.45]],
            "D": [[0.6, 0.4], [0.3, 0.7]],
            "E": [[0.55, 0.3, 0.15], [0.3, 0.4, 0.3],
                  [0.15, 0.45, 0.4], [0.1, 0.3, 0.6]],
        },
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
