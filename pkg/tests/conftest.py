"""Shared fixtures: the community fairness example, random structure
generators, and independent oracles the implementation is checked against.

The oracles deliberately avoid the library's own propagation and counting
paths: subtree means are computed by direct recursion, path counts by
explicit path enumeration, and alignment scores by the literal weighted
average formula.
"""

from __future__ import annotations

import random

import pytest
from hypothesis import strategies as st

from valuetax import (
    ContextSpec,
    ValueTaxonomy,
    fairness_taxonomy,
    label_node,
    property_node,
)

OFFER_RATIO = "offer_ratio"
VOLUNTEER_RATIO = "volunteer_ratio"
TASK_BALANCE = "task_balance"


@pytest.fixture
def fairness() -> ValueTaxonomy:
    return fairness_taxonomy()


@pytest.fixture
def context_c() -> ContextSpec:
    return ContextSpec(
        "community-c",
        property_importance={OFFER_RATIO: 0.8, VOLUNTEER_RATIO: 0.0, TASK_BALANCE: 0.7},
    )


@pytest.fixture
def context_c_prime() -> ContextSpec:
    return ContextSpec(
        "elder-support",
        property_importance={OFFER_RATIO: -0.5, VOLUNTEER_RATIO: -0.5, TASK_BALANCE: 0.9},
    )


def context_c_fragment(leaf_values=(0.8, 0.7)) -> ValueTaxonomy:
    """The subgraph of the fairness example leading to the two properties
    kept by the first community context, with only the leaves valued."""
    p1, p3 = leaf_values
    nodes = [
        label_node("fairness"),
        label_node("reciprocity"),
        label_node("give_take", "balanced give & take"),
        label_node("equal_treatment", "equal treatment"),
        label_node("workload_split", "equal division of workload"),
        property_node(OFFER_RATIO),
        property_node(TASK_BALANCE),
    ]
    edges = [
        ("fairness", "reciprocity"),
        ("fairness", "equal_treatment"),
        ("reciprocity", "give_take"),
        ("give_take", OFFER_RATIO),
        ("equal_treatment", "workload_split"),
        ("workload_split", TASK_BALANCE),
    ]
    return ValueTaxonomy.build(nodes, edges, {OFFER_RATIO: p1, TASK_BALANCE: p3})


# -- random structure generators ---------------------------------------------


def random_tree(rng: random.Random, max_nodes: int = 50,
                assign_leaves: bool = True) -> ValueTaxonomy:
    """A random rooted tree of label nodes; leaves carry uniform importances."""
    n = rng.randint(2, max_nodes)
    names = [f"n{i:02d}" for i in range(n)]
    edges = [(names[rng.randrange(i)], names[i]) for i in range(1, n)]
    has_child = {p for p, _ in edges}
    importance = {}
    if assign_leaves:
        importance = {name: rng.uniform(-1.0, 1.0) for name in names if name not in has_child}
    return ValueTaxonomy.build([label_node(name) for name in names], edges, importance)


def random_taxonomy(rng: random.Random, max_nodes: int = 14,
                    max_property_nodes: int = 12,
                    extra_edge_prob: float = 0.2,
                    importance_prob: float = 0.5,
                    all_property_importance: bool = False) -> ValueTaxonomy:
    """A random valid DAG taxonomy.

    Edges only point from earlier label nodes to later nodes, which makes
    the result acyclic with leaf-restricted property nodes by construction.
    """
    n = rng.randint(1, max_nodes)
    nodes = [label_node("n00", f"label {rng.randrange(100)}")]
    property_count = 0
    for i in range(1, n):
        name = f"n{i:02d}"
        if property_count < max_property_nodes and rng.random() < 0.4:
            nodes.append(property_node(name, f"prop_{name}"))
            property_count += 1
        else:
            nodes.append(label_node(name))
    label_ids = [node.id for node in nodes if node.kind.value == "label"]
    edges = set()
    for i in range(1, n):
        candidates = [lid for lid in label_ids if lid < nodes[i].id]
        if not candidates:
            continue
        edges.add((rng.choice(candidates), nodes[i].id))
        for parent in candidates:
            if rng.random() < extra_edge_prob:
                edges.add((parent, nodes[i].id))
    importance = {}
    for node in nodes:
        if all_property_importance and node.kind.value == "property":
            importance[node.id] = rng.uniform(-1.0, 1.0)
        elif not all_property_importance and rng.random() < importance_prob:
            importance[node.id] = rng.uniform(-1.0, 1.0)
    return ValueTaxonomy.build(nodes, sorted(edges), importance)


importance_values = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)


@st.composite
def taxonomies(draw, max_nodes: int = 10, leaf_importance_only: bool = False):
    """Hypothesis strategy for valid taxonomies.

    Parents are always earlier label nodes, which keeps the graph acyclic and
    property nodes at the leaves by construction. With ``leaf_importance_only``
    the result is a tree whose leaves are all valued and interior nodes are
    not, the shape propagation expects.
    """
    n = draw(st.integers(min_value=1 if not leaf_importance_only else 2, max_value=max_nodes))
    nodes = [label_node("n00")]
    for i in range(1, n):
        name = f"n{i:02d}"
        if not leaf_importance_only and draw(st.booleans()):
            nodes.append(property_node(name))
        else:
            nodes.append(label_node(name))
    label_ids = [node.id for node in nodes if node.kind.value == "label"]
    edges = set()
    for i in range(1, n):
        candidates = [lid for lid in label_ids if lid < nodes[i].id]
        if not candidates:
            continue
        if leaf_importance_only:
            parent = draw(st.sampled_from(candidates))
            edges.add((parent, nodes[i].id))
        else:
            picked = draw(st.lists(st.sampled_from(candidates), min_size=1,
                                   max_size=min(3, len(candidates)), unique=True))
            edges.update((p, nodes[i].id) for p in picked)
    importance = {}
    if leaf_importance_only:
        with_children = {p for p, _ in edges}
        for node in nodes:
            if node.id not in with_children:
                importance[node.id] = draw(importance_values)
    else:
        for node in nodes:
            if draw(st.booleans()):
                importance[node.id] = draw(importance_values)
    return ValueTaxonomy.build(nodes, sorted(edges), importance)


# -- independent oracles ------------------------------------------------------


def subtree_mean_oracle(taxonomy: ValueTaxonomy) -> dict[str, float]:
    """Bottom-up recursive mean over a tree whose leaves are all valued."""
    children = {n: sorted(c for p, c in taxonomy.edges if p == n) for n in taxonomy.nodes}

    def value(node: str) -> float:
        kids = children[node]
        if not kids:
            return taxonomy.importance[node]
        return sum(value(k) for k in kids) / len(kids)

    return {n: value(n) for n in taxonomy.nodes}


def enumerate_paths_oracle(taxonomy: ValueTaxonomy, target: str) -> int:
    """Count root-to-target paths by explicit depth-first enumeration."""
    parents = {n: sorted(p for p, c in taxonomy.edges if c == n) for n in taxonomy.nodes}

    def count(node: str) -> int:
        ps = parents[node]
        if not ps:
            return 1
        return sum(count(p) for p in ps)

    return count(target)


def literal_alignment_oracle(sd: dict[str, float], importance: dict[str, float],
                             paths: dict[str, int] | None = None) -> float:
    """The weighted-average alignment formula, written out directly."""
    props = sorted(sd)
    if paths is None:
        return sum(importance[p] * sd[p] for p in props) / len(props)
    return sum(paths[p] * importance[p] * sd[p] for p in props) / len(props)
