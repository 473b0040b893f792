"""Context selection and context-based taxonomy construction tests."""

from __future__ import annotations

import itertools
import random

import pytest

from valuetax import (
    ContextSpec,
    SelectionKind,
    SelectionStrategy,
    build_context_taxonomy,
    check_coherence,
    context_holds,
    roots,
    select_nodes,
    validate,
)
from valuetax.errors import EmptyInput, EmptySelectionWarning, MissingEvaluator

from conftest import random_taxonomy, subtree_mean_oracle

KMEANS = SelectionStrategy(SelectionKind.KMEANS_TWO)


def best_bipartition_oracle(values: dict[str, float]) -> set[str]:
    """Exhaustively minimize within-cluster variance over every bipartition
    and return the higher-mean side."""
    names = sorted(values)

    def sse(group):
        if not group:
            return 0.0
        mean = sum(values[n] for n in group) / len(group)
        return sum((values[n] - mean) ** 2 for n in group)

    best, best_cost = None, None
    for size in range(1, len(names)):
        for group in itertools.combinations(names, size):
            rest = [n for n in names if n not in group]
            cost = sse(group) + sse(rest)
            if best_cost is None or cost < best_cost - 1e-15:
                best, best_cost = (set(group), set(rest)), cost
    lo, hi = best
    mean_lo = sum(values[n] for n in lo) / len(lo)
    mean_hi = sum(values[n] for n in hi) / len(hi)
    return hi if mean_hi >= mean_lo else lo


class TestSelectNodes:
    def test_positive_threshold_on_community_importances(self):
        picked = select_nodes({"p1": 0.8, "p2": 0.0, "p3": 0.7}, SelectionStrategy())
        assert picked == {"p1", "p3"}

    def test_threshold_is_strict(self):
        picked = select_nodes({"a": 0.5, "b": 0.7}, SelectionStrategy(threshold=0.5))
        assert picked == {"b"}

    def test_kmeans_splits_off_the_zero(self):
        picked = select_nodes({"p1": 0.8, "p2": 0.0, "p3": 0.7}, KMEANS)
        assert picked == {"p1", "p3"}
        assert picked == best_bipartition_oracle({"p1": 0.8, "p2": 0.0, "p3": 0.7})

    def test_kmeans_matches_exhaustive_oracle(self):
        rng = random.Random(17)
        for _ in range(100):
            values = {f"p{i}": rng.uniform(-1, 1) for i in range(rng.randint(2, 8))}
            assert select_nodes(values, KMEANS) == best_bipartition_oracle(values)

    def test_kmeans_identical_values_keeps_all(self):
        values = {"a": 0.4, "b": 0.4, "c": 0.4}
        assert select_nodes(values, KMEANS) == {"a", "b", "c"}

    def test_kmeans_singleton(self):
        assert select_nodes({"only": -0.2}, KMEANS) == {"only"}

    def test_kmeans_empty_rejected(self):
        with pytest.raises(EmptyInput):
            select_nodes({}, KMEANS)

    def test_raising_threshold_never_adds_nodes(self):
        rng = random.Random(3)
        for _ in range(50):
            values = {f"p{i}": rng.uniform(-1, 1) for i in range(rng.randint(1, 10))}
            lo, hi = sorted((rng.uniform(-1, 1), rng.uniform(-1, 1)))
            low_pick = select_nodes(values, SelectionStrategy(threshold=lo))
            high_pick = select_nodes(values, SelectionStrategy(threshold=hi))
            assert high_pick <= low_pick


class TestBuildContextTaxonomy:
    def test_community_context_keeps_seven_nodes(self, fairness, context_c):
        built = build_context_taxonomy(fairness, context_c)
        assert set(built.nodes) == {
            "fairness", "reciprocity", "give_take", "offer_ratio",
            "equal_treatment", "workload_split", "task_balance",
        }
        assert "volunteer_ratio" not in built.nodes
        assert "equal_pay" not in built.nodes
        assert built.importance["fairness"] == pytest.approx(0.75, abs=1e-9)
        oracle = subtree_mean_oracle(built.with_importance(
            {"offer_ratio": 0.8, "task_balance": 0.7}))
        for node, value in built.importance.items():
            assert value == pytest.approx(oracle[node], abs=1e-9)

    def test_elder_context_is_a_single_chain(self, fairness, context_c_prime):
        built = build_context_taxonomy(fairness, context_c_prime)
        assert set(built.nodes) == {
            "fairness", "equal_treatment", "workload_split", "task_balance"}
        assert set(built.edges) == {
            ("fairness", "equal_treatment"),
            ("equal_treatment", "workload_split"),
            ("workload_split", "task_balance"),
        }
        for value in built.importance.values():
            assert value == pytest.approx(0.9, abs=1e-9)

    def test_all_nonpositive_yields_empty_with_warning(self, fairness):
        ctx = ContextSpec("nothing", property_importance={
            "offer_ratio": -0.1, "volunteer_ratio": 0.0, "task_balance": -0.9})
        with pytest.warns(EmptySelectionWarning):
            built = build_context_taxonomy(fairness, ctx)
        assert len(built) == 0

    def test_unmentioned_properties_default_to_zero(self, fairness):
        ctx = ContextSpec("sparse", property_importance={"task_balance": 0.4})
        built = build_context_taxonomy(fairness, ctx)
        assert "offer_ratio" not in built.nodes
        assert built.importance["task_balance"] == pytest.approx(0.4)

    def test_stray_importance_key_rejected(self, fairness):
        ctx = ContextSpec("bad", property_importance={"fairness": 0.5})
        with pytest.raises(ValueError):
            build_context_taxonomy(fairness, ctx)

    def test_result_ignores_general_importances(self, fairness, context_c):
        rng = random.Random(1)
        annotated = fairness.with_importance(
            {n: rng.uniform(-1, 1) for n in fairness.nodes})
        plain = build_context_taxonomy(fairness, context_c)
        noisy = build_context_taxonomy(annotated, context_c)
        assert plain == noisy

    def test_random_builds_are_valid_closed_and_coherent(self):
        rng = random.Random(1001)
        checked = 0
        for _ in range(60):
            general = random_taxonomy(rng, max_nodes=16)
            props = general.property_nodes()
            if not props:
                continue
            ctx = ContextSpec("rand", property_importance={
                p: rng.uniform(-1, 1) for p in props})
            selected = {p for p in props if ctx.property_importance[p] > 0}
            if not selected:
                continue
            built = build_context_taxonomy(general, ctx)
            checked += 1
            assert validate(built).ok
            assert check_coherence(built).coherent
            # closure: every kept node reaches a selected property downwards,
            # and every leaf of the result is a selected property node
            down = {n: [c for p, c in built.edges if p == n] for n in built.nodes}

            def reaches_selected(node):
                if node in selected:
                    return True
                return any(reaches_selected(c) for c in down[node])

            for node in built.nodes:
                assert reaches_selected(node)
            assert roots(built) <= roots(general)
        assert checked > 20


class TestContextHolds:
    def test_vacuous_when_no_defining_properties(self):
        ctx = ContextSpec("any")
        assert context_holds(ctx, world=None, evaluators={})

    def test_one_false_property_fails(self):
        ctx = ContextSpec("c", defining_properties=frozenset({"a", "b"}))
        evaluators = {"a": lambda w: True, "b": lambda w: False}
        assert not context_holds(ctx, None, evaluators)

    def test_all_true_holds(self):
        ctx = ContextSpec("c", defining_properties=frozenset({"a", "b"}))
        evaluators = {"a": lambda w: w > 0, "b": lambda w: w < 10}
        assert context_holds(ctx, 5, evaluators)

    def test_missing_evaluator_raises_even_after_a_false_one(self):
        ctx = ContextSpec("c", defining_properties=frozenset({"a", "z"}))
        with pytest.raises(MissingEvaluator) as excinfo:
            context_holds(ctx, None, {"a": lambda w: False})
        assert excinfo.value.property == "z"


class TestContextSpec:
    def test_importance_range_enforced(self):
        with pytest.raises(ValueError):
            ContextSpec("c", property_importance={"p": 1.2})

    def test_empty_id_rejected(self):
        with pytest.raises(ValueError):
            ContextSpec("")

    def test_threshold_range_enforced(self):
        with pytest.raises(ValueError):
            SelectionStrategy(threshold=2.0)

    def test_negative_entries_stay_in_the_record(self, fairness, context_c_prime):
        assert context_c_prime.property_importance["offer_ratio"] == -0.5
        built = build_context_taxonomy(fairness, context_c_prime)
        assert "offer_ratio" not in built.nodes
