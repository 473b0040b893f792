"""Context-based taxonomy construction.

A context re-weights a general taxonomy bottom-up: property nodes get
context-specific importances, the relevant ones are selected (by a
threshold, or by two-way clustering), and the subgraph of branches leading
to the selected nodes is extracted. Importance for the retained interior
nodes is then filled in by propagation, independently of whatever the
general taxonomy had assigned.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Callable, Mapping

from .errors import EmptyInput, EmptySelectionWarning, MissingEvaluator
from .propagation import propagate
from .taxonomy import (
    NodeId,
    ValueTaxonomy,
    ancestors,
    check_importance,
    require_valid,
)

# Anything a property evaluator can be asked about.
WorldState = Any


class SelectionKind(Enum):
    POSITIVE_THRESHOLD = "positive_threshold"
    KMEANS_TWO = "kmeans2"


@dataclass(frozen=True)
class SelectionStrategy:
    """How relevant property nodes are picked from their context importances.

    ``POSITIVE_THRESHOLD`` keeps nodes strictly above ``threshold`` (default
    0). ``KMEANS_TWO`` splits the one-dimensional importance values into two
    clusters minimizing within-cluster variance and keeps the higher-mean
    cluster; it needs no threshold.
    """

    kind: SelectionKind = SelectionKind.POSITIVE_THRESHOLD
    threshold: float = 0.0

    def __post_init__(self):
        check_importance(self.threshold, "selection threshold")


POSITIVE_SELECTION = SelectionStrategy()
KMEANS_SELECTION = SelectionStrategy(SelectionKind.KMEANS_TWO)


@dataclass(frozen=True)
class ContextSpec:
    """A context: its defining properties, per-property-node importances,
    and the selection strategy used when deriving a taxonomy from it.

    ``property_importance`` keys must be property nodes of the taxonomy the
    context is applied to; property nodes it does not mention default to
    importance 0. Negative entries mark detested behaviours; they stay in
    the record but are dropped from built taxonomies by positive-threshold
    selection.
    """

    id: str
    defining_properties: frozenset[str] = frozenset()
    property_importance: Mapping[NodeId, float] = field(default_factory=dict)
    selection: SelectionStrategy = POSITIVE_SELECTION

    def __post_init__(self):
        if not self.id:
            raise ValueError("context id must be a non-empty string")
        cleaned = {}
        for node, value in dict(self.property_importance).items():
            cleaned[node] = check_importance(value, f"importance of {node!r}")
        object.__setattr__(self, "defining_properties", frozenset(self.defining_properties))
        object.__setattr__(self, "property_importance", MappingProxyType(cleaned))


def select_nodes(importances: Mapping[NodeId, float],
                 strategy: SelectionStrategy) -> set[NodeId]:
    """Pick the relevant nodes from an importance mapping.

    Positive-threshold selection keeps strictly-greater values. Two-means
    selection computes the exact optimal 1-D split (clusters are contiguous
    in sorted order, so every split point is scanned) and keeps the upper
    cluster; if all values are equal there is no variance-reducing split
    and every node is kept.
    """
    if strategy.kind is SelectionKind.POSITIVE_THRESHOLD:
        return {n for n, v in importances.items() if v > strategy.threshold}
    if not importances:
        raise EmptyInput("k-means selection needs at least one importance value")
    items = sorted(importances.items(), key=lambda kv: (kv[1], kv[0]))
    values = [v for _, v in items]
    if values[0] == values[-1]:
        return set(importances)
    best_split, best_sse = None, None
    for split in range(1, len(values)):
        sse = _sse(values[:split]) + _sse(values[split:])
        if best_sse is None or sse < best_sse - 1e-15:
            best_split, best_sse = split, sse
    return {n for n, _ in items[best_split:]}


def _sse(values: list[float]) -> float:
    mean = sum(values) / len(values)
    return sum((v - mean) ** 2 for v in values)


def build_context_taxonomy(general: ValueTaxonomy, ctx: ContextSpec) -> ValueTaxonomy:
    """Derive the context-based taxonomy from a general one.

    The result contains the selected property nodes plus every node on a
    path from a root of ``general`` to one of them, with the general edges
    restricted to that node set. Selected property nodes carry the context
    importances; interior importances are filled by propagation and owe
    nothing to the general taxonomy's own annotations.

    An empty selection is reported as an EmptySelectionWarning and yields
    an empty taxonomy.
    """
    require_valid(general)
    property_ids = set(general.property_nodes())
    stray = set(ctx.property_importance) - property_ids
    if stray:
        raise ValueError(
            f"context {ctx.id!r} assigns importance to non-property nodes: {sorted(stray)}")
    importances = {p: ctx.property_importance.get(p, 0.0) for p in property_ids}

    selected = select_nodes(importances, ctx.selection)
    if not selected:
        warnings.warn(EmptySelectionWarning(
            f"context {ctx.id!r} selected no property nodes"))
        return ValueTaxonomy()

    keep = selected | ancestors(general, selected)
    nodes = {n: general.nodes[n] for n in keep}
    edges = frozenset((p, c) for p, c in general.edges if p in keep and c in keep)
    seeded = ValueTaxonomy(nodes, edges, {p: importances[p] for p in selected})
    return propagate(seeded).taxonomy


def context_holds(ctx: ContextSpec, world: WorldState,
                  evaluators: Mapping[str, Callable[[WorldState], bool]]) -> bool:
    """True iff every defining property of the context is satisfied in ``world``.

    Each defining property must have an evaluator registered, whether or not
    an earlier property already failed.
    """
    props = sorted(ctx.defining_properties)
    for prop in props:
        if prop not in evaluators:
            raise MissingEvaluator(prop)
    return all(bool(evaluators[p](world)) for p in props)
