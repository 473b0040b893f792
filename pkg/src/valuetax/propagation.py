"""Fixpoint propagation of importance values, and a coherence verifier.

Propagation repeatedly sweeps a taxonomy and resolves importance wherever
the mean-coherence constraint pins a value down:

* a valued parent with exactly one unvalued child fixes that child;
* a valued parent with several unvalued children, none of which has any
  valued descendant, splits the remainder equally among them;
* an unvalued parent whose children are all valued takes their mean;
* an unvalued parent with some valued children, where the unvalued ones
  have no valued descendants, takes the mean of the valued children and
  hands that value down to the unvalued ones as well.

Wherever a parent and all of its children already carry values, the parent
is verified instead: its value must equal the mean of its children's.
Sweeps repeat until a pass assigns nothing new, which takes at most
``len(nodes) + 1`` passes. Pre-assigned values are never modified, only
extended.

Down-propagation inverts the aggregation operator, which is exact only for
the arithmetic mean, so :func:`propagate` is mean-specific. The standalone
:func:`check_coherence` accepts any averaging operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .aggregation import MEAN, AggregationOperator
from .errors import ConflictingAssignment, IncoherentInput, RangeViolation
from .taxonomy import (
    IMPORTANCE_MAX,
    IMPORTANCE_MIN,
    NodeId,
    ValueTaxonomy,
    require_valid,
    topological_order,
)

# Equality of importance values is checked to relative 1e-9 with an absolute
# floor of 1e-12; exact comparison would be meaningless in floating point.
REL_TOL = 1e-9
ABS_TOL = 1e-12


def _close(a: float, b: float, rel_tol: float = REL_TOL, abs_tol: float = ABS_TOL) -> bool:
    return math.isclose(a, b, rel_tol=rel_tol, abs_tol=abs_tol)


@dataclass(frozen=True)
class PropagationResult:
    """Outcome of a successful propagation run.

    ``taxonomy`` carries the enlarged importance mapping, ``assigned`` the
    newly assigned values (disjoint from the input assignment), and
    ``iterations`` the number of outer fixpoint passes, including the final
    pass that assigns nothing.
    """

    taxonomy: ValueTaxonomy
    assigned: dict[NodeId, float]
    iterations: int


@dataclass(frozen=True)
class CoherenceViolation:
    parent: NodeId
    expected: float
    actual: float


@dataclass(frozen=True)
class CoherenceReport:
    coherent: bool
    violations: tuple[CoherenceViolation, ...] = ()
    unevaluable: tuple[NodeId, ...] = ()


class _Run:
    """Mutable state for one propagation run over a private working copy."""

    def __init__(self, taxonomy: ValueTaxonomy):
        self.taxonomy = taxonomy
        self.values: dict[NodeId, float] = dict(taxonomy.importance)
        self.assigned: dict[NodeId, float] = {}

    def assign(self, node: NodeId, value: float) -> None:
        # 1-ulp overshoot at the codomain boundary is float noise, not a
        # range violation; anything further out is an error, never clamped.
        if IMPORTANCE_MAX < value <= IMPORTANCE_MAX + ABS_TOL:
            value = IMPORTANCE_MAX
        elif IMPORTANCE_MIN - ABS_TOL <= value < IMPORTANCE_MIN:
            value = IMPORTANCE_MIN
        if not (IMPORTANCE_MIN <= value <= IMPORTANCE_MAX):
            raise RangeViolation(node, value, self.assigned)
        existing = self.values.get(node)
        if existing is not None:
            if not _close(existing, value):
                raise ConflictingAssignment(
                    node, f"{existing} already assigned, new path implies {value}", self.assigned)
            return
        self.values[node] = value
        self.assigned[node] = value

    def has_valued_descendant(self, nodes: list[NodeId]) -> bool:
        children_map = self.taxonomy._children
        seen: set[NodeId] = set()
        stack = [c for n in nodes for c in children_map.get(n, ())]
        while stack:
            node = stack.pop()
            if node in seen:
                continue
            seen.add(node)
            if node in self.values:
                return True
            stack.extend(children_map.get(node, ()))
        return False

    def process(self, node: NodeId) -> None:
        kids = self.taxonomy._children[node]
        if not kids:
            return
        valued = [c for c in kids if c in self.values]
        unvalued = [c for c in kids if c not in self.values]
        if node in self.values:
            value = self.values[node]
            if not unvalued:
                expected = sum(self.values[c] for c in valued) / len(valued)
                if not _close(value, expected):
                    propagated = [n for n in (node, *valued) if n in self.assigned]
                    if propagated:
                        raise ConflictingAssignment(
                            node,
                            f"value {value} disagrees with children mean {expected} "
                            f"after propagation through {propagated}",
                            self.assigned)
                    raise IncoherentInput(node, expected, value, self.assigned)
            elif len(unvalued) == 1:
                missing = value * len(kids) - sum(self.values[c] for c in valued)
                self.assign(unvalued[0], missing)
            elif not self.has_valued_descendant(unvalued):
                share = (value * len(kids) - sum(self.values[c] for c in valued)) / len(unvalued)
                for child in unvalued:
                    self.assign(child, share)
            # several unvalued children with valued descendants: wait for them
        else:
            if valued and not unvalued:
                self.assign(node, sum(self.values[c] for c in valued) / len(valued))
            elif valued and not self.has_valued_descendant(unvalued):
                partial = sum(self.values[c] for c in valued) / len(valued)
                self.assign(node, partial)
                for child in unvalued:
                    self.assign(child, partial)
            # no valued children yet, or information still below: wait


def propagate(taxonomy: ValueTaxonomy) -> PropagationResult:
    """Extend the taxonomy's importance assignment to every node the
    mean-coherence constraint determines, verifying coherence along the way.

    Raises IncoherentInput when given values contradict each other,
    ConflictingAssignment when two propagation paths through a shared node
    disagree, and RangeViolation when a propagated value leaves [-1, 1].
    Each exception carries the values assigned before detection.
    """
    require_valid(taxonomy)
    run = _Run(taxonomy)
    order = topological_order(taxonomy)
    limit = len(taxonomy.nodes) + 1
    iterations = 0
    while True:
        iterations += 1
        if iterations > limit:
            raise AssertionError("propagation failed to reach a fixpoint")
        before = len(run.values)
        for node in order:
            run.process(node)
        if len(run.values) == before:
            break
    return PropagationResult(
        taxonomy=taxonomy.with_importance(run.values),
        assigned=run.assigned,
        iterations=iterations,
    )


def check_coherence(taxonomy: ValueTaxonomy,
                    op: AggregationOperator = MEAN,
                    rel_tol: float = REL_TOL,
                    abs_tol: float = ABS_TOL) -> CoherenceReport:
    """Verify each valued parent's importance against the aggregate of its
    children's importances.

    Parents that cannot be evaluated (own value or a child value missing)
    are listed as unevaluable, not as violations.
    """
    violations: list[CoherenceViolation] = []
    unevaluable: list[NodeId] = []
    for node in sorted(taxonomy.nodes):
        kids = taxonomy._children[node]
        if not kids:
            continue
        actual = taxonomy.importance.get(node)
        child_values = [taxonomy.importance.get(c) for c in kids]
        if actual is None or any(v is None for v in child_values):
            unevaluable.append(node)
            continue
        expected = op.apply(tuple(child_values))
        if not _close(actual, expected, rel_tol, abs_tol):
            violations.append(CoherenceViolation(node, expected, actual))
    return CoherenceReport(
        coherent=not violations,
        violations=tuple(violations),
        unevaluable=tuple(unevaluable),
    )
