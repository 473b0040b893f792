"""Exception and warning types shared across the package.

Structural problems found by ``validate`` are reported as data, not raised;
the exceptions here cover contract violations (operating on an invalid
taxonomy, unknown nodes, missing inputs) and failures detected while
computing (incoherent or conflicting importance values).
"""

from __future__ import annotations


class TaxonomyError(Exception):
    """Base class for all errors raised by this package."""


class InvalidTaxonomy(TaxonomyError):
    """An operation that requires a structurally valid taxonomy got an invalid one."""

    def __init__(self, report):
        self.report = report
        rules = ", ".join(v.rule for v in report.violations)
        super().__init__(f"taxonomy is invalid: {rules}")


class UnknownNode(TaxonomyError):
    def __init__(self, node: str):
        self.node = node
        super().__init__(f"unknown node: {node!r}")


class DuplicateEdge(TaxonomyError):
    def __init__(self, parent: str, child: str):
        self.edge = (parent, child)
        super().__init__(f"duplicate edge: {parent!r} -> {child!r}")


class EmptyInput(TaxonomyError, ValueError):
    """An aggregation or clustering operation received no values."""


class PropagationError(TaxonomyError):
    """Base class for failures during importance propagation.

    ``assigned`` holds the importance values assigned before the failure was
    detected, for diagnostics; the run itself is failed.
    """

    def __init__(self, node: str, message: str, assigned: dict[str, float] | None = None):
        self.node = node
        self.assigned = dict(assigned or {})
        super().__init__(message)


class IncoherentInput(PropagationError):
    """A node's given importance does not equal the aggregate of its children's."""

    def __init__(self, node: str, expected: float, actual: float,
                 assigned: dict[str, float] | None = None):
        self.expected = expected
        self.actual = actual
        super().__init__(
            node,
            f"importance of {node!r} is {actual} but its children aggregate to {expected}",
            assigned,
        )


class ConflictingAssignment(PropagationError):
    """Two propagation paths through a shared node imply different importance values."""

    def __init__(self, node: str, detail: str, assigned: dict[str, float] | None = None):
        super().__init__(node, f"conflicting propagated values at {node!r}: {detail}", assigned)


class RangeViolation(PropagationError):
    """A propagated importance fell outside the [-1, 1] codomain."""

    def __init__(self, node: str, value: float, assigned: dict[str, float] | None = None):
        self.value = value
        super().__init__(node, f"propagated importance {value} for {node!r} is outside [-1, 1]", assigned)


class MissingEvaluator(TaxonomyError):
    def __init__(self, prop: str):
        self.property = prop
        super().__init__(f"no evaluator registered for property {prop!r}")


class NoPropertyNodes(TaxonomyError):
    """Alignment was requested against a taxonomy without property nodes."""


class MissingImportance(TaxonomyError):
    def __init__(self, node: str):
        self.node = node
        super().__init__(f"property node {node!r} has no assigned importance")


class MissingSatisfaction(TaxonomyError):
    def __init__(self, node: str):
        self.node = node
        super().__init__(f"no satisfaction degree available for property node {node!r}")


class UndefinedRatio(TaxonomyError, ZeroDivisionError):
    """Requests were made but the denominator count is zero."""

    def __init__(self, member: str, detail: str):
        self.member = member
        super().__init__(f"undefined ratio for member {member!r}: {detail}")


class EmptyDistribution(TaxonomyError, ValueError):
    """A distribution difference was requested over an empty or zero-mass distribution."""


class SupportMismatch(TaxonomyError, ValueError):
    """Two distributions being compared do not share the same support."""


class MalformedEvent(TaxonomyError, ValueError):
    def __init__(self, index: int, detail: str):
        self.index = index
        super().__init__(f"malformed event at position {index}: {detail}")


class ParseError(TaxonomyError, ValueError):
    """A document could not be parsed; ``location`` identifies the offending record."""

    def __init__(self, location: str, detail: str):
        self.location = location
        super().__init__(f"{location}: {detail}")


class SchemaVersionUnsupported(ParseError):
    def __init__(self, version):
        self.version = version
        super().__init__("schema_version", f"unsupported schema version: {version!r}")


class EmptySelectionWarning(UserWarning):
    """No property node survived context selection; the built taxonomy is empty."""
