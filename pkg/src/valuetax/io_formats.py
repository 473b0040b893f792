"""Document formats: taxonomies and contexts as JSON, event logs as JSON
lines, and DOT export for rendering.

Serialization is deterministic - nodes and edges are emitted in sorted
order and floats use their shortest exact decimal form - so that
serialize(parse(serialize(t))) is byte-identical and round-trips preserve
node, edge, and importance content exactly. Parse failures carry a location
(line/column for malformed JSON, a field path otherwise).
"""

from __future__ import annotations

import json
from typing import Any, Iterable

from .context import ContextSpec, SelectionKind, SelectionStrategy
from .errors import InvalidTaxonomy, MalformedEvent, ParseError, SchemaVersionUnsupported
from .mutual_aid import Event, EventKind
from .taxonomy import (
    Node,
    NodeKind,
    ValidationReport,
    ValueTaxonomy,
    validate,
)

SCHEMA_VERSION = 1


def _load_json(text: str, what: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}", f"invalid {what}: {exc.msg}") from exc


def _require(mapping: Any, key: str, location: str) -> Any:
    if not isinstance(mapping, dict):
        raise ParseError(location, f"expected an object, got {type(mapping).__name__}")
    if key not in mapping:
        raise ParseError(f"{location}.{key}", "missing required field")
    return mapping[key]


def _check_version(doc: Any, location: str = "document") -> None:
    version = _require(doc, "schema_version", location)
    if version != SCHEMA_VERSION:
        raise SchemaVersionUnsupported(version)


def _parse_importance(raw: Any, location: str) -> float:
    if not isinstance(raw, (int, float)) or isinstance(raw, bool):
        raise ParseError(location, f"importance must be a number, got {raw!r}")
    value = float(raw)
    if not (-1.0 <= value <= 1.0):
        raise ParseError(location, f"importance {value} outside [-1, 1]")
    return value


def parse_taxonomy(text: str, require_valid_structure: bool = True) -> ValueTaxonomy:
    """Parse a taxonomy document.

    With ``require_valid_structure`` (the default) the parsed taxonomy must
    also pass structural validation; pass False to load a candidate for
    inspection with :func:`~valuetax.taxonomy.validate`.
    """
    doc = _load_json(text, "taxonomy document")
    _check_version(doc)
    nodes: list[Node] = []
    importance: dict[str, float] = {}
    raw_nodes = _require(doc, "nodes", "document")
    if not isinstance(raw_nodes, list):
        raise ParseError("document.nodes", "must be a list")
    for i, raw in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        node_id = _require(raw, "id", where)
        if not isinstance(node_id, str) or not node_id:
            raise ParseError(f"{where}.id", "node id must be a non-empty string")
        kind = _require(raw, "kind", where)
        if kind == NodeKind.LABEL.value:
            label_text = raw.get("label_text", node_id)
            if not isinstance(label_text, str):
                raise ParseError(f"{where}.label_text", f"must be a string, got {label_text!r}")
            node = Node(node_id, NodeKind.LABEL, label_text=label_text)
        elif kind == NodeKind.PROPERTY.value:
            ref = raw.get("property_id", node_id)
            if not isinstance(ref, str):
                raise ParseError(f"{where}.property_id", f"must be a string, got {ref!r}")
            node = Node(node_id, NodeKind.PROPERTY, property_id=ref)
        else:
            raise ParseError(f"{where}.kind", f"unknown node kind: {kind!r}")
        if any(n.id == node_id for n in nodes):
            raise ParseError(f"{where}.id", f"duplicate node id: {node_id!r}")
        nodes.append(node)
        if "importance" in raw and raw["importance"] is not None:
            importance[node_id] = _parse_importance(raw["importance"], f"{where}.importance")
    edges: list[tuple[str, str]] = []
    raw_edges = doc.get("edges", [])
    if not isinstance(raw_edges, list):
        raise ParseError("document.edges", "must be a list")
    for i, raw in enumerate(raw_edges):
        where = f"edges[{i}]"
        parent = _require(raw, "parent", where)
        child = _require(raw, "child", where)
        if not isinstance(parent, str) or not isinstance(child, str):
            raise ParseError(where, "edge endpoints must be node id strings")
        if (parent, child) in edges:
            raise ParseError(where, f"duplicate edge {parent!r} -> {child!r}")
        edges.append((parent, child))
    taxonomy = ValueTaxonomy.build(nodes, edges, importance)
    if require_valid_structure:
        report = validate(taxonomy)
        if not report.ok:
            first = report.violations[0]
            raise ParseError(f"rule {first.rule}", first.message)
    return taxonomy


def serialize_taxonomy(taxonomy: ValueTaxonomy) -> str:
    """Render a taxonomy document; output is deterministic for equal inputs."""
    nodes = []
    for node_id in sorted(taxonomy.nodes):
        node = taxonomy.nodes[node_id]
        entry: dict[str, Any] = {"id": node.id, "kind": node.kind.value}
        if node.kind is NodeKind.LABEL:
            entry["label_text"] = node.label_text
        else:
            entry["property_id"] = node.property_id
        if node_id in taxonomy.importance:
            entry["importance"] = taxonomy.importance[node_id]
        nodes.append(entry)
    edges = [{"parent": p, "child": c} for p, c in sorted(taxonomy.edges)]
    doc = {"schema_version": SCHEMA_VERSION, "nodes": nodes, "edges": edges}
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def parse_context(text: str) -> ContextSpec:
    """Parse a context document into a ContextSpec."""
    doc = _load_json(text, "context document")
    _check_version(doc)
    ctx_id = _require(doc, "id", "document")
    if not isinstance(ctx_id, str) or not ctx_id:
        raise ParseError("document.id", "context id must be a non-empty string")
    raw_props = doc.get("defining_properties", [])
    if not isinstance(raw_props, list) or not all(isinstance(p, str) for p in raw_props):
        raise ParseError("document.defining_properties", "must be a list of property names")
    raw_importance = doc.get("property_importance", {})
    if not isinstance(raw_importance, dict):
        raise ParseError("document.property_importance", "must be an object")
    importance = {
        node: _parse_importance(value, f"property_importance.{node}")
        for node, value in raw_importance.items()
    }
    selection = _parse_selection(doc.get("selection"))
    return ContextSpec(
        id=ctx_id,
        defining_properties=frozenset(raw_props),
        property_importance=importance,
        selection=selection,
    )


def _parse_selection(raw: Any) -> SelectionStrategy:
    if raw is None:
        return SelectionStrategy()
    kind = _require(raw, "kind", "selection")
    try:
        selection_kind = SelectionKind(kind)
    except (TypeError, ValueError):
        raise ParseError("selection.kind", f"unknown selection strategy: {kind!r}") from None
    if selection_kind is SelectionKind.POSITIVE_THRESHOLD:
        threshold = raw.get("threshold", 0.0)
        return SelectionStrategy(selection_kind, _parse_importance(threshold, "selection.threshold"))
    return SelectionStrategy(selection_kind)


def serialize_context(ctx: ContextSpec) -> str:
    selection: dict[str, Any] = {"kind": ctx.selection.kind.value}
    if ctx.selection.kind is SelectionKind.POSITIVE_THRESHOLD:
        selection["threshold"] = ctx.selection.threshold
    doc = {
        "schema_version": SCHEMA_VERSION,
        "id": ctx.id,
        "defining_properties": sorted(ctx.defining_properties),
        "property_importance": {n: ctx.property_importance[n] for n in sorted(ctx.property_importance)},
        "selection": selection,
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def parse_event_log(text: str) -> list[Event]:
    """Parse a line-delimited event log; blank lines are skipped.

    Timestamps must be non-decreasing in file order.
    """
    events: list[Event] = []
    last_timestamp = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedEvent(lineno, f"invalid record: {exc.msg}") from exc
        if not isinstance(raw, dict):
            raise MalformedEvent(lineno, "record must be an object")
        try:
            kind = EventKind(raw.get("kind"))
        except (TypeError, ValueError):
            raise MalformedEvent(lineno, f"unknown event kind: {raw.get('kind')!r}") from None
        member = raw.get("member")
        timestamp = raw.get("timestamp")
        try:
            event = Event(kind, member, timestamp)
        except ValueError as exc:
            raise MalformedEvent(lineno, str(exc)) from exc
        if last_timestamp is not None and event.timestamp < last_timestamp:
            raise MalformedEvent(lineno, f"timestamp {event.timestamp} decreases from {last_timestamp}")
        last_timestamp = event.timestamp
        events.append(event)
    return events


def serialize_event_log(events: Iterable[Event]) -> str:
    lines = [
        json.dumps({"kind": e.kind.value, "member": e.member, "timestamp": e.timestamp})
        for e in events
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(taxonomy: ValueTaxonomy) -> str:
    """Render a valid taxonomy as a DOT digraph.

    Label nodes are drawn as circles and property nodes as squares; a node's
    importance, when assigned, is printed under its name. Output is
    byte-deterministic for equal inputs.
    """
    report: ValidationReport = validate(taxonomy)
    if not report.ok:
        raise InvalidTaxonomy(report)
    lines = ["digraph value_taxonomy {"]
    for node_id in sorted(taxonomy.nodes):
        node = taxonomy.nodes[node_id]
        shape = "circle" if node.kind is NodeKind.LABEL else "square"
        label = node.display.replace("\\", "\\\\").replace('"', '\\"')
        if node_id in taxonomy.importance:
            # \n is DOT's in-label line break, kept out of _dot_quote's escaping
            label = f"{label}\\n{taxonomy.importance[node_id]:.6f}"
        lines.append(f'  {_dot_quote(node_id)} [shape={shape}, label="{label}"];')
    for parent, child in sorted(taxonomy.edges):
        lines.append(f"  {_dot_quote(parent)} -> {_dot_quote(child)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
