"""Actor-dependent attack paths and the attack-surface overlay graph."""

from __future__ import annotations

from dataclasses import dataclass

from ragrisk.catalog import Workspace
from ragrisk.model import ActorClass, AttackFlow, FlowStep


class UnknownActorError(Exception):
    """Raised when a flow has no entry point for the requested actor."""


ACTOR_NODE_IDS: dict[ActorClass, str] = {
    ActorClass.EXTERNAL: "actor_external",
    ActorClass.INSIDER: "actor_insider",
    ActorClass.UNWITTING_INSIDER: "actor_unwitting_insider",
}

ACTOR_LABELS: dict[ActorClass, str] = {
    ActorClass.EXTERNAL: "External actor",
    ActorClass.INSIDER: "Insider",
    ActorClass.UNWITTING_INSIDER: "Unwitting insider",
}


@dataclass(frozen=True)
class ActorPath:
    """The part of an attack flow a given actor actually has to execute."""

    actor: ActorClass
    flow_id: str
    entry_index: int
    executed_steps: tuple[FlowStep, ...]
    skipped_count: int


def actor_path(flow: AttackFlow, actor: ActorClass) -> ActorPath:
    """Resolve where ``actor`` enters ``flow`` and which steps remain.

    An unwitting insider without an explicit entry point inherits the
    insider's entry: both start from inside the trust boundary, whatever
    their intent. Steps before the entry are skipped, not executed; that
    is what makes insider-driven attacks faster.
    """
    entry = flow.entry_points.get(actor)
    if entry is None and actor is ActorClass.UNWITTING_INSIDER:
        entry = flow.entry_points.get(ActorClass.INSIDER)
    if entry is None:
        raise UnknownActorError(
            f"flow {flow.id!r} has no entry point for actor {actor.value!r}"
        )
    return ActorPath(
        actor=actor,
        flow_id=flow.id,
        entry_index=entry,
        executed_steps=tuple(flow.steps[entry - 1 :]),
        skipped_count=entry - 1,
    )


@dataclass(frozen=True)
class GraphNode:
    id: str
    label: str
    kind: str  # "component" or "actor"


@dataclass(frozen=True)
class GraphEdge:
    source: str
    target: str
    label: str
    kind: str  # "flow" or "entry"


@dataclass(frozen=True)
class BoundaryCluster:
    id: str
    label: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class SurfaceGraph:
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]
    clusters: tuple[BoundaryCluster, ...]


def build_surface_graph(ws: Workspace) -> SurfaceGraph:
    """Overlay threat entry points on the architecture graph.

    The base graph is the system model (components, data flows, trust
    boundaries as clusters). For every attack flow and every actor with an
    entry point there, an entry edge runs from the actor node to the first
    executed step's target, annotated with that step's technique id. Steps
    without a target fan out to all of the threat's targets, and steps
    without a technique borrow the threat's leading technique, so the
    overlay stays informative for loosely specified flows.
    """
    nodes = [
        GraphNode(id=c.id, label=c.name, kind="component")
        for c in ws.model.components
    ]
    edges = [
        GraphEdge(source=f.source, target=f.target, label=f.data_kind, kind="flow")
        for f in ws.model.data_flows
    ]

    actors_seen: list[ActorClass] = []
    entry_edges: list[GraphEdge] = []
    for threat in ws.threats:
        if not threat.techniques:
            continue
        fallback_technique = threat.techniques[0]
        for flow in threat.flows:
            for actor in ActorClass:
                if actor not in flow.entry_points:
                    continue
                path = actor_path(flow, actor)
                if not path.executed_steps:
                    continue
                first = path.executed_steps[0]
                technique = first.technique or fallback_technique
                targets = [first.target] if first.target else list(threat.targets)
                if actor not in actors_seen:
                    actors_seen.append(actor)
                for target in targets:
                    edge = GraphEdge(
                        source=ACTOR_NODE_IDS[actor],
                        target=target,
                        label=technique.technique_id,
                        kind="entry",
                    )
                    if edge not in entry_edges:
                        entry_edges.append(edge)

    for actor in ActorClass:
        if actor in actors_seen:
            nodes.append(
                GraphNode(
                    id=ACTOR_NODE_IDS[actor],
                    label=ACTOR_LABELS[actor],
                    kind="actor",
                )
            )
    edges.extend(entry_edges)

    clusters = tuple(
        BoundaryCluster(id=b.id, label=b.name, members=b.members)
        for b in ws.model.trust_boundaries
    )
    return SurfaceGraph(nodes=tuple(nodes), edges=tuple(edges), clusters=clusters)


def _quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def export_dot(graph: SurfaceGraph) -> str:
    """Serialize the surface graph as a DOT digraph.

    Trust boundaries become subgraph clusters, actor nodes are drawn as
    hexagons, and entry edges are dashed red so the adversary overlay is
    visually separate from ordinary data flows. Output is byte-stable for
    a given graph.
    """
    labels = {node.id: node.label for node in graph.nodes}
    lines = [
        "digraph attack_surface {",
        "  rankdir=LR;",
        "  node [shape=box];",
    ]
    placed: set[str] = set()
    for cluster in graph.clusters:
        lines.append(f"  subgraph {_quote('cluster_' + cluster.id)} {{")
        lines.append(f"    label={_quote(cluster.label)};")
        for member in cluster.members:
            if member in placed or member not in labels:
                continue
            placed.add(member)
            lines.append(f"    {_quote(member)} [label={_quote(labels[member])}];")
        lines.append("  }")
    for node in graph.nodes:
        if node.id in placed:
            continue
        if node.kind == "actor":
            attrs = f"label={_quote(node.label)}, shape=hexagon, style=dashed"
        else:
            attrs = f"label={_quote(node.label)}"
        lines.append(f"  {_quote(node.id)} [{attrs}];")
    for edge in graph.edges:
        attrs = f"label={_quote(edge.label)}"
        if edge.kind == "entry":
            attrs += ", style=dashed, color=red"
        lines.append(f"  {_quote(edge.source)} -> {_quote(edge.target)} [{attrs}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
