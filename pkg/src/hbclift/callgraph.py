"""One call graph over both sides of the app.

Node ids are rendered method signatures; JavaScript methods live in the
synthetic bytecode class, Java methods keep their own classes, and builtin
targets use a reserved class name. The graph is pruned to what is
reachable from the roots (JavaScript entry functions plus any configured
Java root classes), so bridge edges are exactly what makes the native side
show up: building with and without them quantifies the blind spot of
single-sided analysis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from collections import deque

from .bridge import (
    DEFAULT_BUILTINS, BridgeMatch, match_invocations, recover_builtins,
)
from .ir import IrError, make_signature, parse_signature
from .javamodel import (
    BindingSet, ClassModel, ModelError, extract_bindings, _marker_match,
)
from .lifter import LiftedProgram

EDGE_JS_INTRA = "JsIntra"
EDGE_JAVA_INTRA = "JavaIntra"
EDGE_BRIDGE = "Bridge"
EDGE_BUILTIN = "Builtin"

BUILTIN_CLASS = "JavaScript.Builtin"


class UnknownRoot(Exception):
    """A configured Java root class matched nothing in the model."""


@dataclass(frozen=True)
class GraphNode:
    id: str
    side: str                     # "js" | "java" | "builtin"
    external: bool = False


@dataclass(frozen=True)
class GraphOptions:
    withBridge: bool = True
    javaRoots: tuple[str, ...] = ()
    builtins: tuple[str, ...] = DEFAULT_BUILTINS


@dataclass(frozen=True)
class CoverageStats:
    jsCallSites: int
    resolvedJsCallSites: int
    unresolvedJsCallSites: int
    bridgeMatches: int
    builtinMatches: int


@dataclass
class CallGraph:
    nodes: dict[str, GraphNode]
    edges: frozenset[tuple[str, str, str]]      # (src, dst, kind)
    roots: tuple[str, ...]
    coverage: CoverageStats

    def counts(self) -> tuple[int, int]:
        return len(self.nodes), len(self.edges)

    def successors(self, node_id: str) -> list[str]:
        return sorted({dst for src, dst, _ in self.edges if src == node_id})

    def predecessors(self, node_id: str) -> list[str]:
        return sorted({src for src, dst, _ in self.edges if dst == node_id})


def _java_method_nodes(model: ClassModel) -> dict[str, list[str]]:
    """Rendered signature ids of every modeled method, keyed by class."""
    out: dict[str, list[str]] = {}
    for cls in model:
        out[cls.name] = [
            make_signature(cls.name, m.name, m.params, m.returnType).render()
            for m in cls.methods]
    return out


def build_callgraph(lifted: LiftedProgram,
                    model: ClassModel | None = None,
                    options: GraphOptions = GraphOptions(),
                    bindings: BindingSet | None = None) -> CallGraph:
    nodes: dict[str, GraphNode] = {}
    edges: set[tuple[str, str, str]] = set()

    def add_node(node_id: str, side: str, external: bool = False) -> None:
        nodes.setdefault(node_id, GraphNode(node_id, side, external))

    # JavaScript side.
    for method in lifted.ir:
        add_node(method.sig.render(), "js")

    resolved_sites: set[tuple[str, int]] = set()

    def site_key(site) -> tuple[str, int]:
        return (site.callerSig.render(), site.statementIndex)

    for site in lifted.call_sites:
        if site.calleeFunctionId is not None:
            callee = lifted.identities[site.calleeFunctionId].sig.render()
            edges.add((site.callerSig.render(), callee, EDGE_JS_INTRA))
            resolved_sites.add(site_key(site))

    # Java side.
    java_by_class: dict[str, list[str]] = {}
    if model is not None:
        java_by_class = _java_method_nodes(model)
        declared = {n for ids in java_by_class.values() for n in ids}
        for node_id in declared:
            add_node(node_id, "java")
        for cls in model:
            for m in cls.methods:
                src = make_signature(
                    cls.name, m.name, m.params, m.returnType).render()
                for call in m.calls:
                    try:
                        target = parse_signature(call).render()
                    except IrError as exc:
                        raise ModelError(
                            f"{cls.name}.{m.name}: bad call summary "
                            f"{call!r}") from exc
                    add_node(target, "java", external=target not in declared)
                    edges.add((src, target, EDGE_JAVA_INTRA))

    # Bridge edges.
    bridge_matches: list[BridgeMatch] = []
    if options.withBridge and model is not None:
        if bindings is None:
            bindings = extract_bindings(model)
        bridge_matches = match_invocations(lifted.call_sites, bindings)
        for m in bridge_matches:
            target = m.javaSig.render()
            add_node(target, "java",
                     external=nodes.get(target) is None)
            edges.add((m.callSite.callerSig.render(), target, EDGE_BRIDGE))
            resolved_sites.add(site_key(m.callSite))

    # Builtin edges, for call sites nothing else explained.
    bridged = {site_key(m.callSite) for m in bridge_matches}
    open_sites = [s for s in lifted.call_sites if site_key(s) not in bridged]
    builtin_matches = recover_builtins(open_sites, options.builtins)
    for m in builtin_matches:
        target = f"<{BUILTIN_CLASS}: {m.builtinName}>"
        add_node(target, "builtin", external=True)
        edges.add((m.callSite.callerSig.render(), target, EDGE_BUILTIN))
        resolved_sites.add(site_key(m.callSite))

    # Roots: JS entry functions plus configured Java root classes.
    roots = [i.sig.render() for i in lifted.identities.values() if i.isRoot]
    for marker in options.javaRoots:
        if model is None:
            raise UnknownRoot(f"{marker}: no class model given")
        hit = [name for name in java_by_class
               if _marker_match(name, marker)]
        if not hit:
            raise UnknownRoot(f"{marker}: no such class in the model")
        for name in hit:
            roots.extend(java_by_class[name])

    # Prune to reachability.
    adjacency: dict[str, list[str]] = {}
    for src, dst, _ in edges:
        adjacency.setdefault(src, []).append(dst)
    keep: set[str] = set()
    queue = deque(r for r in roots if r in nodes)
    while queue:
        cur = queue.popleft()
        if cur in keep:
            continue
        keep.add(cur)
        queue.extend(adjacency.get(cur, ()))

    kept_nodes = {nid: n for nid, n in nodes.items() if nid in keep}
    kept_edges = frozenset(e for e in edges if e[0] in keep)

    all_sites = {site_key(s) for s in lifted.call_sites}
    coverage = CoverageStats(
        jsCallSites=len(all_sites),
        resolvedJsCallSites=len(resolved_sites),
        unresolvedJsCallSites=len(all_sites - resolved_sites),
        bridgeMatches=len(bridge_matches),
        builtinMatches=len(builtin_matches))

    ordered_roots = tuple(sorted({r for r in roots if r in kept_nodes}))
    return CallGraph(kept_nodes, kept_edges, ordered_roots, coverage)


# --------------------------------------------------------------------------
# growth accounting

@dataclass(frozen=True)
class DeltaStats:
    nodesBefore: int
    nodesAfter: int
    nodesAdded: int
    nodesPct: float | None
    edgesBefore: int
    edgesAfter: int
    edgesAdded: int
    edgesPct: float | None


def _counts(graph) -> tuple[int, int]:
    if isinstance(graph, CallGraph):
        return graph.counts()
    n, e = graph
    return int(n), int(e)


def diff_callgraphs(before, after) -> DeltaStats:
    """Growth from `before` to `after`; accepts graphs or (nodes, edges)."""
    nb, eb = _counts(before)
    na, ea = _counts(after)

    def pct(added: int, base: int) -> float | None:
        return round(added / base * 100, 2) if base else None

    return DeltaStats(nb, na, na - nb, pct(na - nb, nb),
                      eb, ea, ea - eb, pct(ea - eb, eb))


# --------------------------------------------------------------------------
# export

def _dot_quote(text: str) -> str:
    return '"%s"' % text.replace("\\", "\\\\").replace('"', '\\"')


def export_graph(graph: CallGraph, fmt: str = "json") -> str:
    """Deterministic serialization; identical graphs give identical bytes."""
    if fmt == "json":
        doc = {
            "nodes": [{"id": n.id, "side": n.side, "external": n.external,
                       "root": n.id in graph.roots}
                      for n in sorted(graph.nodes.values(),
                                      key=lambda n: n.id)],
            "edges": [{"src": s, "dst": d, "kind": k}
                      for s, d, k in sorted(graph.edges)],
            "roots": sorted(graph.roots),
            "coverage": {
                "jsCallSites": graph.coverage.jsCallSites,
                "resolvedJsCallSites": graph.coverage.resolvedJsCallSites,
                "unresolvedJsCallSites": graph.coverage.unresolvedJsCallSites,
                "bridgeMatches": graph.coverage.bridgeMatches,
                "builtinMatches": graph.coverage.builtinMatches,
            },
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if fmt == "dot":
        shape = {"js": "box", "java": "ellipse", "builtin": "diamond"}
        lines = ["digraph callgraph {"]
        for node in sorted(graph.nodes.values(), key=lambda n: n.id):
            attrs = [f"shape={shape[node.side]}"]
            if node.id in graph.roots:
                attrs.append("penwidth=2")
            if node.external:
                attrs.append("style=dashed")
            lines.append(f"  {_dot_quote(node.id)} [{', '.join(attrs)}];")
        for src, dst, kind in sorted(graph.edges):
            lines.append(f"  {_dot_quote(src)} -> {_dot_quote(dst)} "
                         f"[label={_dot_quote(kind)}];")
        lines.append("}")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown export format {fmt!r}")
