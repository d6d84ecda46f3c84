"""Source/sink taint findings over the unified call graph.

Sources and sinks are signature wildcard patterns grouped into named
categories. A finding connects a source-invoking method X to a
sink-invoking method Y with a call path X -> Y, plus an entry path from a
root to X. Granularity is one finding per (source signature, sink
signature, X, Y) tuple.

`crossesBridge` is witness-based: it is False exactly when X is reachable
from the roots and Y from X without using any bridge edge, and the
exhibited paths are then chosen inside that bridge-free subgraph. So a
finding crosses the bridge if and only if its evidence does.
"""

from __future__ import annotations

import json
import re
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path

from .callgraph import EDGE_BRIDGE, CallGraph


# --------------------------------------------------------------------------
# source/sink specification

@dataclass(frozen=True)
class TaintCategory:
    name: str
    patterns: tuple[str, ...]


@dataclass(frozen=True)
class SourcesSinks:
    sources: tuple[TaintCategory, ...]
    sinks: tuple[TaintCategory, ...]


DEFAULT_SOURCES_SINKS = SourcesSinks(
    sources=(
        TaintCategory("Telephony", (
            "<android.telephony.TelephonyManager: * getDeviceId(*)>",
            "<android.telephony.TelephonyManager: * getLine1Number(*)>",
            "<android.telephony.TelephonyManager: * getSubscriberId(*)>",
            "<android.telephony.TelephonyManager: * getSimSerialNumber(*)>",
        )),
        TaintCategory("Location", (
            "<android.location.LocationManager: * getLastKnownLocation(*)>",
        )),
        TaintCategory("Database", (
            "<android.database.Cursor: * getString(*)>",
        )),
        TaintCategory("Wi-Fi", (
            "<android.net.wifi.WifiInfo: * getSSID(*)>",
            "<android.net.wifi.WifiInfo: * getMacAddress(*)>",
        )),
    ),
    sinks=(
        TaintCategory("Replace", (
            "<java.lang.String: java.lang.String replace("
            "java.lang.CharSequence,java.lang.CharSequence)>",
        )),
        TaintCategory("SharedPreferences", (
            "<android.content.SharedPreferences$Editor: * putString(*)>",
        )),
        TaintCategory("ContentResolver", (
            "<android.content.ContentResolver: * insert(*)>",
        )),
        TaintCategory("Activity", (
            "<*: * startActivity(*)>",
        )),
        TaintCategory("Intent", (
            "<android.content.Intent: * putExtra(*)>",
        )),
    ),
)


def _category_list(raw, path: str) -> tuple[TaintCategory, ...]:
    if not isinstance(raw, list):
        raise ValueError(f"{path}: expected a list")
    out = []
    for i, item in enumerate(raw):
        if not isinstance(item, dict) or not isinstance(
                item.get("category"), str):
            raise ValueError(f"{path}[{i}].category: expected a string")
        patterns = item.get("patterns")
        if (not isinstance(patterns, list) or not patterns
                or any(not isinstance(p, str) or not p for p in patterns)):
            raise ValueError(
                f"{path}[{i}].patterns: expected a non-empty string list")
        out.append(TaintCategory(item["category"], tuple(patterns)))
    return tuple(out)


def load_sources_sinks(source: dict | str | Path) -> SourcesSinks:
    """Load {"sources": [{category, patterns}], "sinks": [...]} JSON."""
    if isinstance(source, (str, Path)):
        raw = json.loads(Path(source).read_text())
    else:
        raw = source
    if not isinstance(raw, dict):
        raise ValueError("$: expected an object")
    return SourcesSinks(
        sources=_category_list(raw.get("sources", []), "$.sources"),
        sinks=_category_list(raw.get("sinks", []), "$.sinks"))


def pattern_matches(pattern: str, signature: str) -> bool:
    """Wildcard match; angle brackets on either side are cosmetic."""
    p = pattern.strip().removeprefix("<").removesuffix(">")
    s = signature.strip().removeprefix("<").removesuffix(">")
    regex = ".*".join(re.escape(part) for part in p.split("*"))
    return re.fullmatch(regex, s) is not None


# --------------------------------------------------------------------------
# findings

@dataclass(frozen=True)
class TaintFinding:
    sourceCategory: str
    sinkCategory: str
    sourceSig: str
    sinkSig: str
    sourceInvoker: str
    sinkInvoker: str
    entryPath: tuple[str, ...]      # root .. sourceInvoker
    path: tuple[str, ...]           # sourceInvoker .. sinkInvoker
    crossesBridge: bool


@dataclass
class TaintResult:
    findings: list[TaintFinding]
    timed_out: bool = False


class _Deadline:
    def __init__(self, minutes: float | None):
        self.at = None if minutes is None else time.monotonic() + minutes * 60

    def hit(self) -> bool:
        return self.at is not None and time.monotonic() >= self.at


def _adjacency(graph: CallGraph, bridge_free: bool) -> dict[str, list[str]]:
    adj: dict[str, set[str]] = {}
    for src, dst, kind in graph.edges:
        if bridge_free and kind == EDGE_BRIDGE:
            continue
        adj.setdefault(src, set()).add(dst)
    return {k: sorted(v) for k, v in adj.items()}


def _bfs_path(adj: dict[str, list[str]], starts: list[str],
              goal: str) -> tuple[str, ...] | None:
    """Shortest path from any start to goal; deterministic tie-breaking."""
    starts = sorted(set(starts))
    if goal in starts:
        return (goal,)
    parent: dict[str, str] = {}
    seen = set(starts)
    queue = deque(starts)
    while queue:
        cur = queue.popleft()
        for nxt in adj.get(cur, ()):
            if nxt in seen:
                continue
            seen.add(nxt)
            parent[nxt] = cur
            if nxt == goal:
                path = [goal]
                while path[-1] not in starts:
                    path.append(parent[path[-1]])
                return tuple(reversed(path))
            queue.append(nxt)
    return None


def _reachable(adj: dict[str, list[str]], starts) -> set[str]:
    seen = set()
    queue = deque(starts)
    while queue:
        cur = queue.popleft()
        if cur in seen:
            continue
        seen.add(cur)
        queue.extend(adj.get(cur, ()))
    return seen


def _match_nodes(graph: CallGraph,
                 categories: tuple[TaintCategory, ...],
                 ) -> list[tuple[str, str]]:
    """(category, nodeId) pairs for nodes matching any category pattern."""
    out = []
    for node_id in sorted(graph.nodes):
        for cat in categories:
            if any(pattern_matches(p, node_id) for p in cat.patterns):
                out.append((cat.name, node_id))
                break
    return out


def run_taint(graph: CallGraph,
              spec: SourcesSinks = DEFAULT_SOURCES_SINKS,
              timeout_minutes: float | None = None) -> TaintResult:
    deadline = _Deadline(timeout_minutes)
    full = _adjacency(graph, bridge_free=False)
    free = _adjacency(graph, bridge_free=True)
    roots = sorted(graph.roots)
    free_from_roots = _reachable(free, roots)

    sources = _match_nodes(graph, spec.sources)
    sinks = _match_nodes(graph, spec.sinks)

    findings: dict[tuple, TaintFinding] = {}
    for src_cat, src_sig in sources:
        if deadline.hit():
            return TaintResult(sorted_findings(findings), timed_out=True)
        invokers_x = graph.predecessors(src_sig)
        for x in invokers_x:
            reach_full = _reachable(full, [x])
            reach_free = _reachable(free, [x])
            x_free = x in free_from_roots
            for snk_cat, snk_sig in sinks:
                if deadline.hit():
                    return TaintResult(sorted_findings(findings),
                                       timed_out=True)
                for y in graph.predecessors(snk_sig):
                    if y not in reach_full:
                        continue
                    key = (src_sig, snk_sig, x, y)
                    if key in findings:
                        continue
                    y_free = y in reach_free
                    crosses = not (x_free and y_free)
                    entry = _bfs_path(free if x_free else full, roots, x)
                    walk = _bfs_path(free if y_free else full, [x], y)
                    if entry is None or walk is None:
                        continue
                    findings[key] = TaintFinding(
                        src_cat, snk_cat, src_sig, snk_sig, x, y,
                        entry, walk, crosses)
    return TaintResult(sorted_findings(findings), timed_out=False)


def sorted_findings(findings: dict[tuple, TaintFinding]) -> list[TaintFinding]:
    return sorted(findings.values(), key=lambda f: (
        f.sourceCategory, f.sinkCategory, f.sourceSig, f.sinkSig,
        f.sourceInvoker, f.sinkInvoker))


# --------------------------------------------------------------------------
# aggregation

@dataclass
class CategoryBreakdown:
    counts: dict[tuple[str, str], int]

    def sankey(self) -> dict:
        """Flow diagram document: source categories on the left, sink
        categories on the right, link value = finding count."""
        src_names = sorted({s for s, _ in self.counts})
        snk_names = sorted({k for _, k in self.counts})
        index = {("src", n): i for i, n in enumerate(src_names)}
        index.update({("snk", n): len(src_names) + i
                      for i, n in enumerate(snk_names)})
        return {
            "nodes": [{"name": n} for n in src_names + snk_names],
            "links": [{"source": index[("src", s)],
                       "target": index[("snk", k)],
                       "value": self.counts[(s, k)]}
                      for s, k in sorted(self.counts)],
        }


def categorize_findings(findings: list[TaintFinding]) -> CategoryBreakdown:
    counts: dict[tuple[str, str], int] = {}
    for f in findings:
        key = (f.sourceCategory, f.sinkCategory)
        counts[key] = counts.get(key, 0) + 1
    return CategoryBreakdown(counts)
