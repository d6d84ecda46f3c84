"""Independent brute-force oracles used to compute frozen expected values.

These are deliberately naive re-derivations, kept free of any import from
the implementation's internals beyond public data types, so a bug in the
package cannot hide inside its own test expectations.
"""

from __future__ import annotations

from collections import deque


# --- control flow -----------------------------------------------------------

UNCOND = {"Jmp"}
COND = {"JmpTrue", "JmpFalse"}
STOP = {"Ret", "Throw"}


def _target_label(ins):
    for op in ins.operands:
        if op.kind.name == "LABEL":
            return op.value
    return None


def naive_blocks(func):
    """Recompute basic blocks instruction by instruction.

    A block starts at 0, at any label target, and right after any
    control-transfer instruction (jump of any kind, Ret, Throw).
    """
    n = len(func.instructions)
    if n == 0:
        return [], set()
    starts = {0} | set(func.labels.values())
    for ins in func.instructions:
        transfers = (ins.opcode in UNCOND or ins.opcode in COND
                     or ins.opcode in STOP or _target_label(ins) is not None)
        if transfers and ins.index + 1 < n:
            starts.add(ins.index + 1)
    ordered = sorted(starts)
    blocks = []
    for i, s in enumerate(ordered):
        e = ordered[i + 1] if i + 1 < len(ordered) else n
        blocks.append(list(range(s, e)))
    owner = {}
    for bi, blk in enumerate(blocks):
        for idx in blk:
            owner[idx] = bi
    edges = set()
    for bi, blk in enumerate(blocks):
        last = func.instructions[blk[-1]]
        lbl = _target_label(last)
        if last.opcode in STOP:
            continue
        if last.opcode in UNCOND and lbl is not None:
            edges.add((bi, owner[func.labels[lbl]]))
            continue
        if lbl is not None:
            edges.add((bi, owner[func.labels[lbl]]))
        if bi + 1 < len(blocks):
            edges.add((bi, bi + 1))
    return blocks, edges


# --- text level counts ------------------------------------------------------

def count_instruction_lines(canonical_text: str) -> int:
    """Count instruction lines in a canonical document by shape alone."""
    count = 0
    in_function = False
    for line in canonical_text.splitlines():
        bare = line.strip()
        if not bare:
            continue
        if bare.startswith("Function<") and bare.endswith("):"):
            in_function = True
            continue
        if bare.endswith(":") and not bare.startswith("L") and not line[:1].isspace():
            in_function = False
            continue
        if in_function and line[:1].isspace():
            first = bare.split(None, 1)[0]
            if first[:1].isalpha() and not bare.endswith(":"):
                count += 1
    return count


# --- graphs -----------------------------------------------------------------

def transitive_closure(edges: set[tuple[str, str]]) -> set[tuple[str, str]]:
    """All (a, b) pairs with a nonempty path from a to b."""
    adj: dict[str, set[str]] = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
    closure = set()
    for start in set(adj) | {b for _, b in edges}:
        seen: set[str] = set()
        queue = deque(adj.get(start, ()))
        while queue:
            node = queue.popleft()
            if node in seen:
                continue
            seen.add(node)
            queue.extend(adj.get(node, ()))
        closure.update((start, t) for t in seen)
    return closure


def reachable_from(starts, edges) -> set:
    """Plain BFS closure including the start nodes themselves."""
    adj: dict = {}
    for a, b in edges:
        adj.setdefault(a, set()).add(b)
    seen = set()
    queue = deque(starts)
    while queue:
        node = queue.popleft()
        if node in seen:
            continue
        seen.add(node)
        queue.extend(adj.get(node, ()))
    return seen


# --- java hierarchy ---------------------------------------------------------

def super_chain(model, name):
    """Names of all transitive superclasses of a class, resolved in-model."""
    chain = []
    cls = model.classes.get(name)
    while cls is not None and cls.superName:
        chain.append(cls.superName)
        cls = model.classes.get(cls.superName)
    return chain


def all_interfaces(model, name):
    """Interface names visible on a class through supers and super-interfaces."""
    out: set[str] = set()
    stack = [name]
    seen = set()
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        seen.add(cur)
        cls = model.classes.get(cur)
        if cls is None:
            continue
        out.update(cls.interfaces)
        stack.extend(cls.interfaces)
        if cls.superName:
            stack.append(cls.superName)
    return out
