"""Unified three-address IR shared by the JavaScript and Java sides.

The IR is a single static class of static methods. Every call is a
static-style invoke whose class name encodes the receiver chain, so one
statement grammar covers opcode plumbing, JS-to-JS calls, and calls that
later resolve to native module methods:

    r2 = staticinvoke <Hbc.Opcod: Hbc.GlobalObject.console hbcGet(JavaScript.Object,JavaScript.Number,JavaScript.String)>(r0, 1, "console");

Statement kinds: IdentityParam, Assign, StaticInvoke, AssignInvoke, If,
Goto, Return. Branch targets are statement indices that must land on block
starts. All types here are immutable value objects.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class IrError(Exception):
    pass


class EmptyName(IrError):
    """A signature part was empty after trimming."""


class DuplicateSignature(IrError):
    """Two methods with the same signature were added to one program."""


# --------------------------------------------------------------------------
# signatures

@dataclass(frozen=True)
class MethodSig:
    className: str
    methodName: str
    paramTypes: tuple[str, ...]
    returnType: str

    def render(self) -> str:
        return "<%s: %s %s(%s)>" % (
            self.className, self.returnType, self.methodName,
            ",".join(self.paramTypes))

    def __str__(self) -> str:
        return self.render()


def make_signature(class_name: str, method_name: str,
                   param_types: list[str] | tuple[str, ...],
                   return_type: str) -> MethodSig:
    """Build a MethodSig, trimming whitespace. Names are kept case-as-is."""
    cls = class_name.strip()
    name = method_name.strip()
    ret = return_type.strip()
    params = tuple(p.strip() for p in param_types)
    if not cls or not name or not ret or any(not p for p in params):
        raise EmptyName(
            f"empty signature part in ({class_name!r}, {method_name!r}, "
            f"{param_types!r}, {return_type!r})")
    return MethodSig(cls, name, params, ret)


_SIG_RE = re.compile(
    r"^<(?P<cls>[^:<>]+):\s+(?P<ret>\S+)\s+(?P<name>[^\s(]+)"
    r"\((?P<params>[^()]*)\)>$")


def parse_signature(text: str) -> MethodSig:
    """Parse the rendered form back into a MethodSig."""
    m = _SIG_RE.match(text.strip())
    if m is None:
        raise IrError(f"not a method signature: {text!r}")
    params = tuple(p.strip() for p in m.group("params").split(",")
                   if p.strip())
    return make_signature(m.group("cls"), m.group("name"), params,
                          m.group("ret"))


# --------------------------------------------------------------------------
# operands

@dataclass(frozen=True)
class LocalRef:
    name: str

    def render(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    kind: str          # int | double | string | null | undefined
    value: object = None

    def render(self) -> str:
        if self.kind == "string":
            from .hasm import escape_string
            return '"%s"' % escape_string(self.value)
        if self.kind == "null":
            return "null"
        if self.kind == "undefined":
            return "undefined"
        return repr(self.value) if self.kind == "double" else str(self.value)


@dataclass(frozen=True)
class FuncRefArg:
    """A Function<name> operand carried through to the printed form."""
    name: str
    functionId: int | None = None

    def render(self) -> str:
        return f"Function<{self.name}>"


Arg = LocalRef | Const | FuncRefArg


# --------------------------------------------------------------------------
# statements

@dataclass(frozen=True)
class IdentityParam:
    target: str
    index: int
    typeName: str


@dataclass(frozen=True)
class Assign:
    target: str
    source: str


@dataclass(frozen=True)
class Invoke:
    """staticinvoke; an AssignInvoke when target is set, else a StaticInvoke."""
    sig: MethodSig
    args: tuple[Arg, ...]
    target: str | None = None


@dataclass(frozen=True)
class If:
    cond: str
    target: int
    whenTrue: bool = True


@dataclass(frozen=True)
class Goto:
    target: int


@dataclass(frozen=True)
class Return:
    value: Arg | None = None


Statement = IdentityParam | Assign | Invoke | If | Goto | Return


@dataclass(frozen=True)
class IrMethod:
    sig: MethodSig
    locals: tuple[tuple[str, str], ...]          # (name, declaredType)
    statements: tuple[Statement, ...]
    blockStarts: frozenset[int] = frozenset({0})


class IrProgram:
    """Insertion-ordered method collection with unique signatures."""

    def __init__(self):
        self.methods: dict[MethodSig, IrMethod] = {}

    def add_method(self, method: IrMethod) -> None:
        if method.sig in self.methods:
            raise DuplicateSignature(method.sig.render())
        self.methods[method.sig] = method

    def __iter__(self):
        return iter(self.methods.values())

    def __len__(self):
        return len(self.methods)


# --------------------------------------------------------------------------
# validation

@dataclass(frozen=True)
class Violation:
    code: str
    statementIndex: int
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]


def _stmt_uses(stmt: Statement) -> list[str]:
    if isinstance(stmt, Assign):
        return [stmt.source]
    if isinstance(stmt, Invoke):
        return [a.name for a in stmt.args if isinstance(a, LocalRef)]
    if isinstance(stmt, If):
        return [stmt.cond]
    if isinstance(stmt, Return) and isinstance(stmt.value, LocalRef):
        return [stmt.value.name]
    return []


def _stmt_def(stmt: Statement) -> str | None:
    if isinstance(stmt, (IdentityParam, Assign)):
        return stmt.target
    if isinstance(stmt, Invoke):
        return stmt.target
    return None


def validate_body(method: IrMethod) -> ValidationReport:
    """Flow-insensitive structural checks over one method body.

    Use-before-assign fires only when the local has some assignment and its
    first use sits at a strictly lower statement index; locals that are
    never assigned read as ambient undefined and pass (JS semantics).
    """
    violations: list[Violation] = []
    declared: dict[str, str] = {}
    for name, type_name in method.locals:
        if name in declared:
            violations.append(Violation("DuplicateLocal", -1, name))
        declared[name] = type_name

    stmts = method.statements
    n = len(stmts)

    first_assign: dict[str, int] = {}
    first_use: dict[str, int] = {}
    identity_done = False
    for i, stmt in enumerate(stmts):
        if isinstance(stmt, IdentityParam):
            if identity_done:
                violations.append(Violation("IdentityNotPrefix", i, stmt.target))
        else:
            identity_done = True
        for used in _stmt_uses(stmt):
            if used not in declared:
                violations.append(Violation("UndeclaredLocal", i, used))
            first_use.setdefault(used, i)
        defined = _stmt_def(stmt)
        if defined is not None:
            if defined not in declared:
                violations.append(Violation("UndeclaredLocal", i, defined))
            first_assign.setdefault(defined, i)
        if isinstance(stmt, Invoke) and len(stmt.sig.paramTypes) != len(stmt.args):
            violations.append(Violation(
                "ArityMismatch", i,
                f"{stmt.sig.render()} called with {len(stmt.args)} args"))
        if isinstance(stmt, (If, Goto)):
            target = stmt.target
            if not (0 <= target < n) or target not in method.blockStarts:
                violations.append(Violation("BadBranchTarget", i, str(target)))

    for name, use_at in first_use.items():
        assign_at = first_assign.get(name)
        if assign_at is not None and use_at < assign_at:
            violations.append(Violation("UseBeforeAssign", use_at, name))

    if n == 0 or not isinstance(stmts[-1], (Return, Goto)):
        violations.append(Violation("MissingTerminator", max(n - 1, 0), ""))

    violations.sort(key=lambda v: (v.statementIndex, v.code, v.detail))
    return ValidationReport(ok=not violations, violations=tuple(violations))


def statement_blocks(method: IrMethod) -> tuple[tuple[tuple[int, ...], ...],
                                                frozenset[tuple[int, int]]]:
    """Block partition and successor edges over statement indices."""
    n = len(method.statements)
    if n == 0:
        return (), frozenset()
    starts = sorted(s for s in method.blockStarts if 0 <= s < n)
    if not starts or starts[0] != 0:
        starts = [0] + starts
    blocks = []
    for i, s in enumerate(starts):
        e = starts[i + 1] if i + 1 < len(starts) else n
        blocks.append(tuple(range(s, e)))
    owner = {idx: bi for bi, blk in enumerate(blocks) for idx in blk}
    edges = set()
    for bi, blk in enumerate(blocks):
        last = method.statements[blk[-1]]
        if isinstance(last, Return):
            continue
        if isinstance(last, Goto):
            edges.add((bi, owner[last.target]))
            continue
        if isinstance(last, If):
            edges.add((bi, owner[last.target]))
        if bi + 1 < len(blocks):
            edges.add((bi, bi + 1))
    return tuple(blocks), frozenset(edges)


# --------------------------------------------------------------------------
# printing

def _labels_for(method: IrMethod) -> dict[int, str]:
    targets = sorted({s.target for s in method.statements if isinstance(s, (If, Goto))})
    return {t: f"label{k}" for k, t in enumerate(targets)}


def _render_stmt(stmt: Statement, labels: dict[int, str]) -> str:
    if isinstance(stmt, IdentityParam):
        return f"{stmt.target} := @parameter{stmt.index}: {stmt.typeName};"
    if isinstance(stmt, Assign):
        return f"{stmt.target} = {stmt.source};"
    if isinstance(stmt, Invoke):
        call = "staticinvoke %s(%s)" % (
            stmt.sig.render(), ", ".join(a.render() for a in stmt.args))
        return f"{stmt.target} = {call};" if stmt.target else f"{call};"
    if isinstance(stmt, If):
        cond = stmt.cond if stmt.whenTrue else f"not {stmt.cond}"
        return f"if {cond} goto {labels[stmt.target]};"
    if isinstance(stmt, Goto):
        return f"goto {labels[stmt.target]};"
    if isinstance(stmt, Return):
        return f"return {stmt.value.render()};" if stmt.value is not None else "return;"
    raise TypeError(f"unknown statement {stmt!r}")


def print_ir(item: IrProgram | IrMethod) -> str:
    """Deterministic textual dump, one static class wrapper per class name."""
    methods = [item] if isinstance(item, IrMethod) else list(item)
    by_class: dict[str, list[IrMethod]] = {}
    for m in methods:
        by_class.setdefault(m.sig.className, []).append(m)
    out: list[str] = []
    for class_name in sorted(by_class) or ["HermesByteCode"]:
        out.append(f"public class {class_name} {{")
        for mi, m in enumerate(by_class.get(class_name, [])):
            if mi:
                out.append("")
            sig = m.sig
            out.append("    public static %s %s(%s) {" % (
                sig.returnType, sig.methodName, ",".join(sig.paramTypes)))
            for name, type_name in m.locals:
                out.append(f"        {type_name} {name};")
            if m.locals and m.statements:
                out.append("")
            labels = _labels_for(m)
            for i, stmt in enumerate(m.statements):
                if i in labels:
                    out.append(f"      {labels[i]}:")
                out.append(f"        {_render_stmt(stmt, labels)}")
            out.append("    }")
        out.append("}")
    return "\n".join(out) + "\n"
