"""Frontend for textual Hermes bytecode disassembly (.hasm).

Accepts two dialects and reduces both to one canonical document shape:

* ``canonical``: the layout this package emits. Section headers are
  ``FILE HEADER:``, ``FUNCTION HEADER TABLE:``, ``STRING TABLE&STORAGE:``
  and ``Debug Information:``. Function headers look like
  ``Function<name>(1 params, 11 registers, 0 symbols):`` and carry no
  numeric id. Operands are separated by ``", "``. Labels are ``L<n>:``
  lines binding to the next instruction.
* ``hbcdump``: pretty output of the stock hbcdump tool. Adds numeric ids
  on function headers (``Function<global>0(...)``), ``Offset in debug
  table:`` lines, source location lines like ``app.js[3:7]``, its own
  section names (``Bytecode File Information:``, ``Global String Table:``,
  ``Debug * table:``), tab separated operands, and ``hbcdump> `` prompt
  residue when captured from the REPL.

hbcdump's ``-raw-disassemble`` legacy format (byte offsets plus string
table indices instead of inline literals) is not a supported dialect and
raises UnsupportedVariant.

Everything here is pure and threadsafe; parsing the same text twice gives
structurally equal programs.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field


# --------------------------------------------------------------------------
# errors

class DisassemblyError(Exception):
    """Base class for disassembly front end failures."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedHeader(DisassemblyError):
    """Missing FILE HEADER section or a garbled Function<...> header."""


class UnknownOperandShape(DisassemblyError):
    """An operand token matched none of the known operand forms."""


class DanglingLabel(DisassemblyError):
    """A jump names an undeclared label, or a label binds to no instruction."""


class UnsupportedVariant(DisassemblyError):
    """A line matched no rule of any supported dialect and no hint was given."""


class RegisterOutOfRange(DisassemblyError):
    """A register operand is >= the function's declared register count."""


# --------------------------------------------------------------------------
# data model

class OperandKind(enum.Enum):
    REGISTER = "register"
    INT = "integer"
    DOUBLE = "double"
    STRING = "string-literal"
    LABEL = "label"
    FUNC_REF = "function-ref"


@dataclass(frozen=True)
class Operand:
    kind: OperandKind
    value: object          # int register index, int, float, str, label name, or ref name
    raw: str               # exact source lexeme, re-emitted by the normalizer
    truncated: bool = False
    ref_id: int | None = None   # FUNC_REF only: numeric id when the dialect provides one


@dataclass(frozen=True)
class HbcInstruction:
    index: int
    opcode: str
    operands: tuple[Operand, ...]

    def registers(self) -> tuple[int, ...]:
        return tuple(op.value for op in self.operands if op.kind is OperandKind.REGISTER)


@dataclass(frozen=True)
class HbcFunction:
    functionId: int
    declaredName: str      # may be "" for anonymous functions
    paramCount: int
    registerCount: int
    symbolCount: int
    instructions: tuple[HbcInstruction, ...]
    labels: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class HbcProgram:
    functions: tuple[HbcFunction, ...]
    stringTable: dict[int, str]
    sourceMeta: dict[str, tuple[str, ...]]
    formatVariant: str

    def function_by_id(self, fid: int) -> HbcFunction:
        return self.functions[fid]


@dataclass(frozen=True)
class TruncationWarning:
    functionId: int
    instructionIndex: int
    literalKind: str       # "string" | "number"
    rawText: str


class BundleKind(enum.Enum):
    HERMES_BYTECODE = "HermesBytecode"
    PLAIN_JAVASCRIPT = "PlainJavaScript"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class BlockGraph:
    """Ordered basic blocks over instruction indices plus successor edges.

    blocks partition the instruction list; edges are (block, block) ordinal
    pairs covering fall-through, jump targets, and both arms of conditional
    jumps.
    """

    blocks: tuple[tuple[int, ...], ...]
    edges: frozenset[tuple[int, int]]

    def successors(self, block_index: int) -> list[int]:
        return sorted(dst for src, dst in self.edges if src == block_index)


# --------------------------------------------------------------------------
# dialect tables

HERMES_MAGIC = bytes.fromhex("c61fbc03c103191f")  # from a real hermesc bundle

CANONICAL_SECTIONS = (
    "FILE HEADER:",
    "FUNCTION HEADER TABLE:",
    "STRING TABLE&STORAGE:",
    "Debug Information:",
)

# hbcdump pretty section names, mapped onto the canonical ones
_HBCDUMP_SECTION_MAP = {
    "Bytecode File Information:": "FILE HEADER:",
    "Global String Table:": "STRING TABLE&STORAGE:",
    "Debug filename table:": "Debug Information:",
    "Debug file table:": "Debug Information:",
    "Debug source table:": "Debug Information:",
    "Debug lexical table:": "Debug Information:",
}

_FUNCTION_RE = re.compile(
    r"^Function<(?P<name>[^>]*)>(?P<fid>\d+)?"
    r"\((?P<params>\d+) params?, (?P<regs>\d+) registers?, (?P<syms>\d+) symbols?\):\s*$"
)
_LABEL_RE = re.compile(r"^\s*(?P<label>L\d+):\s*$")
_DEBUG_OFFSET_RE = re.compile(r"^\s*Offset in debug table:.*$")
_SOURCE_LOC_RE = re.compile(r"^\s*\S+\[\d+:\d+\]\s*$")
_EXC_HEADER_RE = re.compile(r"^\s*Exception Handlers:\s*$")
_EXC_ENTRY_RE = re.compile(r"^\s*\d+:\s*start\s*=.*$")
_MNEMONIC_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_PROMPT_RE = re.compile(r"^(?:hbcdump> )+")

# string table entry forms: "0: text" and hbcdump's "s0[ASCII, 2..7]: text"
_STRTAB_SIMPLE_RE = re.compile(r"^\s*(?P<idx>\d+):\s(?P<text>.*)$")
_STRTAB_HBCDUMP_RE = re.compile(
    r"^\s*[spi](?P<idx>\d+)\[[^\]]*\](?:\s+#[0-9A-Fa-f]+)?:\s(?P<text>.*)$"
)

_VERSION_HINTS = ("canonical", "hbcdump")


# --------------------------------------------------------------------------
# operand lexing

def _lex_operands(text: str, line_no: int) -> list[Operand]:
    """Lex one instruction's operand field.

    Operands are separated by a comma or a tab (the tab form is the hbcdump
    variant); spaces alone never separate operands because string literals
    contain them.
    """
    ops: list[Operand] = []
    i, n = 0, len(text)
    while i < n and text[i] in " \t":
        i += 1
    expect_operand = i < n
    while i < n:
        start = i
        ch = text[i]
        if ch == '"':
            i += 1
            body = []
            while i < n and text[i] != '"':
                if text[i] == "\\" and i + 1 < n:
                    body.append(text[i:i + 2])
                    i += 2
                else:
                    body.append(text[i])
                    i += 1
            if i >= n:
                raise UnknownOperandShape("unterminated string literal", line_no)
            i += 1  # closing quote
            truncated = text.startswith("...", i)
            if truncated:
                i += 3
            raw = text[start:i]
            value = _unescape("".join(body))
            ops.append(Operand(OperandKind.STRING, value, raw, truncated))
        elif text.startswith("Function<", i):
            end = text.find(">", i)
            if end < 0:
                raise UnknownOperandShape("unterminated function reference", line_no)
            name = text[i + len("Function<"):end]
            i = end + 1
            id_start = i
            while i < n and text[i].isdigit():
                i += 1
            ref_id = int(text[id_start:i]) if i > id_start else None
            raw = text[start:i]
            ops.append(Operand(OperandKind.FUNC_REF, name, raw, ref_id=ref_id))
        elif ch == "L" and i + 1 < n and text[i + 1].isdigit():
            i += 1
            while i < n and text[i].isdigit():
                i += 1
            raw = text[start:i]
            ops.append(Operand(OperandKind.LABEL, raw, raw))
        elif ch == "r" and i + 1 < n and text[i + 1].isdigit():
            i += 1
            while i < n and text[i].isdigit():
                i += 1
            raw = text[start:i]
            ops.append(Operand(OperandKind.REGISTER, int(raw[1:]), raw))
        elif ch.isdigit() or (ch == "-" and i + 1 < n and text[i + 1].isdigit()):
            i += 1
            is_double = False
            while i < n and (text[i].isdigit() or text[i] in ".eE+-"):
                if text[i] == "." and text.startswith("...", i):
                    break  # truncation marker, not a decimal point
                if text[i] in "+-" and text[i - 1] not in "eE":
                    break
                if text[i] in ".eE":
                    is_double = True
                i += 1
            truncated = text.startswith("...", i)
            num_raw = text[start:i]
            if truncated:
                i += 3
            raw = text[start:i]
            try:
                value: object = float(num_raw) if is_double else int(num_raw)
            except ValueError:
                raise UnknownOperandShape(f"bad numeric operand {num_raw!r}", line_no)
            kind = OperandKind.DOUBLE if is_double else OperandKind.INT
            ops.append(Operand(kind, value, raw, truncated))
        else:
            raise UnknownOperandShape(f"unrecognized operand at {text[i:i+20]!r}", line_no)

        # separator: optional spaces, then comma or tab, then optional spaces
        while i < n and text[i] == " ":
            i += 1
        if i >= n:
            expect_operand = False
            break
        if text[i] in ",\t":
            while i < n and text[i] in ",\t":
                i += 1
            while i < n and text[i] == " ":
                i += 1
            expect_operand = True
        else:
            raise UnknownOperandShape(
                f"expected operand separator at {text[i:i+20]!r}", line_no)
    if expect_operand:
        raise UnknownOperandShape("trailing operand separator", line_no)
    return ops


def _unescape(body: str) -> str:
    out = []
    i = 0
    while i < len(body):
        if body[i] == "\\" and i + 1 < len(body):
            esc = body[i + 1]
            out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


def escape_string(value: str) -> str:
    """Inverse of the operand string lexer, used by emitters."""
    return (value.replace("\\", "\\\\").replace('"', '\\"')
            .replace("\n", "\\n").replace("\t", "\\t"))


# --------------------------------------------------------------------------
# line classification

@dataclass
class _Line:
    kind: str    # section | function | label | instruction | debug | meta | blank
    text: str
    line_no: int
    payload: object = None


def _classify(text: str, version_hint: str | None) -> tuple[list[_Line], str]:
    if version_hint is not None and version_hint not in _VERSION_HINTS:
        raise UnsupportedVariant(f"unknown version hint {version_hint!r}")
    lines: list[_Line] = []
    variant = "canonical"
    in_function = False
    in_section = False
    for line_no, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.rstrip("\r\n")
        stripped_prompt = _PROMPT_RE.sub("", line)
        if stripped_prompt != line:
            variant = "hbcdump"
            line = stripped_prompt
        if not line.strip():
            lines.append(_Line("blank", "", line_no))
            continue
        bare = line.strip()
        if bare in CANONICAL_SECTIONS:
            in_function = False
            in_section = True
            lines.append(_Line("section", bare, line_no, payload=bare))
            continue
        if bare in _HBCDUMP_SECTION_MAP:
            variant = "hbcdump"
            in_function = False
            in_section = True
            lines.append(_Line("section", bare, line_no,
                               payload=_HBCDUMP_SECTION_MAP[bare]))
            continue
        if bare.startswith("Function<"):
            m = _FUNCTION_RE.match(bare)
            if not m:
                raise MalformedHeader(f"garbled function header {bare!r}", line_no)
            if m.group("fid") is not None:
                variant = "hbcdump"
            in_function = True
            in_section = False
            lines.append(_Line("function", bare, line_no, payload=m))
            continue
        if in_function:
            if _DEBUG_OFFSET_RE.match(line):
                variant = "hbcdump"
                lines.append(_Line("debug", line, line_no))
                continue
            m = _LABEL_RE.match(line)
            if m:
                lines.append(_Line("label", line, line_no, payload=m.group("label")))
                continue
            if (_SOURCE_LOC_RE.match(line) or _EXC_HEADER_RE.match(line)
                    or _EXC_ENTRY_RE.match(line)):
                variant = "hbcdump"
                lines.append(_Line("meta", line, line_no))
                continue
            if line[:1] in (" ", "\t"):
                parts = line.strip().split(None, 1)
                if parts and _MNEMONIC_RE.match(parts[0]):
                    if "\t" in (parts[1] if len(parts) > 1 else ""):
                        variant = "hbcdump"
                    lines.append(_Line("instruction", line, line_no, payload=parts))
                    continue
            if version_hint is not None:
                lines.append(_Line("meta", line, line_no))
                continue
            raise UnsupportedVariant(
                f"unclassifiable line in function body: {bare!r}", line_no)
        # outside any function: section content is free-form
        if in_section or line[:1] in (" ", "\t") or version_hint is not None:
            lines.append(_Line("meta", line, line_no))
            continue
        raise UnsupportedVariant(f"unclassifiable line: {bare!r}", line_no)
    if version_hint is not None:
        variant = version_hint
    return lines, variant


# --------------------------------------------------------------------------
# public operations

def normalize_variant(text: str, version_hint: str | None = None) -> str:
    """Rewrite a supported dialect into the canonical document shape.

    Canonical output: canonical section names with content kept verbatim,
    id-free function headers, no debug offset or source location lines,
    4-space instruction indent with ``", "`` separated operands, labels at
    column zero. Idempotent: normalizing canonical text returns it
    unchanged.
    """
    lines, _variant = _classify(text, version_hint)
    out: list[str] = []

    def emit_gap():
        if out and out[-1] != "":
            out.append("")

    current_section = None
    for ln in lines:
        if ln.kind == "blank":
            continue
        if ln.kind == "section":
            canonical_name = ln.payload
            if canonical_name != current_section:
                emit_gap()
                out.append(canonical_name)
                current_section = canonical_name
            continue
        if ln.kind == "function":
            m = ln.payload
            emit_gap()
            out.append("Function<%s>(%s params, %s registers, %s symbols):"
                       % (m.group("name"), m.group("params"),
                          m.group("regs"), m.group("syms")))
            current_section = None
            continue
        if ln.kind == "label":
            out.append(f"{ln.payload}:")
            continue
        if ln.kind == "instruction":
            mnemonic, rest = ln.payload[0], (ln.payload[1] if len(ln.payload) > 1 else "")
            ops = _lex_operands(rest, ln.line_no)
            if ops:
                out.append("    %s %s" % (mnemonic, ", ".join(op.raw for op in ops)))
            else:
                out.append(f"    {mnemonic}")
            continue
        if ln.kind == "debug":
            continue  # canonical form carries no debug offsets
        if ln.kind == "meta":
            if current_section is not None:
                out.append(ln.text)
            continue
    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n" if out else ""


def parse_disassembly(text: str, version_hint: str | None = None) -> HbcProgram:
    """Parse a disassembly document into an HbcProgram.

    Function ids are assigned densely in textual order. Labels bind to the
    next instruction. The FILE HEADER section must be present.
    """
    lines, variant = _classify(text, version_hint)

    sections: dict[str, list[str]] = {}
    functions: list[HbcFunction] = []
    string_table: dict[int, str] = {}

    current_section: str | None = None
    cur: dict | None = None  # in-progress function

    def finish_function():
        nonlocal cur
        if cur is None:
            return
        pending = cur["pending_labels"]
        if pending:
            raise DanglingLabel(
                f"label {pending[0][0]} declared after the last instruction",
                pending[0][1])
        instrs = tuple(cur["instructions"])
        for ins, line_no in zip(instrs, cur["instruction_lines"]):
            for op in ins.operands:
                if op.kind is OperandKind.REGISTER and op.value >= cur["regs"]:
                    raise RegisterOutOfRange(
                        f"{op.raw} out of range for {cur['regs']} registers", line_no)
                if op.kind is OperandKind.LABEL and op.value not in cur["labels"]:
                    raise DanglingLabel(f"jump to undeclared label {op.value}", line_no)
        functions.append(HbcFunction(
            functionId=len(functions),
            declaredName=cur["name"],
            paramCount=cur["params"],
            registerCount=cur["regs"],
            symbolCount=cur["syms"],
            instructions=instrs,
            labels=dict(cur["labels"]),
        ))
        cur = None

    for ln in lines:
        if ln.kind == "blank":
            continue
        if ln.kind == "section":
            finish_function()
            current_section = ln.payload
            sections.setdefault(current_section, [])
            continue
        if ln.kind == "function":
            finish_function()
            current_section = None
            m = ln.payload
            cur = {
                "name": m.group("name"),
                "params": int(m.group("params")),
                "regs": int(m.group("regs")),
                "syms": int(m.group("syms")),
                "instructions": [],
                "instruction_lines": [],
                "labels": {},
                "pending_labels": [],
            }
            continue
        if ln.kind == "label":
            if cur is None:
                raise UnsupportedVariant("label outside a function", ln.line_no)
            name = ln.payload
            if name in cur["labels"] or any(n == name for n, _ in cur["pending_labels"]):
                raise DanglingLabel(f"label {name} declared twice", ln.line_no)
            cur["pending_labels"].append((name, ln.line_no))
            continue
        if ln.kind == "instruction":
            if cur is None:
                raise UnsupportedVariant("instruction outside a function", ln.line_no)
            mnemonic = ln.payload[0]
            rest = ln.payload[1] if len(ln.payload) > 1 else ""
            ops = tuple(_lex_operands(rest, ln.line_no))
            idx = len(cur["instructions"])
            for name, _ in cur["pending_labels"]:
                cur["labels"][name] = idx
            cur["pending_labels"] = []
            cur["instructions"].append(HbcInstruction(idx, mnemonic, ops))
            cur["instruction_lines"].append(ln.line_no)
            continue
        if ln.kind in ("debug", "meta"):
            if current_section is not None and ln.kind == "meta":
                sections[current_section].append(ln.text)
            continue
    finish_function()

    if "FILE HEADER:" not in sections:
        raise MalformedHeader("document has no FILE HEADER section")

    for content_line in sections.get("STRING TABLE&STORAGE:", []):
        m = _STRTAB_HBCDUMP_RE.match(content_line) or _STRTAB_SIMPLE_RE.match(content_line)
        if m:
            string_table[int(m.group("idx"))] = m.group("text")

    return HbcProgram(
        functions=tuple(functions),
        stringTable=string_table,
        sourceMeta={k: tuple(v) for k, v in sections.items()},
        formatVariant=variant,
    )


TRUNCATION_MIN_CHARS = 16  # real hbcdump keeps a 17 char prefix; the marker decides


def detect_truncated_literals(program: HbcProgram) -> list[TruncationWarning]:
    """Report literals that carry the `...` truncation marker.

    A string warns when its rendered body has >= TRUNCATION_MIN_CHARS
    characters; a number warns when it has >= TRUNCATION_MIN_CHARS digits.
    Short marked literals are kept as parsed but not reported.
    """
    warnings: list[TruncationWarning] = []
    for func in program.functions:
        for ins in func.instructions:
            for op in ins.operands:
                if not op.truncated:
                    continue
                if op.kind is OperandKind.STRING and len(op.value) >= TRUNCATION_MIN_CHARS:
                    warnings.append(TruncationWarning(
                        func.functionId, ins.index, "string", op.raw))
                elif op.kind in (OperandKind.INT, OperandKind.DOUBLE):
                    digits = sum(c.isdigit() for c in op.raw)
                    if digits >= TRUNCATION_MIN_CHARS:
                        warnings.append(TruncationWarning(
                            func.functionId, ins.index, "number", op.raw))
    return warnings


_UNCONDITIONAL = {"Jmp"}
_CONDITIONAL = {"JmpTrue", "JmpFalse"}
_STOPS = {"Ret", "Throw"}


def _jump_target(ins: HbcInstruction) -> str | None:
    for op in ins.operands:
        if op.kind is OperandKind.LABEL:
            return op.value
    return None


def build_blocks(func: HbcFunction) -> BlockGraph:
    """Partition a function's instructions into basic blocks.

    Leaders: instruction 0, every label target, and every instruction
    following a jump, Ret, or Throw. A non-table mnemonic that references
    a label is treated as a conditional branch (both arms), which keeps
    CFGs honest for real dumps using compare-and-jump opcodes.
    """
    instrs = func.instructions
    if not instrs:
        return BlockGraph(blocks=(), edges=frozenset())

    leaders = {0}
    for target in func.labels.values():
        leaders.add(target)
    for ins in instrs:
        is_jumpish = (ins.opcode in _UNCONDITIONAL or ins.opcode in _CONDITIONAL
                      or ins.opcode in _STOPS or _jump_target(ins) is not None)
        if is_jumpish and ins.index + 1 < len(instrs):
            leaders.add(ins.index + 1)

    starts = sorted(leaders)
    blocks = []
    for i, start in enumerate(starts):
        end = starts[i + 1] if i + 1 < len(starts) else len(instrs)
        blocks.append(tuple(range(start, end)))

    block_of = {}
    for bi, block in enumerate(blocks):
        for idx in block:
            block_of[idx] = bi

    edges = set()
    for bi, block in enumerate(blocks):
        last = instrs[block[-1]]
        target = _jump_target(last)
        if last.opcode in _STOPS:
            continue
        if last.opcode in _UNCONDITIONAL and target is not None:
            edges.add((bi, block_of[func.labels[target]]))
            continue
        if target is not None:  # conditional jump, table or unknown mnemonic
            edges.add((bi, block_of[func.labels[target]]))
        if bi + 1 < len(blocks):
            edges.add((bi, bi + 1))
    return BlockGraph(blocks=tuple(blocks), edges=frozenset(edges))


_JS_TOKENS = (
    "var ", "var\t", "let ", "const ", "function", "import", "export",
    "!function", "(function", "(()", "(async", "'use strict'", '"use strict"',
    "__d(", "//", "/*", "{", ";", "(",
)


def detect_bundle_kind(data: bytes) -> BundleKind:
    """Classify raw bundle bytes.

    Hermes bytecode is recognized by its 8-byte magic (taken from a real
    hermesc-compiled bundle). Text that decodes as UTF-8 and opens with a
    JavaScript-plausible token counts as a plain bundle. Everything else,
    including NUL-padded or undecodable data, is Unknown.
    """
    if data[:8] == HERMES_MAGIC:
        return BundleKind.HERMES_BYTECODE
    prefix = data[:4096]
    if b"\x00" in prefix:
        return BundleKind.UNKNOWN
    try:
        text = prefix.decode("utf-8")
    except UnicodeDecodeError:
        return BundleKind.UNKNOWN
    head = text.lstrip()
    if head.startswith("#!"):
        head = head.split("\n", 1)[1].lstrip() if "\n" in head else ""
    if any(head.startswith(tok) for tok in _JS_TOKENS):
        return BundleKind.PLAIN_JAVASCRIPT
    return BundleKind.UNKNOWN
