"""Lift parsed Hermes disassembly into the unified IR.

Register descriptors are tracked with a single forward pass per function
(branch joins are ignored; the approximation only widens chains, never
invents them). Property-get chains become dotted type names, so a call
through r1 where r1 was fetched as globalThis.console.log renders as

    r0 = staticinvoke <Hbc.GlobalObject.console:
        Hbc.GlobalObject.console.log.JavaScript.FunctionOutput
        log(JavaScript.Object, JavaScript.Object)>(r2, r0);

Argument registers of real Hermes calls travel through a register window
the textual form does not expose, so call argument *values* are only known
when the register's descriptor is known at the call.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .hasm import (
    HbcFunction, HbcInstruction, HbcProgram, Operand, OperandKind,
    build_blocks,
)
from .ir import (
    Arg, Assign, Const, FuncRefArg, Goto, IdentityParam, If, Invoke,
    IrMethod, IrProgram, LocalRef, MethodSig, Return, make_signature,
)

IR_CLASS = "HermesByteCode"
OPCODE_CLASS = "Hbc.Opcod"
GLOBAL_TYPE = "Hbc.GlobalObject"
OUTPUT_SUFFIX = "JavaScript.FunctionOutput"

_GET_OPS = {"TryGetById", "GetById", "GetByIdShort"}
_ARITH_OPS = {"Add", "Sub", "Mul", "Div"}
_CALLN_OPS = {"Call1": 1, "Call2": 2, "Call3": 3, "Call4": 4}


# --------------------------------------------------------------------------
# register descriptors

@dataclass(frozen=True)
class Descriptor:
    """What a register is known to hold at some program point."""
    origin: str                     # GlobalObject | PropertyAccess | ConstString |
                                    # ConstNumber | CallResult | FunctionRef | Unknown
    chain: tuple[str, ...] = ()
    value: object = None

    def type_name(self) -> str:
        if self.origin == "GlobalObject":
            return GLOBAL_TYPE
        if self.origin in ("PropertyAccess", "CallResult"):
            return ".".join(self.chain)
        if self.origin == "ConstString":
            return "JavaScript.String"
        if self.origin == "ConstNumber":
            return "JavaScript.Number"
        if self.origin == "FunctionRef":
            return "JavaScript.Function"
        return "JavaScript.Object"


UNKNOWN = Descriptor("Unknown", ("JavaScript.Object",))


def _reg(op: Operand) -> str:
    return f"r{op.value}"


def track_register_types(func: HbcFunction) -> list[dict[str, Descriptor]]:
    """After-state descriptor map per instruction (linear forward pass)."""
    states: list[dict[str, Descriptor]] = []
    cur: dict[str, Descriptor] = {}
    for ins in func.instructions:
        cur = dict(cur)
        op = ins.opcode
        ops = ins.operands
        if op == "GetGlobalObject" and ops:
            cur[_reg(ops[0])] = Descriptor("GlobalObject", (GLOBAL_TYPE,))
        elif op in _GET_OPS and len(ops) >= 2:
            prop = next((o.value for o in reversed(ops)
                         if o.kind is OperandKind.STRING), None)
            base = cur.get(_reg(ops[1]))
            if prop is None:
                cur[_reg(ops[0])] = UNKNOWN
            elif base is not None and base.chain and base.origin in (
                    "GlobalObject", "PropertyAccess", "CallResult"):
                cur[_reg(ops[0])] = Descriptor(
                    "PropertyAccess", base.chain + (prop,))
            else:
                cur[_reg(ops[0])] = Descriptor(
                    "PropertyAccess", ("JavaScript.Object", prop))
        elif op == "LoadConstString" and ops:
            text = next((o.value for o in ops[1:]
                         if o.kind is OperandKind.STRING), "")
            cur[_reg(ops[0])] = Descriptor(
                "ConstString", ("JavaScript.String",), value=text)
        elif op in ("LoadConstInt", "LoadConstDouble") and ops:
            num = ops[1].value if len(ops) > 1 else None
            cur[_reg(ops[0])] = Descriptor(
                "ConstNumber", ("JavaScript.Number",), value=num)
        elif op == "LoadConstUndefined" and ops:
            cur[_reg(ops[0])] = UNKNOWN
        elif op == "Mov" and len(ops) >= 2:
            cur[_reg(ops[0])] = cur.get(_reg(ops[1]), UNKNOWN)
        elif op == "CreateClosure" and ops:
            ref = next((o for o in ops if o.kind is OperandKind.FUNC_REF), None)
            cur[_reg(ops[0])] = Descriptor(
                "FunctionRef", ("JavaScript.Function",),
                value=(ref.ref_id if ref is not None else None))
        elif op in _ARITH_OPS and ops:
            cur[_reg(ops[0])] = Descriptor("CallResult", ("JavaScript.Number",))
        elif (op in _CALLN_OPS or op == "Call") and len(ops) >= 2:
            callee = cur.get(_reg(ops[1]))
            if callee is not None and callee.chain and callee.origin in (
                    "GlobalObject", "PropertyAccess", "CallResult"):
                chain = callee.chain + (OUTPUT_SUFFIX,)
            else:
                chain = ("JavaScript.Object", OUTPUT_SUFFIX)
            cur[_reg(ops[0])] = Descriptor("CallResult", chain)
        elif op == "PutById" or op in ("Jmp", "JmpTrue", "JmpFalse",
                                       "Ret", "Throw"):
            pass
        else:
            # Generic opcode: a leading register operand is its destination,
            # except branch-shaped ops (label operand) which write nothing.
            has_label = any(o.kind is OperandKind.LABEL for o in ops)
            if ops and ops[0].kind is OperandKind.REGISTER and not has_label:
                cur[_reg(ops[0])] = UNKNOWN
        states.append(cur)
    return states


# --------------------------------------------------------------------------
# identities

@dataclass(frozen=True)
class MethodIdentity:
    functionId: int
    declaredName: str
    methodName: str
    sig: MethodSig
    isRoot: bool


def _unified_sig(name: str, param_count: int) -> MethodSig:
    params = tuple(f"JavaScript.Parameter_{i}" for i in range(param_count))
    ret = f"JavaScript.Function.HermesBytecode.{name}.{OUTPUT_SUFFIX}"
    return make_signature(IR_CLASS, name, params, ret)


def assign_method_identities(program: HbcProgram) -> dict[int, MethodIdentity]:
    """Injective method names: duplicates and anonymous functions are
    renamed with their function id; anything still colliding gets _u<k>."""
    counts = Counter(f.declaredName for f in program.functions if f.declaredName)
    has_global = any(f.declaredName == "global" for f in program.functions)
    used: set[str] = set()
    out: dict[int, MethodIdentity] = {}
    for func in program.functions:
        base = func.declaredName
        if not base:
            name = f"hermesAnonymousFunction_{func.functionId}"
        elif counts[base] > 1:
            name = f"hermesDuplicatedFunction_{base}_{func.functionId}"
        else:
            name = base
        final = name
        k = 0
        while final in used:
            k += 1
            final = f"{name}_u{k}"
        used.add(final)
        is_root = (base == "global") if has_global else (func.functionId == 0)
        out[func.functionId] = MethodIdentity(
            func.functionId, base, final,
            _unified_sig(final, func.paramCount), is_root)
    return out


# --------------------------------------------------------------------------
# lifting

@dataclass(frozen=True)
class CallSiteRecord:
    callerSig: MethodSig
    statementIndex: int
    invokeSig: MethodSig
    argCount: int
    argDescriptors: tuple[Descriptor, ...]
    calleeDescriptor: Descriptor | None
    calleeFunctionId: int | None = None


@dataclass(frozen=True)
class LiftWarning:
    code: str
    functionId: int
    instructionIndex: int
    detail: str


@dataclass
class LiftedProgram:
    ir: IrProgram
    identities: dict[int, MethodIdentity]
    call_sites: list[CallSiteRecord]
    register_maps: dict[int, list[dict[str, Descriptor]]]
    warnings: list[LiftWarning]

    def roots(self) -> list[MethodIdentity]:
        return [i for i in self.identities.values() if i.isRoot]


def _operand_arg(op: Operand) -> tuple[str, Arg]:
    if op.kind is OperandKind.REGISTER:
        return "JavaScript.Object", LocalRef(_reg(op))
    if op.kind is OperandKind.INT:
        return "JavaScript.Number", Const("int", op.value)
    if op.kind is OperandKind.DOUBLE:
        return "JavaScript.Number", Const("double", op.value)
    if op.kind is OperandKind.STRING:
        return "JavaScript.String", Const("string", op.value)
    if op.kind is OperandKind.FUNC_REF:
        return "JavaScript.Function", FuncRefArg(op.value, op.ref_id)
    raise ValueError(f"operand {op.raw!r} cannot be an argument")


def _opcode_invoke(mnemonic: str, return_type: str, ops: list[Operand],
                   target: str | None) -> Invoke:
    params, args = [], []
    for op in ops:
        p, a = _operand_arg(op)
        params.append(p)
        args.append(a)
    sig = make_signature(OPCODE_CLASS, mnemonic, tuple(params), return_type)
    return Invoke(sig, tuple(args), target=target)


def _call_parts(callee: Descriptor | None,
                identities: dict[int, MethodIdentity]) -> tuple[str, str, str, int | None]:
    """(className, methodName, returnType, calleeFunctionId) for a call."""
    if (callee is not None and callee.origin == "FunctionRef"
            and isinstance(callee.value, int) and callee.value in identities):
        ident = identities[callee.value]
        return (IR_CLASS, ident.methodName, ident.sig.returnType, ident.functionId)
    if (callee is not None and callee.origin in (
            "GlobalObject", "PropertyAccess", "CallResult")
            and len(callee.chain) >= 2):
        cls = ".".join(callee.chain[:-1])
        name = callee.chain[-1]
        return (cls, name, ".".join(callee.chain) + "." + OUTPUT_SUFFIX, None)
    return ("JavaScript.Function", "hbcCall", OUTPUT_SUFFIX, None)


def lift_function(func: HbcFunction,
                  identities: dict[int, MethodIdentity],
                  ) -> tuple[IrMethod, list[CallSiteRecord],
                             list[dict[str, Descriptor]], list[LiftWarning]]:
    ident = identities[func.functionId]
    states = track_register_types(func)
    p_count = func.paramCount

    def pre_state(i: int) -> dict[str, Descriptor]:
        return states[i - 1] if i > 0 else {}

    # Statement layout: identity prefix, then per-instruction emissions.
    def emitted(ins: HbcInstruction) -> int:
        return 2 if ins.opcode == "Throw" else 1

    stmt_start: list[int] = []
    pos = p_count
    for ins in func.instructions:
        stmt_start.append(pos)
        pos += emitted(ins)
    total = pos

    def target_stmt(instr_index: int) -> int:
        return 0 if instr_index == 0 else stmt_start[instr_index]

    graph = build_blocks(func)
    block_starts = {0} | {target_stmt(blk[0]) for blk in graph.blocks if blk}

    stmts: list = [IdentityParam(f"arg{i}", i, f"JavaScript.Parameter_{i}")
                   for i in range(p_count)]
    call_sites: list[CallSiteRecord] = []
    warnings: list[LiftWarning] = []
    scratch_cond = False

    for i, ins in enumerate(func.instructions):
        op = ins.opcode
        ops = ins.operands
        state = pre_state(i)
        after = states[i]

        if op == "Ret":
            value = LocalRef(_reg(ops[0])) if ops else None
            stmts.append(Return(value))
        elif op == "Throw":
            stmts.append(_opcode_invoke(
                "Throw", "JavaScript.Object", ops, target=None))
            stmts.append(Return(None))
        elif op == "Mov" and len(ops) >= 2:
            stmts.append(Assign(_reg(ops[0]), _reg(ops[1])))
        elif op == "Jmp":
            label = next(o for o in ops if o.kind is OperandKind.LABEL)
            stmts.append(Goto(target_stmt(func.labels[label.value])))
        elif op in ("JmpTrue", "JmpFalse"):
            label = next(o for o in ops if o.kind is OperandKind.LABEL)
            cond = next(o for o in ops if o.kind is OperandKind.REGISTER)
            stmts.append(If(_reg(cond), target_stmt(func.labels[label.value]),
                            whenTrue=(op == "JmpTrue")))
        elif op == "GetGlobalObject" and ops:
            sig = make_signature(OPCODE_CLASS, op, (), GLOBAL_TYPE)
            stmts.append(Invoke(sig, (), target=_reg(ops[0])))
        elif op in _GET_OPS and len(ops) >= 2:
            dest = _reg(ops[0])
            ret = after[dest].type_name()
            stmts.append(_opcode_invoke("hbcGet", ret, ops[1:], target=dest))
        elif op == "PutById" and len(ops) >= 2:
            stmts.append(_opcode_invoke(
                "hbcPut", "JavaScript.Object", ops, target=None))
        elif op in ("LoadConstString", "LoadConstInt", "LoadConstDouble",
                    "LoadConstUndefined") and ops:
            dest = _reg(ops[0])
            ret = {"LoadConstString": "JavaScript.String",
                   "LoadConstInt": "JavaScript.Number",
                   "LoadConstDouble": "JavaScript.Number",
                   "LoadConstUndefined": "JavaScript.Object"}[op]
            stmts.append(_opcode_invoke(op, ret, ops[1:], target=dest))
        elif op in _ARITH_OPS and ops:
            stmts.append(_opcode_invoke(
                op, "JavaScript.Number", ops[1:], target=_reg(ops[0])))
        elif op == "CreateClosure" and ops:
            stmts.append(_opcode_invoke(
                op, "JavaScript.Function", ops[1:], target=_reg(ops[0])))
        elif op in _CALLN_OPS and len(ops) >= 2:
            dest, callee_reg = _reg(ops[0]), _reg(ops[1])
            callee = state.get(callee_reg)
            cls, name, ret, callee_fid = _call_parts(callee, identities)
            arg_ops = ops[2:]
            sig = make_signature(
                cls, name, tuple("JavaScript.Object" for _ in arg_ops), ret)
            args = tuple(LocalRef(_reg(o)) for o in arg_ops)
            stmts.append(Invoke(sig, args, target=dest))
            call_sites.append(CallSiteRecord(
                ident.sig, len(stmts) - 1, sig, len(arg_ops),
                tuple(state.get(_reg(o), UNKNOWN) for o in arg_ops),
                callee, callee_fid))
        elif op == "Call" and len(ops) >= 2:
            dest, callee_reg = _reg(ops[0]), _reg(ops[1])
            callee = state.get(callee_reg)
            cls, name, ret, callee_fid = _call_parts(callee, identities)
            argc = ops[2].value if (len(ops) > 2
                                    and ops[2].kind is OperandKind.INT) else 0
            sig = make_signature(cls, name, (), ret)
            stmts.append(Invoke(sig, (), target=dest))
            call_sites.append(CallSiteRecord(
                ident.sig, len(stmts) - 1, sig, argc, (), callee, callee_fid))
        else:
            # Unknown mnemonic. Branch-shaped ones become conditional
            # branches (both arms stay live, mirroring the block builder);
            # the rest become generic opcode invokes.
            label = next((o for o in ops if o.kind is OperandKind.LABEL), None)
            if label is not None:
                cond = next((o for o in ops if o.kind is OperandKind.REGISTER),
                            None)
                tgt = target_stmt(func.labels[label.value])
                if cond is not None:
                    stmts.append(If(_reg(cond), tgt))
                else:
                    scratch_cond = True
                    stmts.append(If("rbr", tgt))
            else:
                dest = (_reg(ops[0]) if ops
                        and ops[0].kind is OperandKind.REGISTER else None)
                rest = ops[1:] if dest is not None else ops
                stmts.append(_opcode_invoke(op, "Hbc.Unknown", rest, dest))
            warnings.append(LiftWarning("GenericLift", func.functionId, i, op))

    assert len(stmts) == total

    # Locals: registers in numeric order, then the identity parameters.
    # A register's declared type comes from its first definition.
    regs = sorted({o.value for ins in func.instructions for o in ins.operands
                   if o.kind is OperandKind.REGISTER})
    first_type: dict[str, str] = {}
    for i in range(len(func.instructions)):
        before, after = pre_state(i), states[i]
        for name, desc in after.items():
            if name not in first_type and (
                    name not in before or before[name] != desc):
                first_type[name] = desc.type_name()
    locals_decl = tuple((f"r{n}", first_type.get(f"r{n}", "JavaScript.Object"))
                        for n in regs)
    if scratch_cond:
        locals_decl += (("rbr", "JavaScript.Object"),)
    locals_decl += tuple((f"arg{i}", "JavaScript.Object")
                         for i in range(p_count))

    method = IrMethod(ident.sig, locals_decl, tuple(stmts),
                      frozenset(block_starts))
    return method, call_sites, states, warnings


def lift_program(program: HbcProgram) -> LiftedProgram:
    identities = assign_method_identities(program)
    ir = IrProgram()
    call_sites: list[CallSiteRecord] = []
    register_maps: dict[int, list[dict[str, Descriptor]]] = {}
    warnings: list[LiftWarning] = []
    for func in program.functions:
        method, sites, states, warns = lift_function(func, identities)
        ir.add_method(method)
        call_sites.extend(sites)
        register_maps[func.functionId] = states
        warnings.extend(warns)
    call_sites.sort(key=lambda c: (c.callerSig.render(), c.statementIndex))
    return LiftedProgram(ir, identities, call_sites, register_maps, warnings)
