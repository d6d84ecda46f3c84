"""Lifting disassembly to IR: identities, descriptors, statement shapes."""

import pytest

from hbclift.hasm import build_blocks, parse_disassembly
from hbclift.ir import (
    Goto, IdentityParam, If, Invoke, Return, print_ir, statement_blocks,
    validate_body,
)
from hbclift.lifter import (
    Descriptor, assign_method_identities, lift_function, lift_program,
    track_register_types,
)

HEADER = """FILE HEADER:
  Bytecode version number: 89

FUNCTION HEADER TABLE:

"""

FOOTER = """
Debug Information:

"""


def wrap(body: str, name: str = "f", params: int = 0, regs: int = 16) -> str:
    lines = "\n".join("    " + ln for ln in body.strip().splitlines())
    return (HEADER
            + f"Function<{name}>({params} params, {regs} registers, 0 symbols):\n"
            + lines + "\n" + FOOTER)


def lift_one(body: str, **kw):
    prog = parse_disassembly(wrap(body, **kw))
    lifted = lift_program(prog)
    return lifted, next(iter(lifted.ir))


# --------------------------------------------------------------------------
# golden walkthrough

EXPECTED_INVOKES = [
    'r0 = staticinvoke <Hbc.Opcod: Hbc.GlobalObject GetGlobalObject()>();',
    'r2 = staticinvoke <Hbc.Opcod: Hbc.GlobalObject.console '
    'hbcGet(JavaScript.Object,JavaScript.Number,JavaScript.String)>'
    '(r0, 1, "console");',
    'r1 = staticinvoke <Hbc.Opcod: Hbc.GlobalObject.console.log '
    'hbcGet(JavaScript.Object,JavaScript.Number,JavaScript.String)>'
    '(r2, 2, "log");',
    'r0 = staticinvoke <Hbc.Opcod: JavaScript.String '
    'LoadConstString(JavaScript.String)>("the String value ");',
    'r0 = staticinvoke <Hbc.GlobalObject.console: '
    'Hbc.GlobalObject.console.log.JavaScript.FunctionOutput '
    'log(JavaScript.Object,JavaScript.Object)>(r2, r0);',
]


def test_golden_lift_statements(golden_text):
    lifted = lift_program(parse_disassembly(golden_text))
    method = next(iter(lifted.ir))
    assert len(method.statements) == 7
    assert isinstance(method.statements[0], IdentityParam)
    assert isinstance(method.statements[-1], Return)
    text = print_ir(method)
    for line in EXPECTED_INVOKES:
        assert line in text, f"missing: {line}"
    assert "return r0;" in text
    assert "arg0 := @parameter0: JavaScript.Parameter_0;" in text


def test_golden_signature_and_locals(golden_text):
    lifted = lift_program(parse_disassembly(golden_text))
    method = next(iter(lifted.ir))
    assert method.sig.render() == (
        "<HermesByteCode: "
        "JavaScript.Function.HermesBytecode.global.JavaScript.FunctionOutput "
        "global(JavaScript.Parameter_0)>")
    assert method.locals == (
        ("r0", "Hbc.GlobalObject"),
        ("r1", "Hbc.GlobalObject.console.log"),
        ("r2", "Hbc.GlobalObject.console"),
        ("arg0", "JavaScript.Object"),
    )


def test_golden_validates_and_is_root(golden_text):
    lifted = lift_program(parse_disassembly(golden_text))
    method = next(iter(lifted.ir))
    assert validate_body(method).ok
    assert [i.methodName for i in lifted.roots()] == ["global"]


def test_golden_call_site_record(golden_text):
    lifted = lift_program(parse_disassembly(golden_text))
    (site,) = lifted.call_sites
    assert site.statementIndex == 5
    assert site.argCount == 2
    assert site.calleeDescriptor.origin == "PropertyAccess"
    assert site.calleeDescriptor.chain == (
        "Hbc.GlobalObject", "console", "log")
    assert [d.origin for d in site.argDescriptors] == [
        "PropertyAccess", "ConstString"]
    assert site.argDescriptors[1].value == "the String value "


# --------------------------------------------------------------------------
# identities

def two_headers(*headers):
    body = HEADER
    for h in headers:
        body += h + "\n        Ret r0\n\n"
    return body + FOOTER.strip() + "\n"


def test_duplicate_names_both_renamed():
    text = two_headers(
        "Function<global>(1 params, 4 registers, 0 symbols):",
        "Function<tick>(1 params, 4 registers, 0 symbols):",
        "Function<tick>(2 params, 4 registers, 0 symbols):")
    ids = assign_method_identities(parse_disassembly(text))
    assert ids[0].methodName == "global"
    assert ids[1].methodName == "hermesDuplicatedFunction_tick_1"
    assert ids[2].methodName == "hermesDuplicatedFunction_tick_2"


def test_anonymous_function_named_by_id():
    text = two_headers(
        "Function<global>(1 params, 4 registers, 0 symbols):",
        "Function<>(1 params, 4 registers, 0 symbols):")
    ids = assign_method_identities(parse_disassembly(text))
    assert ids[1].methodName == "hermesAnonymousFunction_1"
    assert ids[1].declaredName == ""


def test_pathological_collision_gets_unique_suffix():
    # A source-level name that collides with the anonymous scheme.
    text = two_headers(
        "Function<hermesAnonymousFunction_1>(1 params, 4 registers, 0 symbols):",
        "Function<>(1 params, 4 registers, 0 symbols):")
    ids = assign_method_identities(parse_disassembly(text))
    names = {i.methodName for i in ids.values()}
    assert len(names) == 2
    assert "hermesAnonymousFunction_1_u1" in names


def test_root_fallback_is_function_zero():
    text = two_headers(
        "Function<main>(1 params, 4 registers, 0 symbols):",
        "Function<other>(1 params, 4 registers, 0 symbols):")
    ids = assign_method_identities(parse_disassembly(text))
    assert [i.functionId for i in ids.values() if i.isRoot] == [0]


# --------------------------------------------------------------------------
# descriptor tracking

def track_last(body: str):
    prog = parse_disassembly(wrap(body))
    return track_register_types(prog.functions[0])[-1]


def test_property_chain_builds_through_gets():
    state = track_last("""
GetGlobalObject r0
GetById r1, r0, 1, "NativeModules"
GetById r2, r1, 2, "CalendarModule"
GetByIdShort r3, r2, 3, "createEvent"
Ret r3
""")
    assert state["r3"].chain == (
        "Hbc.GlobalObject", "NativeModules", "CalendarModule", "createEvent")
    assert state["r3"].type_name().endswith("createEvent")


def test_property_get_on_unknown_base():
    state = track_last("""
GetById r1, r9, 1, "foo"
Ret r1
""")
    assert state["r1"] == Descriptor("PropertyAccess", ("JavaScript.Object", "foo"))


def test_mov_copies_descriptor():
    state = track_last("""
GetGlobalObject r0
Mov r4, r0
Ret r4
""")
    assert state["r4"].origin == "GlobalObject"


def test_call_result_extends_chain():
    state = track_last("""
GetGlobalObject r0
GetById r1, r0, 1, "fetch"
Call1 r2, r1, r0
Ret r2
""")
    assert state["r2"] == Descriptor(
        "CallResult",
        ("Hbc.GlobalObject", "fetch", "JavaScript.FunctionOutput"))


def test_const_descriptors_carry_values():
    state = track_last("""
LoadConstString r0, "calendarModule"
LoadConstInt r1, 42
LoadConstUndefined r2
Ret r0
""")
    assert state["r0"].value == "calendarModule"
    assert state["r1"] == Descriptor("ConstNumber", ("JavaScript.Number",), 42)
    assert state["r2"].origin == "Unknown"


def test_closure_descriptor_holds_function_id():
    text = two_headers(
        "Function<global>(1 params, 4 registers, 0 symbols):",
        "Function<cb>(1 params, 4 registers, 0 symbols):")
    text = text.replace("        Ret r0\n\n" + "Function<cb>",
                        "        CreateClosure r1, r0, Function<cb>1\n"
                        "        Ret r1\n\nFunction<cb>", 1)
    prog = parse_disassembly(text)
    state = track_register_types(prog.functions[0])[-1]
    assert state["r1"].origin == "FunctionRef"
    assert state["r1"].value == 1


# --------------------------------------------------------------------------
# statement shapes

def test_throw_emits_invoke_then_return():
    _, m = lift_one("""
LoadConstString r0, "boom"
Throw r0
""")
    assert len(m.statements) == 3
    assert isinstance(m.statements[1], Invoke)
    assert m.statements[1].sig.methodName == "Throw"
    assert m.statements[2] == Return(None)
    assert validate_body(m).ok


def test_call_immediate_argc_has_no_args():
    lifted, m = lift_one("""
GetGlobalObject r0
GetById r1, r0, 1, "initialize"
Call r2, r1, 7
Ret r2
""")
    (site,) = lifted.call_sites
    assert site.argCount == 7
    assert site.argDescriptors == ()
    inv = m.statements[2]
    assert inv.args == () and inv.sig.paramTypes == ()
    assert inv.sig.methodName == "initialize"
    assert validate_body(m).ok


def test_call_through_unknown_callee():
    lifted, m = lift_one("""
Call1 r2, r9, r0
Ret r2
""")
    inv = m.statements[0]
    assert inv.sig.render() == (
        "<JavaScript.Function: JavaScript.FunctionOutput "
        "hbcCall(JavaScript.Object)>")
    assert lifted.call_sites[0].calleeDescriptor is None


def test_closure_call_targets_lifted_method():
    text = (HEADER
            + "Function<global>(1 params, 8 registers, 0 symbols):\n"
            + "    LoadConstUndefined r0\n"
            + "    CreateClosure r1, r0, Function<helper>1\n"
            + "    Call1 r2, r1, r0\n"
            + "    Ret r2\n\n"
            + "Function<helper>(1 params, 2 registers, 0 symbols):\n"
            + "    Ret r0\n"
            + FOOTER)
    lifted = lift_program(parse_disassembly(text))
    (site,) = lifted.call_sites
    assert site.calleeFunctionId == 1
    assert site.invokeSig.className == "HermesByteCode"
    assert site.invokeSig.methodName == "helper"
    method = lifted.ir.methods[lifted.identities[0].sig]
    assert ("staticinvoke <HermesByteCode: JavaScript.Function."
            "HermesBytecode.helper.JavaScript.FunctionOutput "
            "helper(JavaScript.Object)>(r0);") in print_ir(method)


def test_unknown_opcode_lifts_generically_with_warning():
    lifted, m = lift_one("""
NewObject r0
Ret r0
""")
    inv = m.statements[0]
    assert inv.sig.render() == "<Hbc.Opcod: Hbc.Unknown NewObject()>"
    assert inv.target == "r0"
    assert [w.code for w in lifted.warnings] == ["GenericLift"]
    assert validate_body(m).ok


def test_unknown_branch_opcode_lifts_to_if():
    lifted, m = lift_one("""
LoadConstInt r1, 1
JLess L1, r1, r2
LoadConstInt r0, 2
L1:
Ret r0
""")
    branch = m.statements[1]
    assert isinstance(branch, If) and branch.cond == "r1"
    assert branch.target == 3
    assert validate_body(m).ok


def test_label_only_unknown_branch_uses_scratch_cond():
    _, m = lift_one("""
SaveGenerator L1
LoadConstInt r0, 1
L1:
Ret r0
""")
    branch = m.statements[0]
    assert isinstance(branch, If) and branch.cond == "rbr"
    assert ("rbr", "JavaScript.Object") in m.locals
    assert validate_body(m).ok


def test_put_by_id_emits_bare_invoke():
    _, m = lift_one("""
GetGlobalObject r0
LoadConstString r1, "x"
PutById r0, r1, 1, "prop"
Ret r1
""")
    put = m.statements[2]
    assert isinstance(put, Invoke) and put.target is None
    assert put.sig.methodName == "hbcPut"
    assert validate_body(m).ok


def test_arithmetic_lifts_to_number_invoke():
    _, m = lift_one("""
LoadConstInt r0, 2
LoadConstInt r1, 3
Add r2, r0, r1
Ret r2
""")
    add = m.statements[2]
    assert add.sig.render() == ("<Hbc.Opcod: JavaScript.Number "
                                "Add(JavaScript.Object,JavaScript.Object)>")
    assert ("r2", "JavaScript.Number") in m.locals


def test_return_of_unwritten_register_validates():
    _, m = lift_one("Ret r0")
    assert m.statements == (Return(value=m.statements[0].value),)
    assert ("r0", "JavaScript.Object") in m.locals
    assert validate_body(m).ok


# --------------------------------------------------------------------------
# control flow fidelity

def assert_isomorphic(func, method):
    g = build_blocks(func)
    blocks, edges = statement_blocks(method)
    assert len(blocks) == len(g.blocks)
    assert edges == g.edges


@pytest.mark.parametrize("body", [
    """
LoadConstInt r0, 1
JmpTrue L1, r0
LoadConstInt r1, 2
L1:
Ret r0
""",
    """
L0:
LoadConstInt r0, 1
JmpFalse L2, r0
Jmp L0
L2:
Ret r0
""",
    """
LoadConstInt r0, 5
L1:
Sub r0, r0, r0
JmpTrue L1, r0
Ret r0
""",
    """
GetGlobalObject r0
Ret r0
LoadConstInt r1, 9
Ret r1
""",
])
def test_block_graph_isomorphic_to_disassembly(body):
    prog = parse_disassembly(wrap(body, params=2))
    lifted = lift_program(prog)
    assert_isomorphic(prog.functions[0], next(iter(lifted.ir)))


def test_branch_targets_are_block_starts():
    _, m = lift_one("""
LoadConstInt r0, 1
JmpTrue L1, r0
LoadConstInt r1, 2
L1:
Ret r0
""", params=3)
    assert validate_body(m).ok
    for s in m.statements:
        if isinstance(s, (If, Goto)):
            assert s.target in m.blockStarts


def test_lift_is_deterministic(golden_text):
    a = lift_program(parse_disassembly(golden_text))
    b = lift_program(parse_disassembly(golden_text))
    assert print_ir(a.ir) == print_ir(b.ir)
    assert a.call_sites == b.call_sites


def test_call_sites_sorted_by_caller_then_index():
    text = (HEADER
            + "Function<zeta>(1 params, 8 registers, 0 symbols):\n"
            + "    GetGlobalObject r0\n"
            + "    GetById r1, r0, 1, \"alert\"\n"
            + "    Call1 r2, r1, r0\n"
            + "    Call1 r3, r1, r0\n"
            + "    Ret r3\n\n"
            + "Function<alpha>(1 params, 8 registers, 0 symbols):\n"
            + "    GetGlobalObject r0\n"
            + "    GetById r1, r0, 1, \"alert\"\n"
            + "    Call1 r2, r1, r0\n"
            + "    Ret r2\n"
            + FOOTER)
    lifted = lift_program(parse_disassembly(text))
    keys = [(c.callerSig.render(), c.statementIndex) for c in lifted.call_sites]
    assert keys == sorted(keys)
    assert len(keys) == 3
