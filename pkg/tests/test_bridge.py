"""Bridge linking: registry-object access, turbo-registry access, builtins."""

import pytest

from hbclift.bridge import (
    DEFAULT_BUILTINS, load_builtin_catalog, match_invocations,
    recover_builtins, unlinked_bridge_calls,
)
from hbclift.hasm import parse_disassembly
from hbclift.javamodel import extract_bindings, load_class_model
from hbclift.lifter import lift_program

from conftest import MODEL_DIR
from hasmtext import wrap

NATIVE_MODULES_BODY = """
GetGlobalObject r0
TryGetById r1, r0, 1, "NativeModules"
GetById r2, r1, 2, "Calendar"
GetByIdShort r3, r2, 3, "createCalendarEvent"
LoadConstInt r4, 7
LoadConstInt r5, 30
LoadConstString r6, "Birthday"
Call4 r7, r3, r2, r4, r5, r6
Ret r7
"""

TURBO_REGISTRY_BODY = """
GetGlobalObject r0
GetById r1, r0, 1, "TurboModuleRegistry"
GetById r2, r1, 2, "getEnforcing"
LoadConstString r3, "Calendar"
Call2 r4, r2, r1, r3
GetById r5, r4, 3, "createCalendarEvent"
LoadConstInt r6, 8
LoadConstInt r7, 15
LoadConstString r8, "Picnic"
Call4 r9, r5, r4, r6, r7, r8
Ret r9
"""


@pytest.fixture(scope="module")
def calendar_bindings():
    return extract_bindings(load_class_model(MODEL_DIR / "calendar_module.json"))


def sites_of(body: str, params: int = 1):
    return lift_program(parse_disassembly(wrap(body, name="global",
                                               params=params))).call_sites


# --------------------------------------------------------------------------
# registry-object pattern

def test_native_modules_access_matches(calendar_bindings):
    (match,) = match_invocations(sites_of(NATIVE_MODULES_BODY),
                                 calendar_bindings)
    assert match.jsMethodName == "createCalendarEvent"
    assert match.binding.exposedName == "Calendar"
    assert match.javaSig.render() == (
        "<com.app.modules.CalendarModule: void createCalendarEvent("
        "int,int,java.lang.String)>")
    assert match.confidence == "Exact"


def test_exposed_name_without_registry_prefix_matches(calendar_bindings):
    # Aliased module object: const cal = NativeModules.Calendar elsewhere;
    # here the chain only shows <alias>.createCalendarEvent.
    body = """
GetById r2, r9, 2, "Calendar"
GetById r3, r2, 3, "createCalendarEvent"
LoadConstInt r4, 1
LoadConstInt r5, 2
LoadConstString r6, "X"
Call4 r7, r3, r2, r4, r5, r6
Ret r7
"""
    (match,) = match_invocations(sites_of(body), calendar_bindings)
    assert match.jsMethodName == "createCalendarEvent"


def test_unrelated_calls_do_not_match(calendar_bindings):
    body = """
GetGlobalObject r0
GetById r1, r0, 1, "console"
GetById r2, r1, 2, "log"
Call1 r3, r2, r1
Ret r3
"""
    assert match_invocations(sites_of(body), calendar_bindings) == []


def test_arity_mismatch_downgrades_confidence(calendar_bindings):
    body = """
GetGlobalObject r0
GetById r1, r0, 1, "NativeModules"
GetById r2, r1, 2, "Calendar"
GetById r3, r2, 3, "createCalendarEvent"
Call1 r6, r3, r2
Ret r6
"""
    (match,) = match_invocations(sites_of(body), calendar_bindings)
    assert match.confidence == "NameOnly"


def test_promise_parameter_tolerated():
    model = load_class_model({"schemaVersion": 1, "classes": [
        {"name": "ReactContextBaseJavaModule", "abstract": True},
        {"name": "Io", "super": "ReactContextBaseJavaModule",
         "methods": [
             {"name": "getName", "return": "java.lang.String",
              "constantReturn": "Io"},
             {"name": "read", "params": ["java.lang.String",
                                         "com.facebook.react.bridge.Promise"],
              "return": "void", "annotations": [{"name": "ReactMethod"}]}]},
    ]})
    body = """
GetGlobalObject r0
GetById r1, r0, 1, "NativeModules"
GetById r2, r1, 2, "Io"
GetById r3, r2, 3, "read"
LoadConstString r4, "path"
Call2 r6, r3, r2, r4
Ret r6
"""
    # JS passes one argument; the Java method's trailing Promise is filled
    # in by the framework.
    (match,) = match_invocations(sites_of(body), extract_bindings(model))
    assert match.confidence == "Exact"


# --------------------------------------------------------------------------
# turbo-registry pattern

def test_turbo_registry_access_matches(calendar_bindings):
    (match,) = match_invocations(sites_of(TURBO_REGISTRY_BODY),
                                 calendar_bindings)
    assert match.jsMethodName == "createCalendarEvent"
    assert match.binding.specClass == "com.app.modules.CalendarModuleSpec"
    assert match.confidence == "Exact"


def test_turbo_registry_plain_get_matches(calendar_bindings):
    body = TURBO_REGISTRY_BODY.replace("getEnforcing", "get")
    (match,) = match_invocations(sites_of(body), calendar_bindings)
    assert match.jsMethodName == "createCalendarEvent"


def test_turbo_registry_needs_companion_name(calendar_bindings):
    # Same chain shape, but the module name string does not match.
    body = TURBO_REGISTRY_BODY.replace('"Calendar"', '"OtherModule"')
    assert match_invocations(sites_of(body), calendar_bindings) == []


def test_companion_must_be_same_caller(calendar_bindings):
    from hasmtext import doc
    text = doc(
        ("global", 1, """
GetGlobalObject r0
GetById r1, r0, 1, "TurboModuleRegistry"
GetById r2, r1, 2, "getEnforcing"
LoadConstString r3, "Calendar"
Call2 r4, r2, r1, r3
Ret r4
"""),
        ("other", 1, """
GetGlobalObject r0
GetById r1, r0, 1, "TurboModuleRegistry"
GetById r2, r1, 2, "getEnforcing"
Call1 r4, r2, r1
GetById r5, r4, 3, "createCalendarEvent"
LoadConstString r6, "Picnic"
Call2 r8, r5, r4, r6
Ret r8
"""))
    sites = lift_program(parse_disassembly(text)).call_sites
    assert match_invocations(sites, calendar_bindings) == []


def test_duplicate_exposed_names_match_both():
    def module(cls):
        return {"name": cls, "super": "ReactContextBaseJavaModule",
                "methods": [
                    {"name": "getName", "return": "java.lang.String",
                     "constantReturn": "Dup"},
                    {"name": "go", "params": [], "return": "void",
                     "annotations": [{"name": "ReactMethod"}]}]}
    model = load_class_model({"schemaVersion": 1, "classes": [
        {"name": "ReactContextBaseJavaModule", "abstract": True},
        module("A"), module("B")]})
    body = """
GetGlobalObject r0
GetById r1, r0, 1, "NativeModules"
GetById r2, r1, 2, "Dup"
GetById r3, r2, 3, "go"
Call1 r6, r3, r2
Ret r6
"""
    matches = match_invocations(sites_of(body), extract_bindings(model))
    assert [m.binding.className for m in matches] == ["A", "B"]


ALIAS_BODY = """
GetById r2, r9, 2, "Calendar"
GetById r3, r2, 3, "createCalendarEvent"
Call1 r6, r3, r2
GetGlobalObject r0
GetById r4, r0, 4, "console"
GetById r5, r4, 5, "log"
Call1 r7, r5, r4
Ret r6
"""


def test_match_against_brute_force_oracle(calendar_bindings):
    # Oracle: enumerate every (site, binding, adjacent chain pair) triple.
    # Bodies here use only registry-object access, the flavor the oracle
    # reimplements.
    for body in (NATIVE_MODULES_BODY, ALIAS_BODY):
        sites = sites_of(body)
        expected = set()
        for site in sites:
            desc = site.calleeDescriptor
            chain = desc.chain if desc and desc.origin in (
                "GlobalObject", "PropertyAccess", "CallResult") else ()
            for binding in calendar_bindings.modules:
                for i in range(len(chain) - 1):
                    if (chain[i] == binding.exposedName
                            and chain[i + 1] in binding.methods()):
                        expected.add((site.statementIndex, binding.className,
                                      chain[i + 1]))
        got = {(m.callSite.statementIndex, m.binding.className, m.jsMethodName)
               for m in match_invocations(sites, calendar_bindings)}
        assert got == expected


# --------------------------------------------------------------------------
# builtins

def test_builtin_recovery_by_suffix():
    body = """
GetGlobalObject r0
GetById r1, r0, 1, "console"
GetById r2, r1, 2, "log"
LoadConstString r3, "hi"
Call2 r4, r2, r1, r3
GetById r5, r0, 3, "alert"
Call2 r6, r5, r0, r3
Ret r6
"""
    found = recover_builtins(sites_of(body))
    assert [(m.builtinName, m.callSite.statementIndex) for m in found] == [
        ("console.log", 5), ("alert", 7)]


def test_builtin_requires_chain_callee():
    body = """
LoadConstString r1, "console.log"
Call1 r2, r1, r1
Ret r2
"""
    assert recover_builtins(sites_of(body)) == []


def test_builtin_catalog_file_roundtrip(tmp_path):
    path = tmp_path / "builtins.json"
    path.write_text('["console.log", "vibrate"]')
    assert load_builtin_catalog(path) == ("console.log", "vibrate")
    path.write_text('{"not": "a list"}')
    with pytest.raises(ValueError):
        load_builtin_catalog(path)


def test_default_catalog_entries():
    assert "console.log" in DEFAULT_BUILTINS
    assert "fetch" in DEFAULT_BUILTINS


# --------------------------------------------------------------------------
# diagnostics

def test_unlinked_native_modules_call_warns(calendar_bindings):
    body = """
GetGlobalObject r0
GetById r1, r0, 1, "NativeModules"
GetById r2, r1, 2, "GhostModule"
GetById r3, r2, 3, "vanish"
Call1 r6, r3, r2
Ret r6
"""
    sites = sites_of(body)
    matches = match_invocations(sites, calendar_bindings)
    (warning,) = unlinked_bridge_calls(sites, matches)
    assert warning.code == "UnlinkedBridgeCall"
    assert "GhostModule.vanish" in warning.detail


def test_matched_sites_not_warned(calendar_bindings):
    sites = sites_of(NATIVE_MODULES_BODY)
    matches = match_invocations(sites, calendar_bindings)
    assert unlinked_bridge_calls(sites, matches) == []


def test_plain_calls_not_warned(calendar_bindings):
    body = """
GetGlobalObject r0
GetById r2, r0, 2, "setTimeout"
Call1 r3, r2, r0
Ret r3
"""
    sites = sites_of(body)
    assert unlinked_bridge_calls(sites, []) == []
