"""Link JavaScript call sites to native bindings and JS builtins.

Two recognizers connect the sides:

* registry-object access: the callee's property chain contains a module's
  exposed name immediately followed by one of its bridge method names
  (``NativeModules.Tracker.reportLocation(...)`` and aliased forms).
* turbo-registry access: the chain ends with
  ``TurboModuleRegistry . get|getEnforcing . <call-result> . <method>`` and
  a companion call in the same caller passed the module's exposed name as a
  string constant to ``TurboModuleRegistry.get(...)``.

Matching is name-based over descriptor chains, so a local variable that
happens to share a module's exposed name can produce a spurious link; the
match confidence separates arity-consistent links from name-only ones.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .ir import MethodSig
from .javamodel import BindingSet, ModuleBinding
from .lifter import CallSiteRecord, OUTPUT_SUFFIX

REGISTRY_OBJECT = "TurboModuleRegistry"
REGISTRY_GETTERS = {"get", "getEnforcing"}
CHAIN_ORIGINS = {"GlobalObject", "PropertyAccess", "CallResult"}

DEFAULT_BUILTINS = (
    "console.log", "console.warn", "console.error", "alert",
    "JSON.parse", "JSON.stringify", "setTimeout", "setInterval",
    "Promise.then", "fetch",
)


@dataclass(frozen=True)
class BridgeMatch:
    callSite: CallSiteRecord
    binding: ModuleBinding
    jsMethodName: str
    javaSig: MethodSig
    confidence: str               # "Exact" | "NameOnly"


@dataclass(frozen=True)
class BuiltinMatch:
    callSite: CallSiteRecord
    builtinName: str


@dataclass(frozen=True)
class BridgeWarning:
    code: str
    callerSig: MethodSig
    statementIndex: int
    detail: str


def _callee_chain(site: CallSiteRecord) -> tuple[str, ...] | None:
    desc = site.calleeDescriptor
    if desc is None or desc.origin not in CHAIN_ORIGINS or not desc.chain:
        return None
    return desc.chain


def _confidence(site: CallSiteRecord, java_sig: MethodSig) -> str:
    # JS passes the receiver as the first call argument; a native method
    # may additionally take a trailing Promise the JS side never writes.
    arity = len(java_sig.paramTypes)
    return "Exact" if arity in (site.argCount - 1, site.argCount) else "NameOnly"


def _first_const_string(site: CallSiteRecord) -> str | None:
    for desc in site.argDescriptors:
        if desc.origin == "ConstString" and isinstance(desc.value, str):
            return desc.value
    return None


def _registry_companions(call_sites: list[CallSiteRecord],
                         caller: MethodSig) -> set[str]:
    """Module names passed to TurboModuleRegistry getters in one caller."""
    names: set[str] = set()
    for site in call_sites:
        if site.callerSig != caller:
            continue
        chain = _callee_chain(site)
        if (chain and len(chain) >= 2 and chain[-2] == REGISTRY_OBJECT
                and chain[-1] in REGISTRY_GETTERS):
            value = _first_const_string(site)
            if value is not None:
                names.add(value)
    return names


def match_invocations(call_sites: list[CallSiteRecord],
                      bindings: BindingSet) -> list[BridgeMatch]:
    matches: list[BridgeMatch] = []
    seen: set[tuple] = set()

    def add(site, binding, js_name):
        java_sig = binding.methods()[js_name]
        key = (site.callerSig.render(), site.statementIndex,
               binding.className, js_name)
        if key in seen:
            return
        seen.add(key)
        matches.append(BridgeMatch(
            site, binding, js_name, java_sig, _confidence(site, java_sig)))

    for site in call_sites:
        chain = _callee_chain(site)
        if chain is None:
            continue
        for binding in bindings.modules:
            method_map = binding.methods()
            for left, right in zip(chain, chain[1:]):
                if left == binding.exposedName and right in method_map:
                    add(site, binding, right)
        if (len(chain) >= 4 and chain[-4] == REGISTRY_OBJECT
                and chain[-3] in REGISTRY_GETTERS
                and chain[-2] == OUTPUT_SUFFIX):
            method = chain[-1]
            companions = _registry_companions(call_sites, site.callerSig)
            for binding in bindings.modules:
                if (binding.exposedName in companions
                        and method in binding.methods()):
                    add(site, binding, method)

    matches.sort(key=lambda m: (m.callSite.callerSig.render(),
                                m.callSite.statementIndex,
                                m.binding.className, m.jsMethodName))
    return matches


# --------------------------------------------------------------------------
# builtins

def load_builtin_catalog(path: str | Path) -> tuple[str, ...]:
    """A catalog file is a JSON array of dotted builtin names."""
    raw = json.loads(Path(path).read_text())
    if (not isinstance(raw, list)
            or any(not isinstance(x, str) or not x for x in raw)):
        raise ValueError(f"{path}: expected a JSON array of dotted names")
    return tuple(raw)


def recover_builtins(call_sites: list[CallSiteRecord],
                     catalog: tuple[str, ...] = DEFAULT_BUILTINS,
                     ) -> list[BuiltinMatch]:
    """Match callee chains against the builtin catalog by dotted suffix."""
    out: list[BuiltinMatch] = []
    for site in call_sites:
        chain = _callee_chain(site)
        if chain is None:
            continue
        for name in catalog:
            parts = tuple(name.split("."))
            if len(chain) >= len(parts) and chain[-len(parts):] == parts:
                out.append(BuiltinMatch(site, name))
    out.sort(key=lambda m: (m.callSite.callerSig.render(),
                            m.callSite.statementIndex, m.builtinName))
    return out


# --------------------------------------------------------------------------
# diagnostics

def unlinked_bridge_calls(call_sites: list[CallSiteRecord],
                          matches: list[BridgeMatch],
                          ) -> list[BridgeWarning]:
    """Call sites that look like bridge traffic but matched no binding."""
    matched = {(m.callSite.callerSig.render(), m.callSite.statementIndex)
               for m in matches}
    warnings: list[BridgeWarning] = []
    for site in call_sites:
        chain = _callee_chain(site)
        if chain is None:
            continue
        if (site.callerSig.render(), site.statementIndex) in matched:
            continue
        looks_bridgey = "NativeModules" in chain[:-1] or (
            len(chain) >= 4 and chain[-4] == REGISTRY_OBJECT
            and chain[-3] in REGISTRY_GETTERS and chain[-2] == OUTPUT_SUFFIX)
        if looks_bridgey:
            warnings.append(BridgeWarning(
                "UnlinkedBridgeCall", site.callerSig, site.statementIndex,
                ".".join(chain)))
    return warnings
