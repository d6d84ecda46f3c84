"""Seeded random fixture pairs: one disassembly document plus a class model.

Every generated function parses, lifts, and passes body validation; the
generated model loads cleanly. Same seed, same bytes, so generated corpora
are reproducible in tests and scripts.
"""

import json
import random
from dataclasses import dataclass
from pathlib import Path

_HEADER = "FILE HEADER:\n  Bytecode version number: 89\n\nFUNCTION HEADER TABLE:\n\n"
_FOOTER = "Debug Information:\n\n"
_REGS = 32

_METHOD_NAMES = ("sync", "report", "fetchItems", "openScreen", "storeValue",
                 "ping", "upload", "refresh")
_MODULE_NAMES = ("Storage", "Tracker", "Device", "Camera", "Clipboard",
                 "Beacon")
_PARAM_TYPES = ("java.lang.String", "int", "double", "boolean")

_SOURCES = (
    "<android.telephony.TelephonyManager: java.lang.String getDeviceId()>",
    "<android.net.wifi.WifiInfo: java.lang.String getSSID()>",
    "<android.location.LocationManager: android.location.Location "
    "getLastKnownLocation(java.lang.String)>",
)
_SINKS = (
    "<android.content.Intent: android.content.Intent "
    "putExtra(java.lang.String,java.lang.String)>",
    "<android.content.SharedPreferences$Editor: "
    "android.content.SharedPreferences$Editor "
    "putString(java.lang.String,java.lang.String)>",
    "<android.content.ContentResolver: android.net.Uri "
    "insert(android.net.Uri,android.content.ContentValues)>",
)

_FRAMEWORK = (
    {"name": "com.facebook.react.bridge.ReactContextBaseJavaModule",
     "abstract": True},
    {"name": "com.facebook.react.bridge.ReactModuleWithSpec",
     "abstract": True},
    {"name": "com.facebook.react.turbomodule.core.interfaces.TurboModule",
     "abstract": True},
)


@dataclass(frozen=True)
class FixturePair:
    hasm: str
    model: dict


@dataclass
class _ModuleShape:
    exposed: str
    methods: list[tuple[str, int]]   # (jsName, javaParamCount)


def _gen_model(rng: random.Random) -> tuple[dict, list[_ModuleShape]]:
    classes = [dict(c) for c in _FRAMEWORK]
    shapes: list[_ModuleShape] = []
    base = _FRAMEWORK[0]["name"]

    for exposed in rng.sample(_MODULE_NAMES, rng.randint(1, 3)):
        impl = f"com.gen.modules.{exposed}Module"
        turbo = rng.random() < 0.5
        shape = _ModuleShape(exposed, [])

        method_docs = []
        for name in rng.sample(_METHOD_NAMES, rng.randint(1, 3)):
            params = [rng.choice(_PARAM_TYPES)
                      for _ in range(rng.randint(0, 2))]
            doc = {"name": name, "params": params, "return": "void",
                   "annotations": [{"name": "ReactMethod"}]}
            if rng.random() < 0.5:
                doc["calls"] = [rng.choice(_SOURCES), rng.choice(_SINKS)]
            method_docs.append(doc)
            shape.methods.append((name, len(params)))

        get_name = {"name": "getName", "return": "java.lang.String",
                    "constantReturn": "NAME"}
        if turbo:
            spec = impl + "Spec"
            classes.append({
                "name": spec, "super": base, "abstract": True,
                "interfaces": [_FRAMEWORK[1]["name"], _FRAMEWORK[2]["name"]],
                "methods": [{"name": d["name"], "params": d["params"],
                             "return": "void", "abstract": True,
                             "annotations": [{"name": "ReactMethod"}]}
                            for d in method_docs]})
            concrete = [{k: v for k, v in d.items() if k != "annotations"}
                        for d in method_docs]
            classes.append({"name": impl, "super": spec,
                            "stringConstants": {"NAME": exposed},
                            "methods": concrete + [get_name]})
        else:
            classes.append({"name": impl, "super": base,
                            "stringConstants": {"NAME": exposed},
                            "methods": method_docs + [get_name]})
        shapes.append(shape)

    return {"schemaVersion": 1, "classes": classes}, shapes


class _Body:
    """Instruction accumulator with a bump register allocator."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.lines: list[str] = []
        self.next_reg = 0
        self.defined: list[str] = []
        self.labels = 0

    def reg(self) -> str:
        name = f"r{self.next_reg}"
        self.next_reg += 1
        return name

    def room(self, needed: int) -> bool:
        return self.next_reg + needed <= _REGS - 2

    def emit(self, line: str) -> None:
        self.lines.append(line)

    def define(self, line_template: str) -> str:
        dest = self.reg()
        self.emit(line_template.format(dest=dest))
        self.defined.append(dest)
        return dest

    def any_defined(self) -> str:
        return self.rng.choice(self.defined)


def _emit_const(body: _Body) -> None:
    rng = body.rng
    pick = rng.randrange(3)
    if pick == 0:
        body.define(f'LoadConstString {{dest}}, "s{rng.randrange(100)}"')
    elif pick == 1:
        body.define(f"LoadConstInt {{dest}}, {rng.randrange(1000)}")
    else:
        body.define(f"LoadConstDouble {{dest}}, {rng.randrange(50)}.5")


def _emit_builtin_call(body: _Body, glob: str) -> None:
    obj = body.define(f'GetById {{dest}}, {glob}, 1, "console"')
    fn = body.define(f'GetById {{dest}}, {obj}, 2, "log"')
    arg = body.any_defined()
    body.define(f"Call2 {{dest}}, {fn}, {obj}, {arg}")


def _emit_bridge_call(body: _Body, glob: str, shape: _ModuleShape,
                      ghost: bool) -> None:
    rng = body.rng
    exposed = "Ghost" + shape.exposed if ghost else shape.exposed
    js_name, param_count = rng.choice(shape.methods)
    registry = body.define(f'GetById {{dest}}, {glob}, 1, "NativeModules"')
    module = body.define(f'GetById {{dest}}, {registry}, 2, "{exposed}"')
    fn = body.define(f'GetById {{dest}}, {module}, 3, "{js_name}"')
    args = []
    for _ in range(min(param_count, 3)):
        args.append(body.define(
            f"LoadConstInt {{dest}}, {rng.randrange(10)}"))
    argc = 1 + len(args)
    call = ", ".join([f"Call{argc} {{dest}}, {fn}, {module}"] + args)
    body.define(call)


def _emit_closure_call(body: _Body, glob: str, name: str, fid: int) -> None:
    closure = body.define(
        f"CreateClosure {{dest}}, {glob}, Function<{name}>{fid}")
    body.define(f"Call1 {{dest}}, {closure}, {glob}")


def _emit_arith(body: _Body) -> None:
    op = body.rng.choice(("Add", "Sub", "Mul", "Div"))
    a, b = body.any_defined(), body.any_defined()
    body.define(f"{op} {{dest}}, {a}, {b}")


def _emit_branch(body: _Body) -> None:
    cond = body.define("LoadConstInt {dest}, 1")
    then_label = f"L{body.labels + 1}"
    join_label = f"L{body.labels + 2}"
    body.labels += 2
    taken = body.rng.choice(("JmpTrue", "JmpFalse"))
    body.emit(f"{taken} {then_label}, {cond}")
    body.define(f"Mov {{dest}}, {body.any_defined()}")
    body.emit(f"Jmp {join_label}")
    body.emit(f"{then_label}:")
    body.define(f"Mov {{dest}}, {body.any_defined()}")
    body.emit(f"{join_label}:")
    body.define(f"Mov {{dest}}, {body.any_defined()}")


def _gen_function(rng: random.Random, shapes: list[_ModuleShape],
                  helper_ids: list[tuple[str, int]], is_root: bool) -> str:
    body = _Body(rng)
    glob = body.define("GetGlobalObject {dest}")
    for _ in range(rng.randint(1, 2)):
        _emit_const(body)

    features = rng.randint(1, 4) if is_root else rng.randint(0, 2)
    for _ in range(features):
        pick = rng.randrange(6)
        if pick == 0 and body.room(4):
            _emit_builtin_call(body, glob)
        elif pick == 1 and shapes and body.room(8):
            _emit_bridge_call(body, glob, rng.choice(shapes),
                              ghost=rng.random() < 0.2)
        elif pick == 2 and helper_ids and body.room(3):
            name, fid = rng.choice(helper_ids)
            _emit_closure_call(body, glob, name, fid)
        elif pick == 3 and body.room(2):
            _emit_arith(body)
        elif pick == 4 and body.room(5):
            _emit_branch(body)
        elif body.room(2):
            _emit_const(body)

    body.emit(f"Ret {body.any_defined()}")
    return "\n".join(body.lines)


def gen_fixture(seed: int) -> FixturePair:
    """Generate one matched (disassembly, class model) pair."""
    rng = random.Random(seed)
    model, shapes = _gen_model(rng)

    helper_count = rng.randint(1, 3)
    helpers = []
    for i in range(helper_count):
        name = "" if rng.random() < 0.25 else f"helper{i}"
        helpers.append((name, i + 1))

    parts = [_HEADER]

    def append_function(name: str, params: int, text: str) -> None:
        parts.append(f"Function<{name}>({params} params, {_REGS} registers, "
                     f"0 symbols):\n")
        for line in text.splitlines():
            parts.append("    " + line + "\n")
        parts.append("\n")

    named_helpers = [(n, fid) for n, fid in helpers if n]
    append_function("global", 1,
                    _gen_function(rng, shapes, named_helpers, is_root=True))
    for name, _fid in helpers:
        append_function(name, rng.randint(1, 3),
                        _gen_function(rng, shapes, [], is_root=False))

    parts.append(_FOOTER)
    return FixturePair("".join(parts), model)


def write_fixture(pair: FixturePair, stem: str,
                  directory: Path) -> tuple[Path, Path]:
    directory.mkdir(parents=True, exist_ok=True)
    hasm_path = directory / f"{stem}.hasm"
    model_path = directory / f"{stem}.model.json"
    hasm_path.write_text(pair.hasm)
    model_path.write_text(json.dumps(pair.model, indent=2) + "\n")
    return hasm_path, model_path
