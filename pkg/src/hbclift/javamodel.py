"""Native-module bindings extracted from a Java class model.

The model is a JSON snapshot of an app's Java side: class hierarchy,
interfaces, string constants, and per-method annotations plus flat call
summaries. From it we recover what the bridge exposes to JavaScript:

* new-architecture modules: an abstract spec class that reaches the
  context-module base AND carries both spec interfaces transitively;
  concrete subclasses implement it.
* old-architecture modules: concrete classes that reach the base without
  the spec interface pair.
* view components: classes descending from a view-manager root.

Framework names are matched by full name or final dotted segment, so a
model may use either bare or fully qualified names.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .ir import MethodSig, make_signature


class ModelError(Exception):
    """Schema violation; message carries a JSON path to the bad field."""


# --------------------------------------------------------------------------
# model data

@dataclass
class JavaAnnotation:
    name: str
    args: dict = field(default_factory=dict)


@dataclass
class JavaMethod:
    name: str
    params: tuple[str, ...] = ()
    returnType: str = "void"
    annotations: list[JavaAnnotation] = field(default_factory=list)
    constantReturn: str | None = None
    calls: tuple[str, ...] = ()
    abstract: bool = False


@dataclass
class JavaClass:
    name: str
    superName: str | None = None
    interfaces: tuple[str, ...] = ()
    abstract: bool = False
    stringConstants: dict[str, str] = field(default_factory=dict)
    methods: list[JavaMethod] = field(default_factory=list)


class ClassModel:
    def __init__(self, classes: list[JavaClass]):
        self.classes: dict[str, JavaClass] = {}
        for cls in classes:
            if cls.name in self.classes:
                raise ModelError(f"classes: duplicate class name {cls.name!r}")
            self.classes[cls.name] = cls

    def __iter__(self):
        return iter(self.classes.values())

    def __contains__(self, name: str) -> bool:
        return name in self.classes

    def get(self, name: str) -> JavaClass | None:
        return self.classes.get(name)


# --------------------------------------------------------------------------
# loading

def _want(value, types, path: str, what: str):
    if not isinstance(value, types):
        raise ModelError(f"{path}: expected {what}, got {type(value).__name__}")
    return value


def _str_list(value, path: str) -> tuple[str, ...]:
    _want(value, list, path, "a list of strings")
    for i, item in enumerate(value):
        _want(item, str, f"{path}[{i}]", "a string")
    return tuple(value)


def _load_method(raw, path: str) -> JavaMethod:
    _want(raw, dict, path, "an object")
    name = _want(raw.get("name"), str, f"{path}.name", "a string")
    if not name:
        raise ModelError(f"{path}.name: must be non-empty")
    annotations = []
    for i, a in enumerate(raw.get("annotations", [])):
        apath = f"{path}.annotations[{i}]"
        _want(a, dict, apath, "an object")
        annotations.append(JavaAnnotation(
            _want(a.get("name"), str, f"{apath}.name", "a string"),
            _want(a.get("args", {}), dict, f"{apath}.args", "an object")))
    constant = raw.get("constantReturn")
    if constant is not None:
        _want(constant, str, f"{path}.constantReturn", "a string")
    return JavaMethod(
        name=name,
        params=_str_list(raw.get("params", []), f"{path}.params"),
        returnType=_want(raw.get("return", "void"), str,
                         f"{path}.return", "a string"),
        annotations=annotations,
        constantReturn=constant,
        calls=_str_list(raw.get("calls", []), f"{path}.calls"),
        abstract=_want(raw.get("abstract", False), bool,
                       f"{path}.abstract", "a bool"))


def _load_class(raw, path: str) -> JavaClass:
    _want(raw, dict, path, "an object")
    name = _want(raw.get("name"), str, f"{path}.name", "a string")
    if not name:
        raise ModelError(f"{path}.name: must be non-empty")
    super_name = raw.get("super")
    if super_name is not None:
        _want(super_name, str, f"{path}.super", "a string or null")
    constants = _want(raw.get("stringConstants", {}), dict,
                      f"{path}.stringConstants", "an object")
    for key, value in constants.items():
        _want(value, str, f"{path}.stringConstants.{key}", "a string")
    return JavaClass(
        name=name,
        superName=super_name,
        interfaces=_str_list(raw.get("interfaces", []), f"{path}.interfaces"),
        abstract=_want(raw.get("abstract", False), bool,
                       f"{path}.abstract", "a bool"),
        stringConstants=dict(constants),
        methods=[_load_method(m, f"{path}.methods[{i}]")
                 for i, m in enumerate(raw.get("methods", []))])


def load_class_model(source: dict | str | Path) -> ClassModel:
    """Load and validate a class-model document (dict, or a JSON file path)."""
    if isinstance(source, (str, Path)):
        try:
            raw = json.loads(Path(source).read_text())
        except json.JSONDecodeError as exc:
            raise ModelError(f"not valid JSON: {exc}") from exc
    else:
        raw = source
    _want(raw, dict, "$", "an object")
    version = raw.get("schemaVersion")
    if version != 1:
        raise ModelError(f"$.schemaVersion: expected 1, got {version!r}")
    classes = _want(raw.get("classes"), list, "$.classes", "a list")
    return ClassModel([_load_class(c, f"$.classes[{i}]")
                       for i, c in enumerate(classes)])


# --------------------------------------------------------------------------
# framework configuration

@dataclass(frozen=True)
class FrameworkConfig:
    moduleBase: str = "ReactContextBaseJavaModule"
    specInterfaces: frozenset[str] = frozenset(
        {"ReactModuleWithSpec", "TurboModule"})
    methodAnnotation: str = "ReactMethod"
    nameMethod: str = "getName"
    componentRoots: tuple[str, ...] = ("ViewManager",)


DEFAULT_CONFIG = FrameworkConfig()


def _segment(name: str) -> str:
    return name.rsplit(".", 1)[-1]


def _marker_match(name: str, marker: str) -> bool:
    return name == marker or _segment(name) == marker


# --------------------------------------------------------------------------
# hierarchy walks

def super_chain(model: ClassModel, name: str) -> list[str]:
    """Transitive superclass names, nearest first, resolved in-model."""
    chain = []
    cls = model.get(name)
    seen = {name}
    while cls is not None and cls.superName and cls.superName not in seen:
        chain.append(cls.superName)
        seen.add(cls.superName)
        cls = model.get(cls.superName)
    return chain


def ancestry(model: ClassModel, name: str) -> list[str]:
    return [name] + super_chain(model, name)


def all_interfaces(model: ClassModel, name: str) -> set[str]:
    """Interfaces visible through the super chain and super-interfaces."""
    out: set[str] = set()
    stack = [name]
    seen: set[str] = set()
    while stack:
        cur = stack.pop()
        if cur in seen:
            continue
        seen.add(cur)
        cls = model.get(cur)
        if cls is None:
            continue
        out.update(cls.interfaces)
        stack.extend(cls.interfaces)
        if cls.superName:
            stack.append(cls.superName)
    return out


def _reaches_base(model: ClassModel, name: str, config: FrameworkConfig) -> bool:
    return any(_marker_match(a, config.moduleBase)
               for a in super_chain(model, name))


def _has_spec_interfaces(model: ClassModel, name: str,
                         config: FrameworkConfig) -> bool:
    ifaces = all_interfaces(model, name)
    return all(any(_marker_match(i, marker) for i in ifaces)
               for marker in config.specInterfaces)


# --------------------------------------------------------------------------
# module discovery

def find_module_specs(model: ClassModel,
                      config: FrameworkConfig = DEFAULT_CONFIG) -> list[str]:
    """New-architecture spec classes.

    A candidate reaches the module base and sees both spec interfaces;
    a candidate whose proper ancestor also qualifies is the implementation,
    not the spec, and is filtered out.
    """
    qualifies = {cls.name for cls in model
                 if _reaches_base(model, cls.name, config)
                 and _has_spec_interfaces(model, cls.name, config)}
    return [name for cls in model if (name := cls.name) in qualifies
            and not any(a in qualifies for a in super_chain(model, name))]


def find_legacy_modules(model: ClassModel,
                        config: FrameworkConfig = DEFAULT_CONFIG) -> list[str]:
    """Old-architecture module classes: reach the base, no spec interfaces."""
    return [cls.name for cls in model
            if _reaches_base(model, cls.name, config)
            and not _has_spec_interfaces(model, cls.name, config)]


def find_impl_classes(model: ClassModel, spec_name: str) -> list[str]:
    return [cls.name for cls in model
            if not cls.abstract and spec_name in super_chain(model, cls.name)]


def collect_react_methods(model: ClassModel, class_name: str,
                          config: FrameworkConfig = DEFAULT_CONFIG,
                          ) -> list[tuple[str, JavaMethod]]:
    """Annotated bridge methods visible on a class, nearest override first.

    Returns (declaringClass, method) pairs; a (name, params) key seen on a
    nearer class shadows the same key further up.
    """
    out: list[tuple[str, JavaMethod]] = []
    seen: set[tuple[str, tuple[str, ...]]] = set()
    for cls_name in ancestry(model, class_name):
        cls = model.get(cls_name)
        if cls is None:
            continue
        for m in cls.methods:
            key = (m.name, m.params)
            if key in seen:
                continue
            if any(_marker_match(a.name, config.methodAnnotation)
                   for a in m.annotations):
                seen.add(key)
                out.append((cls_name, m))
    return out


def collect_overrides(model: ClassModel, impl_name: str,
                      declared: list[tuple[str, JavaMethod]],
                      ) -> dict[str, MethodSig]:
    """Resolve each declared bridge method to its nearest concrete override."""
    method_map: dict[str, MethodSig] = {}
    chain = ancestry(model, impl_name)
    for owner, decl in declared:
        resolved_owner, resolved = owner, decl
        for cls_name in chain:
            cls = model.get(cls_name)
            if cls is None:
                continue
            hit = next((m for m in cls.methods
                        if m.name == decl.name and m.params == decl.params
                        and not m.abstract), None)
            if hit is not None:
                resolved_owner, resolved = cls_name, hit
                break
        method_map.setdefault(decl.name, make_signature(
            resolved_owner, resolved.name, resolved.params,
            resolved.returnType))
    return method_map


def resolve_module_name(model: ClassModel, class_name: str,
                        config: FrameworkConfig = DEFAULT_CONFIG,
                        ) -> tuple[str | None, str | None]:
    """(exposedName, warningCode); exactly one side is None.

    The name method's constantReturn is looked up in string constants along
    the ancestry; an unmatched value is taken as the literal name itself.
    """
    name_method = None
    for cls_name in ancestry(model, class_name):
        cls = model.get(cls_name)
        if cls is None:
            continue
        hit = next((m for m in cls.methods
                    if m.name == config.nameMethod and not m.abstract), None)
        if hit is not None:
            name_method = hit
            break
    if name_method is None:
        return None, "MissingName"
    if name_method.constantReturn is None:
        return None, "UnresolvedName"
    for cls_name in ancestry(model, class_name):
        cls = model.get(cls_name)
        if cls is not None and name_method.constantReturn in cls.stringConstants:
            return cls.stringConstants[name_method.constantReturn], None
    return name_method.constantReturn, None


# --------------------------------------------------------------------------
# bindings

@dataclass(frozen=True)
class ModuleBinding:
    className: str
    exposedName: str
    kind: str                     # "TurboNativeModule" | "NativeModule"
    methodMap: tuple[tuple[str, MethodSig], ...]
    specClass: str | None = None

    def methods(self) -> dict[str, MethodSig]:
        return dict(self.methodMap)


@dataclass(frozen=True)
class ComponentBinding:
    className: str
    exposedName: str


@dataclass(frozen=True)
class ModelWarning:
    code: str
    className: str
    detail: str = ""


@dataclass
class BindingSet:
    modules: list[ModuleBinding]
    components: list[ComponentBinding]
    warnings: list[ModelWarning]

    def module_names(self) -> set[str]:
        return {b.exposedName for b in self.modules}


def extract_component_bindings(model: ClassModel,
                               config: FrameworkConfig = DEFAULT_CONFIG,
                               ) -> tuple[list[ComponentBinding],
                                          list[ModelWarning]]:
    components, warnings = [], []
    for cls in model:
        if cls.abstract:
            continue
        if not any(_segment(a).endswith(root)
                   for a in super_chain(model, cls.name)
                   for root in config.componentRoots):
            continue
        exposed, warn = resolve_module_name(model, cls.name, config)
        if exposed is None:
            warnings.append(ModelWarning(warn, cls.name, "component"))
            continue
        components.append(ComponentBinding(cls.name, exposed))
    return components, warnings


def extract_bindings(model: ClassModel,
                     config: FrameworkConfig = DEFAULT_CONFIG) -> BindingSet:
    modules: list[ModuleBinding] = []
    warnings: list[ModelWarning] = []

    def add_module(impl: str, spec: str | None, kind: str) -> None:
        exposed, warn = resolve_module_name(model, impl, config)
        if exposed is None:
            warnings.append(ModelWarning(warn, impl))
            return
        declared = collect_react_methods(model, impl, config)
        method_map = collect_overrides(model, impl, declared)
        modules.append(ModuleBinding(
            impl, exposed, kind, tuple(method_map.items()), spec))

    for spec in find_module_specs(model, config):
        impls = find_impl_classes(model, spec)
        if impls:
            for impl in impls:
                add_module(impl, spec, "TurboNativeModule")
        elif not model.get(spec).abstract:
            add_module(spec, spec, "TurboNativeModule")

    for name in find_legacy_modules(model, config):
        cls = model.get(name)
        if cls is not None and not cls.abstract:
            add_module(name, None, "NativeModule")

    by_name: dict[str, list[ModuleBinding]] = {}
    for b in modules:
        by_name.setdefault(b.exposedName, []).append(b)
    for exposed, group in by_name.items():
        if len(group) > 1:
            for b in group[1:]:
                warnings.append(ModelWarning(
                    "DuplicateModuleName", b.className,
                    f"{exposed} also exposed by {group[0].className}"))

    components, comp_warnings = extract_component_bindings(model, config)
    warnings.extend(comp_warnings)
    return BindingSet(modules, components, warnings)
