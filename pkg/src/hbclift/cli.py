"""Command line front end: detect, lift, bindings, callgraph, and taint.

Exit codes: 0 success, 2 unusable input (unreadable file, parse or schema
error), 3 internal invariant violation (a lifted body failed validation).
Every report is JSON with sorted keys so identical inputs and flags produce
byte-identical output.
"""

import dataclasses
import json
import logging
from pathlib import Path

import click

from . import __version__
from .bridge import DEFAULT_BUILTINS, load_builtin_catalog
from .callgraph import (
    GraphOptions, build_callgraph, diff_callgraphs, export_graph,
)
from .hasm import (
    DisassemblyError, detect_bundle_kind, detect_truncated_literals,
    parse_disassembly,
)
from .ir import IrError, print_ir, validate_body
from .javamodel import (
    DEFAULT_CONFIG, ModelError, extract_bindings, load_class_model,
)
from .lifter import lift_program
from .taint import (
    DEFAULT_SOURCES_SINKS, categorize_findings, load_sources_sinks, run_taint,
)

log = logging.getLogger("hbclift")

_VARIANTS = click.Choice(["canonical", "hbcdump"])
_IN_FILE = click.Path(exists=True, dir_okay=False, path_type=Path)
_OUT_DIR = click.Path(file_okay=False, path_type=Path)


class InputError(click.ClickException):
    exit_code = 2


def _echo_report(doc: dict) -> None:
    click.echo(json.dumps(doc, indent=2, sort_keys=True))


def _report(command: str, config: dict, **payload) -> dict:
    doc = {"toolVersion": __version__, "command": command, "config": config}
    doc.update(payload)
    return doc


def _load_program(path: Path, variant: str | None):
    try:
        return parse_disassembly(path.read_text(), variant)
    except DisassemblyError as exc:
        raise InputError(f"{path.name}: {exc}") from exc


def _load_model(path: Path | None):
    if path is None:
        return None
    try:
        return load_class_model(path)
    except ModelError as exc:
        raise InputError(f"{path.name}: {exc}") from exc


def _graph_options(with_bridge: bool, roots: str, builtins: Path | None):
    catalog = DEFAULT_BUILTINS
    if builtins is not None:
        try:
            catalog = load_builtin_catalog(builtins)
        except ValueError as exc:
            raise InputError(f"{builtins.name}: {exc}") from exc
    java_roots = tuple(r for r in (s.strip() for s in roots.split(",")) if r)
    return GraphOptions(withBridge=with_bridge, javaRoots=java_roots,
                        builtins=catalog)


def _descriptor_doc(lifted) -> dict:
    doc = {}
    for fid, states in sorted(lifted.register_maps.items()):
        rows = []
        for state in states:
            row = {}
            for reg, desc in sorted(state.items()):
                entry = {"origin": desc.origin, "chain": list(desc.chain)}
                if desc.value is not None:
                    entry["value"] = desc.value
                row[reg] = entry
            rows.append(row)
        doc[lifted.identities[fid].sig.render()] = rows
    return doc


def _write(out_dir: Path, name: str, text: str) -> str:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / name).write_text(text)
    log.info("wrote %s", out_dir / name)
    return name


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="hbclift")
@click.option("--log-level", envvar="HBC_UNIFY_LOG", default="warning",
              show_default=True,
              type=click.Choice(["debug", "info", "warning", "error"],
                                case_sensitive=False),
              help="Log verbosity; HBC_UNIFY_LOG overrides the default.")
def main(log_level: str) -> None:
    """Lift Hermes disassembly, link native modules, analyze the result."""
    logging.basicConfig(level=getattr(logging, log_level.upper()),
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("bundle", type=_IN_FILE)
def detect(bundle: Path) -> None:
    """Classify a bundle as Hermes bytecode, plain JavaScript, or unknown."""
    kind = detect_bundle_kind(bundle.read_bytes())
    _echo_report(_report("detect", {"bundle": bundle.name}, kind=kind.value))


@main.command()
@click.argument("hasm", type=_IN_FILE)
@click.option("--variant", type=_VARIANTS, default=None,
              help="Disassembly dialect; autodetected when omitted.")
@click.option("--out", "out_dir", type=_OUT_DIR, default=None,
              help="Directory for the .uir dump (and descriptor maps).")
@click.option("--dump-descriptors", is_flag=True,
              help="Also write per-instruction register descriptor maps.")
@click.pass_context
def lift(ctx, hasm: Path, variant: str | None, out_dir: Path | None,
         dump_descriptors: bool) -> None:
    """Lift one disassembly file into the unified IR and validate it."""
    program = _load_program(hasm, variant)
    lifted = lift_program(program)

    failures = []
    for method in lifted.ir:
        result = validate_body(method)
        for v in result.violations:
            failures.append({"method": method.sig.render(),
                             "statementIndex": v.statementIndex,
                             "rule": v.code, "detail": v.detail})

    truncation = detect_truncated_literals(program)
    artifacts = {}
    if out_dir is not None:
        stem = hasm.stem
        artifacts["uir"] = _write(out_dir, stem + ".uir", print_ir(lifted.ir))
        if dump_descriptors:
            artifacts["descriptors"] = _write(
                out_dir, stem + ".descriptors.json",
                json.dumps(_descriptor_doc(lifted), indent=2, sort_keys=True)
                + "\n")

    doc = _report(
        "lift",
        {"hasm": hasm.name, "variant": variant or "auto",
         "dumpDescriptors": dump_descriptors},
        methods=len(lifted.ir),
        statements=sum(len(m.statements) for m in lifted.ir),
        callSites=len(lifted.call_sites),
        validationFailures=len(failures),
        violations=failures,
        liftWarnings=[dataclasses.asdict(w) for w in lifted.warnings],
        truncationWarnings=[dataclasses.asdict(w) for w in truncation],
        artifacts=artifacts,
    )
    _echo_report(doc)
    if failures:
        ctx.exit(3)


@main.command()
@click.argument("model", type=_IN_FILE)
def bindings(model: Path) -> None:
    """Extract native module and component bindings from a class model."""
    loaded = _load_model(model)
    found = extract_bindings(loaded)

    prop_config = dataclasses.replace(DEFAULT_CONFIG,
                                      methodAnnotation="ReactProp")
    group_config = dataclasses.replace(DEFAULT_CONFIG,
                                       methodAnnotation="ReactPropGroup")

    def prop_setters(class_name: str) -> int:
        from .javamodel import collect_react_methods
        seen = {(m.name, m.params)
                for _, m in collect_react_methods(loaded, class_name,
                                                  prop_config)}
        seen |= {(m.name, m.params)
                 for _, m in collect_react_methods(loaded, class_name,
                                                   group_config)}
        return len(seen)

    doc = _report(
        "bindings", {"model": model.name},
        moduleApiCount=len(found.modules),
        moduleMethodCount=sum(len(b.methodMap) for b in found.modules),
        componentCount=len(found.components),
        componentMethodCount=sum(prop_setters(c.className)
                                 for c in found.components),
        modules=[{"exposedName": b.exposedName, "className": b.className,
                  "kind": b.kind, "specClass": b.specClass,
                  "methods": sorted(b.methods())} for b in found.modules],
        components=[{"exposedName": c.exposedName, "className": c.className}
                    for c in found.components],
        warnings=[dataclasses.asdict(w) for w in found.warnings],
    )
    _echo_report(doc)


def _build_both(hasm: Path, model: Path | None, variant: str | None,
                roots: str, builtins: Path | None):
    lifted = lift_program(_load_program(hasm, variant))
    loaded = _load_model(model)
    opts_on = _graph_options(True, roots, builtins)
    opts_off = dataclasses.replace(opts_on, withBridge=False)
    try:
        bridged = build_callgraph(lifted, loaded, opts_on)
        plain = build_callgraph(lifted, loaded, opts_off)
    except IrError as exc:
        raise InputError(str(exc)) from exc
    return lifted, bridged, plain


@main.command()
@click.argument("hasm", type=_IN_FILE)
@click.argument("model", type=_IN_FILE, required=False)
@click.option("--variant", type=_VARIANTS, default=None,
              help="Disassembly dialect; autodetected when omitted.")
@click.option("--with-bridge/--no-bridge", "with_bridge", default=True,
              show_default=True,
              help="Which of the two graphs to export; both are computed "
                   "for the delta report.")
@click.option("--roots", default="", help="Comma-separated Java root class "
                                          "markers (name or suffix).")
@click.option("--builtins", type=_IN_FILE, default=None,
              help="JSON array overriding the builtin callee catalog.")
@click.option("--format", "fmt", type=click.Choice(["json", "dot"]),
              default="json", show_default=True)
@click.option("--out", "out_dir", type=_OUT_DIR, default=None,
              help="Directory for the exported graph.")
def callgraph(hasm: Path, model: Path | None, variant: str | None,
              with_bridge: bool, roots: str, builtins: Path | None,
              fmt: str, out_dir: Path | None) -> None:
    """Build the unified call graph and report the bridging delta."""
    _, bridged, plain = _build_both(hasm, model, variant, roots, builtins)
    delta = diff_callgraphs(plain, bridged)
    selected = bridged if with_bridge else plain

    artifacts = {}
    if out_dir is not None:
        artifacts["graph"] = _write(out_dir, "callgraph." + fmt,
                                    export_graph(selected, fmt))

    doc = _report(
        "callgraph",
        {"hasm": hasm.name, "model": model.name if model else None,
         "variant": variant or "auto", "withBridge": with_bridge,
         "roots": roots, "format": fmt},
        withBridge={"nodes": len(bridged.nodes), "edges": len(bridged.edges)},
        withoutBridge={"nodes": len(plain.nodes), "edges": len(plain.edges)},
        delta=dataclasses.asdict(delta),
        coverage=dataclasses.asdict(selected.coverage),
        roots=list(selected.roots),
        artifacts=artifacts,
    )
    _echo_report(doc)


@main.command()
@click.argument("hasm", type=_IN_FILE)
@click.argument("model", type=_IN_FILE, required=False)
@click.option("--variant", type=_VARIANTS, default=None,
              help="Disassembly dialect; autodetected when omitted.")
@click.option("--with-bridge/--no-bridge", "with_bridge", default=True,
              show_default=True)
@click.option("--roots", default="", help="Comma-separated Java root class "
                                          "markers (name or suffix).")
@click.option("--builtins", type=_IN_FILE, default=None,
              help="JSON array overriding the builtin callee catalog.")
@click.option("--spec", "spec_path", type=_IN_FILE, default=None,
              help="Sources/sinks JSON; bundled defaults when omitted.")
@click.option("--timeout-minutes", type=float, default=30.0,
              show_default=True, help="Abort the sweep after this long and "
                                      "report partial findings.")
@click.option("--out", "out_dir", type=_OUT_DIR, default=None,
              help="Directory for the findings report.")
def taint(hasm: Path, model: Path | None, variant: str | None,
          with_bridge: bool, roots: str, builtins: Path | None,
          spec_path: Path | None, timeout_minutes: float,
          out_dir: Path | None) -> None:
    """Run source/sink reachability over the unified call graph."""
    spec = DEFAULT_SOURCES_SINKS
    if spec_path is not None:
        try:
            spec = load_sources_sinks(spec_path)
        except ValueError as exc:
            raise InputError(f"{spec_path.name}: {exc}") from exc

    _, bridged, plain = _build_both(hasm, model, variant, roots, builtins)
    graph = bridged if with_bridge else plain
    result = run_taint(graph, spec, timeout_minutes=timeout_minutes)
    breakdown = categorize_findings(result.findings)

    doc = _report(
        "taint",
        {"hasm": hasm.name, "model": model.name if model else None,
         "variant": variant or "auto", "withBridge": with_bridge,
         "roots": roots, "spec": spec_path.name if spec_path else "default",
         "timeoutMinutes": timeout_minutes},
        graph={"nodes": len(graph.nodes), "edges": len(graph.edges)},
        findings=[{
            "sourceCategory": f.sourceCategory,
            "sinkCategory": f.sinkCategory,
            "source": f.sourceSig,
            "sink": f.sinkSig,
            "sourceInvoker": f.sourceInvoker,
            "sinkInvoker": f.sinkInvoker,
            "entryPath": list(f.entryPath),
            "path": list(f.path),
            "crossesBridge": f.crossesBridge,
        } for f in result.findings],
        summary={
            "flows": [{"source": s, "sink": k, "count": n}
                      for (s, k), n in sorted(breakdown.counts.items())],
            "sankey": breakdown.sankey(),
        },
        timedOut=result.timed_out,
    )
    if out_dir is not None:
        _write(out_dir, "taint.json",
               json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _echo_report(doc)
