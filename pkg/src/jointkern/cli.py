"""Command-line surface.

    jointkern validate MODEL
    jointkern sample MODEL --n N [--seed S] [--input J] [--out FILE]
    jointkern logpdf MODEL --trace FILE [--input J]
    jointkern do MODEL --set box=value ... COMMAND [flags]
    jointkern cf MODEL --u FILE [--set box=value ...] [--input J]
    jointkern abduct MODEL --trace FILE [--input J] [--out FILE]
    jointkern spw MODEL [--n N] [--seed S] [--h EXPR ...] [--ref X ...]
    jointkern cover MODEL [--count N] [--point J]
    jointkern export-dot MODEL [--out FILE]

Exit codes: 0 success, 1 audit failure, 2 I/O or usage, 3 syntax,
4 shape/type, 5 diagram validation. The JOINTKERN_SEED environment variable
supplies the default seed. Trace records are JSON lines with reals printed
at 17 significant digits, so reruns with a fixed seed are byte-identical
and logpdf round-trips exactly.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .causal import abduct_trace, counterfactual, intervene
from .diagrams import export_dot
from .errors import (
    DiagramError, ExprSyntaxError, ModelSyntaxError, ShapeError,
)
from .expr import compile_det_map
from .interpret import Interpretation, evaluate
from .kernels import joint_log_density, sample_with_trace
from .model import (
    Model, descriptor_to_json, parse_model, render_json, value_from_jsonable,
    value_to_jsonable,
)
from .rng import derive_seed
from .spaces import (
    Real, UNIT_VALUE, base_measure_mass, cover_index_bound, sigma_finite_cover,
)
from .weighted import spw_check

__all__ = ["main"]


def _default_seed() -> int:
    try:
        return int(os.environ.get("JOINTKERN_SEED", "0"))
    except ValueError:
        return 0


def _out(text: str):
    sys.stdout.write(text)


def _decode_input(model: Model, text: str | None):
    if not model.diagram.inputs:
        return UNIT_VALUE
    if text is None:
        raise ShapeError("this model has global inputs; pass --input")
    try:
        j = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelSyntaxError(f"--input is not valid JSON: {e}") from None
    return value_from_jsonable(model.input_space, j)


def _parse_do(model: Model, interp: Interpretation, settings) -> dict:
    """--set entries name graph boxes (or signature boxes directly)."""
    do = {}
    sig = model.signature
    labels = model.diagram.box_label
    for item in settings or []:
        if "=" not in item:
            raise ShapeError(f"--set needs box=value, got {item!r}")
        name, _, text = item.partition("=")
        if name in labels:
            sig_box = labels[name]
            occurrences = [b for b in labels if labels[b] == sig_box]
            if len(occurrences) > 1:
                raise ShapeError(
                    f"box {name!r} shares generator {sig_box!r} with {occurrences}; "
                    f"intervene on the generator name instead")
        elif name in set(sig.boxes):
            sig_box = name
        else:
            raise ShapeError(f"unknown box {name!r} in --set")
        space = interp.space_of(sig.cod[sig_box])
        try:
            j = json.loads(text)
        except json.JSONDecodeError as e:
            raise ShapeError(f"bad value in --set {item!r}: {e}") from None
        do[sig_box] = value_from_jsonable(space, j)
    return do


def _read_jsonl(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as e:
                raise ModelSyntaxError(f"{path}:{line_no}: not valid JSON: {e}") from None


def _trace_spaces(kernel) -> dict:
    return {b.box_id: b.primitive.cod for b in kernel.boxes}


def _decode_trace(kernel, j) -> dict:
    if not isinstance(j, dict) or "trace" not in j:
        raise ModelSyntaxError('trace records need a "trace" field')
    spaces = _trace_spaces(kernel)
    raw = j["trace"]
    if not isinstance(raw, dict):
        raise ModelSyntaxError("trace must be an object")
    unknown = [b for b in raw if b not in spaces]
    if unknown:
        raise ShapeError(f"trace has unknown boxes {unknown}")
    return {b: value_from_jsonable(spaces[b], raw[b]) for b in raw}


def _record(kernel, z, t, x) -> dict:
    return {
        "trace": {b: value_to_jsonable(v) for b, v in t.items()},
        "output": value_to_jsonable(x),
        "logpdf": joint_log_density(kernel, z, t),
    }


# ---------------------------------------------------------------------------
# subcommands


def _run_validate(model: Model, interp: Interpretation, ns) -> int:
    _out("OK\n")
    return 0


def _run_sample(model: Model, interp: Interpretation, ns) -> int:
    k = evaluate(model.diagram, interp)
    z = _decode_input(model, ns.input)
    seed = ns.seed if ns.seed is not None else _default_seed()
    lines = []
    for i in range(ns.n):
        t, x = sample_with_trace(k, z, derive_seed(seed, i))
        lines.append(render_json(_record(k, z, t, x)))
    text = "".join(line + "\n" for line in lines)
    if ns.out:
        with open(ns.out, "a", encoding="utf-8") as fh:
            fh.write(text)
    else:
        _out(text)
    return 0


def _run_logpdf(model: Model, interp: Interpretation, ns) -> int:
    k = evaluate(model.diagram, interp)
    z = _decode_input(model, ns.input)
    for rec in _read_jsonl(ns.trace):
        t = _decode_trace(k, rec)
        _out("%.17g\n" % joint_log_density(k, z, t))
    return 0


def _run_cf(model: Model, interp: Interpretation, ns) -> int:
    do = _parse_do(model, interp, ns.set)
    z = _decode_input(model, ns.input)
    for uj in _read_jsonl(ns.u):
        if not isinstance(uj, dict):
            raise ModelSyntaxError("u records must be objects box -> [floats]")
        u = {}
        for b, block in uj.items():
            if not isinstance(block, list):
                raise ModelSyntaxError(f"u for {b!r} must be a list of floats")
            u[b] = [float(x) for x in block]
        t, x = counterfactual(model.diagram, interp, do, u, z)
        _out(render_json({
            "trace": {b: value_to_jsonable(v) for b, v in t.items()},
            "output": value_to_jsonable(x),
        }) + "\n")
    return 0


def _run_abduct(model: Model, interp: Interpretation, ns) -> int:
    k = evaluate(model.diagram, interp)
    z = _decode_input(model, ns.input)
    lines = []
    for rec in _read_jsonl(ns.trace):
        t = _decode_trace(k, rec)
        u = abduct_trace(model.diagram, interp, z, t)
        lines.append(render_json({b: list(block) for b, block in u.items()}))
    text = "".join(line + "\n" for line in lines)
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        _out(text)
    return 0


def _run_spw(model: Model, interp: Interpretation, ns) -> int:
    wk = model.weighted_kernel(interp)
    out_wires = model.diagram.outputs
    slot_spaces = [interp.wire_spaces[model.diagram.wire_label[w]] for w in out_wires]
    exprs = ns.h or ["$0"]
    tests = [compile_det_map([e], slot_spaces, [Real(1)], name=e) for e in exprs]
    refs = [float(r) for r in ns.ref] if ns.ref else None
    seed = ns.seed if ns.seed is not None else _default_seed()
    report = spw_check(wk, tests, refs, ns.n, seed)
    for e, row in zip(exprs, report):
        row["h"] = e
    _out(render_json(report) + "\n")
    return 0 if all(row["pass"] for row in report) else 1


def _run_cover(model: Model, interp: Interpretation, ns) -> int:
    space = model.output_space
    if ns.point is not None:
        try:
            j = json.loads(ns.point)
        except json.JSONDecodeError as e:
            raise ShapeError(f"bad --point: {e}") from None
        v = value_from_jsonable(space, j)
        _out(render_json({
            "point": value_to_jsonable(v),
            "index": cover_index_bound(space, v),
        }) + "\n")
        return 0
    for i in range(ns.count):
        desc = sigma_finite_cover(space, i)
        _out(render_json({
            "index": i,
            "mass": base_measure_mass(space, desc),
            "piece": descriptor_to_json(desc),
        }) + "\n")
    return 0


def _run_export_dot(model: Model, interp: Interpretation, ns) -> int:
    text = export_dot(model.diagram)
    if ns.out:
        with open(ns.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        _out(text)
    return 0


# ---------------------------------------------------------------------------
# argument plumbing


def _model_arg(parser: argparse.ArgumentParser, with_model: bool):
    if with_model:
        parser.add_argument("model", help="model file (JSON)")


def _conf_validate(p, with_model=True):
    _model_arg(p, with_model)


def _conf_sample(p, with_model=True):
    _model_arg(p, with_model)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--input", default=None)
    p.add_argument("--out", default=None, help="append records to this file")


def _conf_logpdf(p, with_model=True):
    _model_arg(p, with_model)
    p.add_argument("--trace", required=True)
    p.add_argument("--input", default=None)


def _conf_cf(p, with_model=True):
    _model_arg(p, with_model)
    p.add_argument("--u", required=True)
    p.add_argument("--set", action="append", default=[])
    p.add_argument("--input", default=None)


def _conf_abduct(p, with_model=True):
    _model_arg(p, with_model)
    p.add_argument("--trace", required=True)
    p.add_argument("--input", default=None)
    p.add_argument("--out", default=None)


def _conf_spw(p, with_model=True):
    _model_arg(p, with_model)
    p.add_argument("--n", type=int, default=100000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--h", action="append", default=[],
                   help="test function over the output wires (default $0)")
    p.add_argument("--ref", action="append", default=[],
                   help="reference value per --h (default: exact enumeration)")


def _conf_cover(p, with_model=True):
    _model_arg(p, with_model)
    p.add_argument("--count", type=int, default=5)
    p.add_argument("--point", default=None)


def _conf_export_dot(p, with_model=True):
    _model_arg(p, with_model)
    p.add_argument("--out", default=None)


_COMMANDS = {
    "validate": (_conf_validate, _run_validate),
    "sample": (_conf_sample, _run_sample),
    "logpdf": (_conf_logpdf, _run_logpdf),
    "cf": (_conf_cf, _run_cf),
    "abduct": (_conf_abduct, _run_abduct),
    "spw": (_conf_spw, _run_spw),
    "cover": (_conf_cover, _run_cover),
    "export-dot": (_conf_export_dot, _run_export_dot),
}

_USAGE = """usage: jointkern COMMAND MODEL [flags]

commands:
  validate    parse and check a model file
  sample      draw seeded trace records (JSON lines)
  logpdf      log-density of each record in a trace file
  do          intervene, then run another command: do MODEL --set box=value COMMAND ...
  cf          counterfactual replay from a u-assignment file
  abduct      recover u-assignments from trace records
  spw         strict-proper-weighting audit
  cover       enumerate sigma-finite cover pieces of the output space
  export-dot  render the diagram as graphviz

run jointkern COMMAND -h for per-command flags.
"""


class _UsageError(Exception):
    pass


def _split_do(tokens: list, need_model: bool):
    """Peel --set pairs (and the model path) off a `do` invocation.

    Everything from the first non-flag token after the model is the nested
    command, so nested flags never collide with do's own --set.
    """
    sets, model, i = [], None, 0
    while i < len(tokens):
        tok = tokens[i]
        if tok == "--set":
            if i + 1 >= len(tokens):
                raise _UsageError("--set needs box=value")
            sets.append(tokens[i + 1])
            i += 2
        elif tok.startswith("--set="):
            sets.append(tok[len("--set="):])
            i += 1
        elif need_model and model is None:
            model = tok
            i += 1
        else:
            return model, sets, tokens[i:]
    return model, sets, []


def _run_tokens(tokens: list, model: Model | None, interp: Interpretation | None) -> int:
    if not tokens:
        raise _UsageError("a command is required")
    cmd, rest = tokens[0], tokens[1:]
    if cmd == "do":
        path, sets, sub = _split_do(rest, need_model=model is None)
        if model is None:
            if path is None:
                raise _UsageError("do needs a model file")
            model = parse_model(path)
            interp = model.interpretation
        if not sub:
            raise _UsageError("do needs a command to run on the surgered model")
        surgered = intervene(model.diagram, interp, _parse_do(model, interp, sets))
        return _run_tokens(sub, model, surgered)
    if cmd not in _COMMANDS:
        raise _UsageError(f"unknown command {cmd!r}")
    configure, run = _COMMANDS[cmd]
    parser = argparse.ArgumentParser(prog=f"jointkern {cmd}")
    configure(parser, with_model=model is None)
    ns = parser.parse_args(rest)
    if model is None:
        model = parse_model(ns.model)
        interp = model.interpretation
    return run(model, interp, ns)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        _out(_USAGE)
        return 0 if argv else 2
    try:
        return _run_tokens(argv, None, None)
    except _UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        print(_USAGE, file=sys.stderr, end="")
        return 2
    except (ModelSyntaxError, ExprSyntaxError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except DiagramError as e:
        print(f"error: {e}", file=sys.stderr)
        for v in e.violations:
            print(f"  - {v}", file=sys.stderr)
        return 5
    except ShapeError as e:
        print(f"error: {e}", file=sys.stderr)
        return 4
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
