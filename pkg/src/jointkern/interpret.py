"""Interpretation of diagrams as joint kernels.

An Interpretation assigns a Space to every signature wire and a JointKernel
(plus residual wire labels) to every signature box. evaluate folds a valid
Markov diagram into one JointKernel by walking boxes in topological order,
routing live wires with deterministic maps and tensoring in each box's
kernel. Box ids in the result are the diagram's graph box ids, so traces of
the evaluated kernel read off the diagram directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping
from weakref import WeakKeyDictionary

from .diagrams import Diagram, Hypergraph, topological_order, validate_cd, validate_markov
from .errors import DiagramError, EvalError
from .kernels import (
    DetMap, JointKernel, compose, identity_kernel, joint_log_density,
    lift_det, rename_boxes, sample_with_trace, tensor,
)
from .spaces import Product, Space, Value, nest_product, nest_values, unnest_values

__all__ = [
    "Interpretation", "check_interpretation", "evaluate",
    "model_log_density", "sample_model", "wire_values",
]


@dataclass(eq=False)
class Interpretation:
    """Spaces for signature wires, kernels and residual labels for boxes."""

    wire_spaces: dict
    box_kernels: dict
    residual_labels: dict = field(default_factory=dict)

    def __post_init__(self):
        self.wire_spaces = dict(self.wire_spaces)
        self.box_kernels = dict(self.box_kernels)
        self.residual_labels = {
            b: tuple(ws) for b, ws in dict(self.residual_labels).items()
        }

    def space_of(self, wires) -> Space:
        return nest_product([self.wire_spaces[w] for w in wires])


def check_interpretation(sig: Hypergraph, interp: Interpretation) -> list:
    """Violations of the interpretation fitting the signature; empty if ok."""
    out = []
    for w in sig.wires:
        if w not in interp.wire_spaces:
            out.append(f"signature wire {w!r} has no space")
    for b in sig.boxes:
        if b not in interp.box_kernels:
            out.append(f"signature box {b!r} has no kernel")
            continue
        k = interp.box_kernels[b]
        if any(w not in interp.wire_spaces for w in sig.dom[b] + sig.cod[b]):
            continue
        if k.dom != interp.space_of(sig.dom[b]):
            out.append(f"box {b!r} kernel domain {k.dom!r} != its wire spaces")
        if k.cod != interp.space_of(sig.cod[b]):
            out.append(f"box {b!r} kernel codomain {k.cod!r} != its wire spaces")
        labels = interp.residual_labels.get(b, ())
        if any(w not in interp.wire_spaces for w in labels):
            out.append(f"box {b!r} residual labels use unknown wires")
        elif k.residual != interp.space_of(labels):
            out.append(
                f"box {b!r} residual {k.residual!r} != labeled space {interp.space_of(labels)!r}")
    return out


# one structural routing plan per diagram, independent of the interpretation
_PLAN_CACHE: WeakKeyDictionary = WeakKeyDictionary()
# evaluated kernels per (diagram, interpretation) pair
_KERNEL_CACHE: WeakKeyDictionary = WeakKeyDictionary()


@dataclass(frozen=True)
class _Step:
    box: str
    dom_idx: tuple        # positions in the live list feeding the box, in order
    keep_idx: tuple       # positions carried alongside the box
    dom_wires: tuple
    cod_wires: tuple
    keep_wires: tuple


@dataclass(frozen=True)
class _Plan:
    order: tuple
    steps: tuple
    out_idx: tuple        # positions of the outputs in the final live list
    final_wires: tuple


def _routing_plan(d: Diagram) -> _Plan:
    plan = _PLAN_CACHE.get(d)
    if plan is not None:
        return plan

    violations = validate_cd(d)
    if not violations:
        violations = validate_markov(d)
    if violations:
        raise DiagramError("diagram is not a valid Markov diagram", violations)

    g = d.graph
    order = tuple(topological_order(d))
    needed_after = {}
    needed = set(d.outputs)
    for b in reversed(order):
        needed_after[b] = frozenset(needed)
        needed.update(g.dom[b])

    live = list(d.inputs)
    steps = []
    for b in order:
        pos = {w: i for i, w in enumerate(live)}
        for w in g.dom[b]:
            if w not in pos:
                raise EvalError(
                    f"wire {w!r} consumed by box {b!r} is never produced")
        keep = tuple(w for w in live if w in needed_after[b])
        steps.append(_Step(
            box=b,
            dom_idx=tuple(pos[w] for w in g.dom[b]),
            keep_idx=tuple(pos[w] for w in keep),
            dom_wires=tuple(g.dom[b]),
            cod_wires=tuple(g.cod[b]),
            keep_wires=keep,
        ))
        live = list(g.cod[b]) + list(keep)

    pos = {w: i for i, w in enumerate(live)}
    for w in d.outputs:
        if w not in pos:
            raise EvalError(f"output wire {w!r} is never produced")
    plan = _Plan(order, tuple(steps), tuple(pos[w] for w in d.outputs), tuple(live))
    _PLAN_CACHE[d] = plan
    return plan


def _renamed_box_kernel(k: JointKernel, graph_id: str) -> JointKernel:
    ids = k.box_ids
    if not ids:
        return k
    if len(ids) == 1:
        return rename_boxes(k, {ids[0]: graph_id})
    return rename_boxes(k, {i: f"{graph_id}.{i}" for i in ids})


def evaluate(d: Diagram, interp: Interpretation) -> JointKernel:
    """Fold a Markov diagram into a JointKernel under an interpretation.

    The result's domain/codomain are the products of the input/output wire
    spaces; its trace is keyed by graph box ids (inner ids of composite box
    kernels are prefixed with the graph id). Results are cached per
    (diagram, interpretation).
    """
    per_interp = _KERNEL_CACHE.get(d)
    if per_interp is None:
        per_interp = WeakKeyDictionary()
        _KERNEL_CACHE[d] = per_interp
    cached = per_interp.get(interp)
    if cached is not None:
        return cached

    plan = _routing_plan(d)
    g = d.graph

    def wire_space(w) -> Space:
        lab = d.wire_label[w]
        if lab not in interp.wire_spaces:
            raise EvalError(f"no space for signature wire {lab!r}")
        return interp.wire_spaces[lab]

    def packed(ws) -> Space:
        return nest_product([wire_space(w) for w in ws])

    def box_kernel(b) -> JointKernel:
        lab = d.box_label[b]
        if lab not in interp.box_kernels:
            raise EvalError(f"no kernel for signature box {lab!r}")
        k = interp.box_kernels[lab]
        if k.dom != packed(g.dom[b]):
            raise EvalError(
                f"box {b!r} kernel domain {k.dom!r} != wire spaces {packed(g.dom[b])!r}")
        if k.cod != packed(g.cod[b]):
            raise EvalError(
                f"box {b!r} kernel codomain {k.cod!r} != wire spaces {packed(g.cod[b])!r}")
        return _renamed_box_kernel(k, b)

    live = tuple(d.inputs)
    acc = identity_kernel(packed(live))
    for step in plan.steps:
        n_live = len(live)
        live_space = packed(live)
        dom_space = packed(step.dom_wires)
        keep_space = packed(step.keep_wires)
        cod_space = packed(step.cod_wires)

        def route_fn(v, _n=n_live, _di=step.dom_idx, _ki=step.keep_idx):
            vals = unnest_values(v, _n)
            return (nest_values([vals[i] for i in _di]),
                    nest_values([vals[i] for i in _ki]))

        route = lift_det(DetMap(
            live_space, Product(dom_space, keep_space), route_fn, "route"))

        kb = box_kernel(step.box)
        stage = compose(route, tensor(kb, identity_kernel(keep_space)))

        n_cod, n_keep = len(step.cod_wires), len(step.keep_wires)

        def repack_fn(v, _nc=n_cod, _nk=n_keep):
            return nest_values(unnest_values(v[0], _nc) + unnest_values(v[1], _nk))

        new_live = step.cod_wires + step.keep_wires
        repack = lift_det(DetMap(
            Product(cod_space, keep_space), packed(new_live), repack_fn, "repack"))
        acc = compose(acc, compose(stage, repack))
        live = new_live

    def out_fn(v, _n=len(live), _oi=plan.out_idx):
        vals = unnest_values(v, _n)
        return nest_values([vals[i] for i in _oi])

    acc = compose(acc, lift_det(DetMap(packed(live), packed(d.outputs), out_fn, "outputs")))
    per_interp[interp] = acc
    return acc


def wire_values(d: Diagram, interp: Interpretation, inputs: Value, t) -> dict:
    """Replay every wire's value from a full trace and the diagram inputs."""
    plan = _routing_plan(d)
    g = d.graph
    vals = dict(zip(d.inputs, unnest_values(inputs, len(d.inputs))))
    for b in plan.order:
        dom_v = nest_values([vals[w] for w in g.dom[b]])
        kb = _renamed_box_kernel(interp.box_kernels[d.box_label[b]], b)
        out = kb.mech(t, dom_v)
        for w, v in zip(g.cod[b], unnest_values(out, len(g.cod[b]))):
            vals[w] = v
    return vals


def model_log_density(d: Diagram, interp: Interpretation, inputs: Value, t) -> float:
    """Log density of a full trace of the interpreted model."""
    return joint_log_density(evaluate(d, interp), inputs, t)


def sample_model(d: Diagram, interp: Interpretation, inputs: Value, seed: int):
    """One seeded (trace, output) draw from the interpreted model."""
    return sample_with_trace(evaluate(d, interp), inputs, seed)
