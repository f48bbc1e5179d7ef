"""Diagram syntax: finite hypergraphs, labeled cospans, and their category ops.

A Diagram is a finite acyclic hypergraph whose boxes and wires are labeled
into a signature, together with input and output wire lists (the legs of a
cospan). Well-formedness is checked by validate_cd (acyclic, at most one
starting place per wire, labeling a genuine hypergraph morphism) and
validate_markov (every box output consumed onward). Composition glues
outputs to inputs by union-find and, in Markov mode, garbage-collects boxes
whose outputs are all discarded until a fixed point.

Diagrams are immutable values; all operations return fresh diagrams.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping

from .errors import DiagramError

__all__ = [
    "Hypergraph", "Signature", "HypMorphism", "Diagram",
    "check_morphism", "validate_cd", "validate_markov",
    "compose_diagrams", "tensor_diagrams", "is_causal_model",
    "topological_order", "gc_fixpoint", "canonical_relabel",
    "diagram_structure", "diagrams_isomorphic", "export_dot",
]


@dataclass(frozen=True)
class Hypergraph:
    """Wires, boxes, and per-box dom/cod wire lists. Do not mutate the dicts."""

    wires: tuple
    boxes: tuple
    dom: Mapping
    cod: Mapping

    def __init__(self, wires, boxes, dom, cod):
        object.__setattr__(self, "wires", tuple(wires))
        object.__setattr__(self, "boxes", tuple(boxes))
        object.__setattr__(self, "dom", {b: tuple(ws) for b, ws in dom.items()})
        object.__setattr__(self, "cod", {b: tuple(ws) for b, ws in cod.items()})
        wire_set = set(self.wires)
        box_set = set(self.boxes)
        if len(wire_set) != len(self.wires):
            raise DiagramError("duplicate wire ids", [])
        if len(box_set) != len(self.boxes):
            raise DiagramError("duplicate box ids", [])
        for name, table in (("dom", self.dom), ("cod", self.cod)):
            if set(table) != box_set:
                raise DiagramError(f"{name} table keys differ from box list", [])
            for b, ws in table.items():
                for w in ws:
                    if w not in wire_set:
                        raise DiagramError(f"box {b!r} {name} uses unknown wire {w!r}", [])

    def producers(self):
        """wire -> list of boxes having it as an output."""
        out = {w: [] for w in self.wires}
        for b in self.boxes:
            for w in self.cod[b]:
                out[w].append(b)
        return out

    def consumers(self):
        """wire -> list of boxes having it as an input (with multiplicity)."""
        out = {w: [] for w in self.wires}
        for b in self.boxes:
            for w in self.dom[b]:
                out[w].append(b)
        return out


Signature = Hypergraph


@dataclass(frozen=True)
class HypMorphism:
    """Wire map and box map between hypergraphs."""

    wire_map: Mapping
    box_map: Mapping

    def __init__(self, wire_map, box_map):
        object.__setattr__(self, "wire_map", dict(wire_map))
        object.__setattr__(self, "box_map", dict(box_map))


def check_morphism(src: Hypergraph, dst: Hypergraph, m: HypMorphism) -> list:
    """Violations of m being a hypergraph morphism src -> dst; empty if valid."""
    out = []
    dst_wires = set(dst.wires)
    dst_boxes = set(dst.boxes)
    for w in src.wires:
        if w not in m.wire_map:
            out.append(f"wire {w!r} is unmapped")
        elif m.wire_map[w] not in dst_wires:
            out.append(f"wire {w!r} maps to unknown wire {m.wire_map[w]!r}")
    for b in src.boxes:
        if b not in m.box_map:
            out.append(f"box {b!r} is unmapped")
            continue
        tb = m.box_map[b]
        if tb not in dst_boxes:
            out.append(f"box {b!r} maps to unknown box {tb!r}")
            continue
        for side, table in (("dom", "dom"), ("cod", "cod")):
            want = getattr(dst, table)[tb]
            have = tuple(m.wire_map.get(w) for w in getattr(src, table)[b])
            if have != want:
                out.append(
                    f"box {b!r} {side} maps to {have!r} but {tb!r} has {want!r}")
    return out


@dataclass(eq=False)
class Diagram:
    """Labeled cospan: inputs -> graph <- outputs over a signature."""

    graph: Hypergraph
    signature: Hypergraph
    labeling: HypMorphism
    inputs: tuple
    outputs: tuple

    def __post_init__(self):
        self.inputs = tuple(self.inputs)
        self.outputs = tuple(self.outputs)

    @property
    def wire_label(self) -> Mapping:
        return self.labeling.wire_map

    @property
    def box_label(self) -> Mapping:
        return self.labeling.box_map

    def input_types(self) -> tuple:
        return tuple(self.wire_label[w] for w in self.inputs)

    def output_types(self) -> tuple:
        return tuple(self.wire_label[w] for w in self.outputs)


def validate_cd(d: Diagram) -> list:
    """Violations of copy/delete well-formedness; empty means valid.

    Checks leg wires exist, the labeling is a morphism into the signature,
    every wire has at most one starting place, and the box graph is acyclic.
    """
    out = []
    g = d.graph
    wire_set = set(g.wires)
    for leg, ws in (("input", d.inputs), ("output", d.outputs)):
        for w in ws:
            if w not in wire_set:
                out.append(f"{leg} leg references unknown wire {w!r}")
    out.extend(check_morphism(g, d.signature, d.labeling))

    starts = {w: 0 for w in g.wires}
    for w in d.inputs:
        if w in starts:
            starts[w] += 1
    for b in g.boxes:
        for w in g.cod[b]:
            starts[w] += 1
    for w in g.wires:
        if starts[w] > 1:
            out.append(f"wire {w!r} has {starts[w]} starting places")

    cyclic = _kahn_leftover(g)
    if cyclic:
        members = set(cyclic)
        wires = sorted({
            w for b in cyclic for w in g.dom[b]
            for c in members if w in g.cod[c]
        })
        out.append(f"cycle among boxes {sorted(cyclic)} through wires {wires}")
    return out


def validate_markov(d: Diagram) -> list:
    """Violations of the Markov rule: every box output is consumed onward."""
    g = d.graph
    consumed = set(d.outputs)
    for b in g.boxes:
        consumed.update(g.dom[b])
    out = []
    for b in g.boxes:
        for w in g.cod[b]:
            if w not in consumed:
                out.append(f"output wire {w!r} of box {b!r} is discarded")
    return out


def is_causal_model(d: Diagram) -> bool:
    """True iff the output leg repeats no wire. Assumes d validates as Markov."""
    return len(set(d.outputs)) == len(d.outputs)


def _kahn_leftover(g: Hypergraph):
    """Box ids left unordered by Kahn's algorithm (nonempty iff cyclic)."""
    order, leftover = _kahn(g)
    return leftover


def _kahn(g: Hypergraph):
    producer = {}
    for b in g.boxes:
        for w in g.cod[b]:
            producer.setdefault(w, b)
    edges = set()
    for b in g.boxes:
        for w in g.dom[b]:
            c = producer.get(w)
            if c is not None and c != b:
                edges.add((c, b))
            elif c == b:
                edges.add((b, b))
    indeg = {b: 0 for b in g.boxes}
    succ = {b: [] for b in g.boxes}
    for c, b in edges:
        indeg[b] += 1
        succ[c].append(b)
    ready = [b for b in g.boxes if indeg[b] == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        b = heapq.heappop(ready)
        order.append(b)
        for nxt in succ[b]:
            indeg[nxt] -= 1
            if indeg[nxt] == 0:
                heapq.heappush(ready, nxt)
    leftover = [b for b in g.boxes if indeg[b] > 0]
    return order, leftover


def topological_order(d: Diagram) -> list:
    """Box ids, producers before consumers, ties broken by id order."""
    order, leftover = _kahn(d.graph)
    if leftover:
        raise DiagramError("diagram has a cycle", [f"cycle among boxes {sorted(leftover)}"])
    return order


def _fresh(base, taken):
    if base not in taken:
        return base
    i = 2
    while f"{base}_{i}" in taken:
        i += 1
    return f"{base}_{i}"


def _require_valid(d: Diagram, mode: str, which: str):
    v = validate_cd(d)
    if not v and mode == "markov":
        v = validate_markov(d)
    if v:
        raise DiagramError(f"{which} fails {mode} validation", v)


def compose_diagrams(d1: Diagram, d2: Diagram, mode: str = "markov") -> Diagram:
    """Glue d1's outputs to d2's inputs; Markov mode garbage-collects.

    mode is "cd" or "markov". Requires equal signatures, matching arity and
    boundary types, and both diagrams valid in the given mode. In Markov
    mode, boxes all of whose outputs end up discarded are deleted repeatedly
    until none remain, then unreferenced wires are dropped.
    """
    if mode not in ("cd", "markov"):
        raise DiagramError(f"unknown composition mode {mode!r}", [])
    if d1.signature != d2.signature:
        raise DiagramError("diagrams are over different signatures", [])
    if len(d1.outputs) != len(d2.inputs):
        raise DiagramError(
            f"arity mismatch: {len(d1.outputs)} outputs vs {len(d2.inputs)} inputs", [])
    mism = [
        f"boundary slot {i}: {d1.wire_label[a]!r} vs {d2.wire_label[b]!r}"
        for i, (a, b) in enumerate(zip(d1.outputs, d2.inputs))
        if d1.wire_label[a] != d2.wire_label[b]
    ]
    if mism:
        raise DiagramError("boundary types do not match", mism)
    _require_valid(d1, mode, "left diagram")
    _require_valid(d2, mode, "right diagram")

    g1, g2 = d1.graph, d2.graph
    wire_taken = set(g1.wires)
    w2_new = {}
    for w in g2.wires:
        w2_new[w] = _fresh(w, wire_taken)
        wire_taken.add(w2_new[w])
    box_taken = set(g1.boxes)
    b2_new = {}
    for b in g2.boxes:
        b2_new[b] = _fresh(b, box_taken)
        box_taken.add(b2_new[b])

    # union-find over the combined wire ids; d1 wires win as representatives
    parent = {}

    def find(w):
        root = w
        while parent.get(root, root) != root:
            root = parent[root]
        while parent.get(w, w) != w:
            parent[w], w = root, parent[w]
        return root

    g1_wires = set(g1.wires)
    for a, b in zip(d1.outputs, d2.inputs):
        ra, rb = find(a), find(w2_new[b])
        if ra != rb:
            # keep the d1-side id as the class representative
            if rb in g1_wires:
                ra, rb = rb, ra
            parent[rb] = ra

    wires = list(g1.wires)
    for w in g2.wires:
        if find(w2_new[w]) == w2_new[w]:
            wires.append(w2_new[w])

    boxes = list(g1.boxes) + [b2_new[b] for b in g2.boxes]
    dom = {b: g1.dom[b] for b in g1.boxes}
    cod = {b: g1.cod[b] for b in g1.boxes}
    for b in g2.boxes:
        dom[b2_new[b]] = tuple(find(w2_new[w]) for w in g2.dom[b])
        cod[b2_new[b]] = tuple(find(w2_new[w]) for w in g2.cod[b])

    wire_map = {w: d1.wire_label[w] for w in g1.wires}
    box_map = {b: d1.box_label[b] for b in g1.boxes}
    for w in g2.wires:
        wire_map[find(w2_new[w])] = d2.wire_label[w]
    for b in g2.boxes:
        box_map[b2_new[b]] = d2.box_label[b]
    wire_map = {w: wire_map[w] for w in wires}

    composite = Diagram(
        graph=Hypergraph(wires, boxes, dom, cod),
        signature=d1.signature,
        labeling=HypMorphism(wire_map, box_map),
        inputs=d1.inputs,
        outputs=tuple(find(w2_new[w]) for w in d2.outputs),
    )
    if mode == "markov":
        composite = gc_fixpoint(composite)
    _require_valid(composite, mode, "composite")
    return composite


def gc_fixpoint(d: Diagram) -> Diagram:
    """Delete boxes whose outputs are all discarded, to a fixed point.

    Deleting a box can orphan its parents, so deletion iterates. Wires no
    longer referenced by a leg or a surviving box are dropped afterwards.
    """
    g = d.graph
    alive = set(g.boxes)
    while True:
        consumed = set(d.outputs)
        for b in alive:
            consumed.update(g.dom[b])
        # a box with no outputs at all is vacuously discarded: the unit
        # object is terminal, so effect boxes normalize away
        doomed = {
            b for b in alive
            if not any(w in consumed for w in g.cod[b])
        }
        if not doomed:
            break
        alive -= doomed

    boxes = tuple(b for b in g.boxes if b in alive)
    referenced = set(d.inputs) | set(d.outputs)
    for b in boxes:
        referenced.update(g.dom[b])
        referenced.update(g.cod[b])
    wires = tuple(w for w in g.wires if w in referenced)
    graph = Hypergraph(wires, boxes,
                       {b: g.dom[b] for b in boxes},
                       {b: g.cod[b] for b in boxes})
    labeling = HypMorphism({w: d.wire_label[w] for w in wires},
                           {b: d.box_label[b] for b in boxes})
    return Diagram(graph, d.signature, labeling, d.inputs, d.outputs)


def tensor_diagrams(d1: Diagram, d2: Diagram) -> Diagram:
    """Disjoint union with concatenated legs; d2's ids are freshened."""
    if d1.signature != d2.signature:
        raise DiagramError("diagrams are over different signatures", [])
    g1, g2 = d1.graph, d2.graph
    wire_taken = set(g1.wires)
    w2_new = {}
    for w in g2.wires:
        w2_new[w] = _fresh(w, wire_taken)
        wire_taken.add(w2_new[w])
    box_taken = set(g1.boxes)
    b2_new = {}
    for b in g2.boxes:
        b2_new[b] = _fresh(b, box_taken)
        box_taken.add(b2_new[b])

    wires = tuple(g1.wires) + tuple(w2_new[w] for w in g2.wires)
    boxes = tuple(g1.boxes) + tuple(b2_new[b] for b in g2.boxes)
    dom = {b: g1.dom[b] for b in g1.boxes}
    cod = {b: g1.cod[b] for b in g1.boxes}
    for b in g2.boxes:
        dom[b2_new[b]] = tuple(w2_new[w] for w in g2.dom[b])
        cod[b2_new[b]] = tuple(w2_new[w] for w in g2.cod[b])
    wire_map = {w: d1.wire_label[w] for w in g1.wires}
    wire_map.update({w2_new[w]: d2.wire_label[w] for w in g2.wires})
    box_map = {b: d1.box_label[b] for b in g1.boxes}
    box_map.update({b2_new[b]: d2.box_label[b] for b in g2.boxes})

    return Diagram(
        graph=Hypergraph(wires, boxes, dom, cod),
        signature=d1.signature,
        labeling=HypMorphism(wire_map, box_map),
        inputs=tuple(d1.inputs) + tuple(w2_new[w] for w in d2.inputs),
        outputs=tuple(d1.outputs) + tuple(w2_new[w] for w in d2.outputs),
    )


def canonical_relabel(d: Diagram) -> Diagram:
    """Rename wires/boxes into a canonical scheme for isomorphism checks.

    Boxes take b0, b1, ... in topological order (ties by original id); wires
    take w0, w1, ... in first-use order over inputs, box doms/cods in that
    box order, then outputs; untouched wires follow sorted by original id.
    """
    g = d.graph
    order = topological_order(d)
    box_new = {b: f"b{i}" for i, b in enumerate(order)}
    wire_new = {}

    def see(w):
        if w not in wire_new:
            wire_new[w] = f"w{len(wire_new)}"

    for w in d.inputs:
        see(w)
    for b in order:
        for w in g.dom[b]:
            see(w)
        for w in g.cod[b]:
            see(w)
    for w in d.outputs:
        see(w)
    for w in sorted(set(g.wires) - set(wire_new)):
        see(w)

    graph = Hypergraph(
        [f"w{i}" for i in range(len(wire_new))],
        [f"b{i}" for i in range(len(order))],
        {box_new[b]: tuple(wire_new[w] for w in g.dom[b]) for b in g.boxes},
        {box_new[b]: tuple(wire_new[w] for w in g.cod[b]) for b in g.boxes},
    )
    labeling = HypMorphism(
        {wire_new[w]: d.wire_label[w] for w in g.wires},
        {box_new[b]: d.box_label[b] for b in g.boxes},
    )
    return Diagram(graph, d.signature, labeling,
                   tuple(wire_new[w] for w in d.inputs),
                   tuple(wire_new[w] for w in d.outputs))


def diagram_structure(d: Diagram) -> tuple:
    """Hashable structural fingerprint of a diagram (ids taken literally)."""
    g = d.graph
    return (
        tuple(sorted((w, d.wire_label[w]) for w in g.wires)),
        tuple(sorted((b, d.box_label[b], g.dom[b], g.cod[b]) for b in g.boxes)),
        d.inputs,
        d.outputs,
    )


def diagrams_isomorphic(d1: Diagram, d2: Diagram) -> bool:
    """Equality after canonical relabeling; sound for GC'd diagrams whose
    original box ids induce the same tie-breaks."""
    if d1.signature != d2.signature:
        return False
    return diagram_structure(canonical_relabel(d1)) == diagram_structure(canonical_relabel(d2))


def export_dot(d: Diagram) -> str:
    """Graphviz rendering: boxes as nodes, wires as type-labeled edges."""
    g = d.graph
    producer = {}
    for b in g.boxes:
        for w in g.cod[b]:
            producer.setdefault(w, ("box", b))
    for i, w in enumerate(d.inputs):
        producer.setdefault(w, ("in", i))

    lines = ["digraph diagram {", "  rankdir=LR;"]
    for i in range(len(d.inputs)):
        lines.append(f'  "in{i}" [shape=plaintext, label="in{i}"];')
    try:
        order = topological_order(d)
    except DiagramError:
        order = list(g.boxes)
    for b in order:
        lines.append(f'  "{b}" [shape=box, label="{b}:{d.box_label[b]}"];')
    for i in range(len(d.outputs)):
        lines.append(f'  "out{i}" [shape=plaintext, label="out{i}"];')

    def src_name(w):
        kind, who = producer.get(w, (None, None))
        if kind == "box":
            return f'"{who}"'
        if kind == "in":
            return f'"in{who}"'
        return None

    edges = []
    for b in order:
        for w in g.dom[b]:
            s = src_name(w)
            if s is not None:
                edges.append(f'  {s} -> "{b}" [label="{w}:{d.wire_label[w]}"];')
    for i, w in enumerate(d.outputs):
        s = src_name(w)
        if s is not None:
            edges.append(f'  {s} -> "out{i}" [label="{w}:{d.wire_label[w]}"];')
    lines.extend(sorted(edges))
    lines.append("}")
    return "\n".join(lines) + "\n"
