"""
02_string_diagrams.py

Wiring diagrams separate the *shape* of a model from its probabilistic
content. A diagram is a hypergraph of boxes and wires together with a
labeling into a signature; interpretations attach spaces to wire labels
and kernels to box labels later (demo 03 does that part).

This file builds diagrams by hand, validates them, composes them, and
shows how composition garbage-collects boxes whose outputs are discarded.
"""

from jointkern import (
    Diagram, HypMorphism, Hypergraph, compose_diagrams, diagram_structure,
    export_dot, gc_fixpoint, tensor_diagrams, topological_order, validate_cd,
    validate_markov,
)

# One signature, reused by every diagram below. Labels say what a box
# *could* be; wires carry type labels.
sig = Hypergraph(
    wires=("B",),
    boxes=("src", "f1"),
    dom={"src": (), "f1": ("B",)},
    cod={"src": ("B",), "f1": ("B",)},
)

# A two-box chain: src emits x, f1 turns x into y, y is the output.
chain = Diagram(
    graph=Hypergraph(("x", "y"), ("s", "g"),
                     {"s": (), "g": ("x",)},
                     {"s": ("x",), "g": ("y",)}),
    signature=sig,
    labeling=HypMorphism({"x": "B", "y": "B"}, {"s": "src", "g": "f1"}),
    inputs=(),
    outputs=("y",),
)

# validate_cd covers wiring sanity (morphism, single producers, acyclic);
# validate_markov adds the no-discard rule on top.
ok = validate_cd(chain) == [] and validate_markov(chain) == []
print("chain validates as a Markov diagram:", ok)
print("topological order:", topological_order(chain))

# Dangling outputs are rejected in Markov mode. Drop the output list and
# the boxes' products go nowhere.
leaky = Diagram(chain.graph, sig, chain.labeling, (), ())
print("\nviolations when outputs dangle:")
for v in validate_markov(leaky):
    print("  -", v)

# A post-processing stage with one input and one output.
stage = Diagram(
    graph=Hypergraph(("i", "o"), ("h",), {"h": ("i",)}, {"h": ("o",)}),
    signature=sig,
    labeling=HypMorphism({"i": "B", "o": "B"}, {"h": "f1"}),
    inputs=("i",),
    outputs=("o",),
)

comp = compose_diagrams(chain, stage)
print("\nchain ; stage has boxes", comp.graph.boxes,
      "and outputs", comp.outputs)

# Composing with a diagram that discards its input deletes the whole
# upstream chain: nothing downstream observes it, so gc removes it.
sink = Diagram(
    graph=Hypergraph(("i",), (), {}, {}),
    signature=sig,
    labeling=HypMorphism({"i": "B"}, {}),
    inputs=("i",),
    outputs=(),
)
gone = compose_diagrams(chain, sink)
print("\nchain ; discard leaves boxes:", gone.graph.boxes)
print("gc is a fixpoint:",
      diagram_structure(gc_fixpoint(gone)) == diagram_structure(gone))

# Tensoring places diagrams side by side. Box and wire ids from the
# second copy are freshened automatically.
side = tensor_diagrams(stage, stage)
print("\nstage x stage consumes inputs typed", side.input_types(),
      "via boxes", side.graph.boxes)

# Diagrams render to graphviz for inspection.
print("\ndot output for the chain:")
print(export_dot(chain))

# Wiring mistakes come back as a list of violations, one per problem.
cyclic = Hypergraph(("x", "y"), ("p", "q"),
                    {"p": ("y",), "q": ("x",)},
                    {"p": ("x",), "q": ("y",)})
bad = Diagram(cyclic, sig,
              HypMorphism({"x": "B", "y": "B"}, {"p": "f1", "q": "f1"}),
              (), ())
print("\nvalidating a cyclic wiring:")
for v in validate_cd(bad) + validate_markov(bad):
    print("  -", v)
