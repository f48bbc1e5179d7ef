"""Joint density kernels.

A JointKernel from Z to X carries an ordered list of traced boxes (each a
primitive noise source plus a deterministic parameter map) and a deterministic
mechanism from (trace, input) to the output. Composition keeps every box: the
joint distribution over all residuals is retained rather than marginalized,
which is what makes trace densities, interventions, and counterfactual replay
possible downstream.

Traces are keyed by box id instead of nested positional tuples, so category
laws hold literally (associativity does not need re-tupling). The residual
Space is derived data: the left-nested product of the boxes' codomains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence

from .errors import ShapeError
from .rng import uniform_block
from .spaces import (
    UNIT,
    UNIT_VALUE,
    Product,
    Space,
    Value,
    check_member,
    finite_points,
    is_finite_space,
    nest_product,
    nest_values,
)

Trace = Mapping[str, Value]

NEG_INF = float("-inf")


@dataclass(frozen=True)
class DetMap:
    """A total deterministic map between spaces."""

    dom: Space
    cod: Space
    fn: Callable[[Value], Value]
    name: str = ""

    def __call__(self, v: Value) -> Value:
        return self.fn(v)


@dataclass(frozen=True)
class PrimitiveKernel:
    """A noise source: density against the base measure plus a uniform pushforward.

    log_density(z, m) is the log density of m given parameter z. pushforward
    maps a block of pushback_dim uniforms (and z) to a point of cod; abduct,
    where defined, is its right-inverse. pmf, where defined, is an exact
    rational pmf used by finite enumeration.
    """

    name: str
    dom: Space
    cod: Space
    pushback_dim: int
    log_density: Callable[[Value, Value], float]
    pushforward: Callable[[Sequence[float], Value], Value]
    abduct: Callable[[Value, Value], tuple] | None = None
    pmf: Callable[[Value, Value], Fraction] | None = None


@dataclass(frozen=True)
class TracedBox:
    """One noise source inside a kernel.

    param reconstructs the primitive's parameter from the trace built so far
    and the kernel input; it only ever reads boxes earlier in the list.
    """

    box_id: str
    primitive: PrimitiveKernel
    param: Callable[[Trace, Value], Value]


@dataclass(frozen=True)
class JointKernel:
    dom: Space
    cod: Space
    boxes: tuple[TracedBox, ...]
    mech: Callable[[Trace, Value], Value]

    @property
    def residual(self) -> Space:
        return nest_product([b.primitive.cod for b in self.boxes])

    @property
    def box_ids(self) -> tuple[str, ...]:
        return tuple(b.box_id for b in self.boxes)


# ---------------------------------------------------------------------------
# constructors


def lift_det(m: DetMap) -> JointKernel:
    """Wrap a deterministic map as a noiseless kernel (empty residual)."""
    return JointKernel(m.dom, m.cod, (), lambda t, z: m.fn(z))


def identity_kernel(a: Space) -> JointKernel:
    return lift_det(DetMap(a, a, lambda v: v, "id"))


def structure_kernel(kind: str, a: Space, b: Space | None = None) -> JointKernel:
    """The copy/delete/swap/identity structure maps as noiseless kernels."""
    if kind == "copy":
        return lift_det(DetMap(a, Product(a, a), lambda v: (v, v), "copy"))
    if kind == "delete":
        return lift_det(DetMap(a, UNIT, lambda v: UNIT_VALUE, "delete"))
    if kind == "identity":
        return identity_kernel(a)
    if kind == "swap":
        if b is None:
            raise ShapeError("swap needs both spaces")
        return lift_det(
            DetMap(Product(a, b), Product(b, a), lambda v: (v[1], v[0]), "swap")
        )
    raise ShapeError(f"unknown structure kind {kind!r}")


def from_primitive(p: PrimitiveKernel, box_id: str) -> JointKernel:
    """A single-box kernel whose output is the primitive's sample."""
    return JointKernel(
        p.dom,
        p.cod,
        (TracedBox(box_id, p, lambda t, z: z),),
        lambda t, z: t[box_id],
    )


# ---------------------------------------------------------------------------
# category structure


def _check_disjoint(a: JointKernel, b: JointKernel):
    clash = set(a.box_ids) & set(b.box_ids)
    if clash:
        raise ShapeError(f"box id collision: {sorted(clash)}")


def compose(first: JointKernel, second: JointKernel) -> JointKernel:
    """Sequential composition; second's boxes see first's output as parameter."""
    if first.cod != second.dom:
        raise ShapeError(
            f"cannot compose: first codomain {first.cod!r} != second domain {second.dom!r}"
        )
    _check_disjoint(first, second)

    def shift(box: TracedBox) -> TracedBox:
        def param(t, z, _p=box.param):
            return _p(t, first.mech(t, z))

        return TracedBox(box.box_id, box.primitive, param)

    boxes = first.boxes + tuple(shift(b) for b in second.boxes)

    def mech(t, z):
        return second.mech(t, first.mech(t, z))

    return JointKernel(first.dom, second.cod, boxes, mech)


def tensor(a: JointKernel, b: JointKernel) -> JointKernel:
    """Parallel composition on the product of domains and codomains."""
    _check_disjoint(a, b)

    def left(box: TracedBox) -> TracedBox:
        return TracedBox(box.box_id, box.primitive, lambda t, z, _p=box.param: _p(t, z[0]))

    def right(box: TracedBox) -> TracedBox:
        return TracedBox(box.box_id, box.primitive, lambda t, z, _p=box.param: _p(t, z[1]))

    return JointKernel(
        Product(a.dom, b.dom),
        Product(a.cod, b.cod),
        tuple(left(x) for x in a.boxes) + tuple(right(x) for x in b.boxes),
        lambda t, z: (a.mech(t, z[0]), b.mech(t, z[1])),
    )


class _RenamedTrace(Mapping):
    """Read-only view of a trace under a box-id renaming."""

    __slots__ = ("_trace", "_map")

    def __init__(self, trace: Trace, mapping: Mapping[str, str]):
        self._trace = trace
        self._map = mapping

    def __getitem__(self, key):
        return self._trace[self._map[key]]

    def __iter__(self):
        return iter(self._map)

    def __len__(self):
        return len(self._map)


def rename_boxes(k: JointKernel, mapping: Mapping[str, str]) -> JointKernel:
    """Rename box ids; mapping must cover all ids injectively."""
    ids = set(k.box_ids)
    if set(mapping) != ids:
        raise ShapeError("renaming must cover exactly the kernel's box ids")
    if len(set(mapping.values())) != len(mapping):
        raise ShapeError("renaming must be injective")

    def view(t):
        return _RenamedTrace(t, mapping)

    boxes = tuple(
        TracedBox(
            mapping[b.box_id],
            b.primitive,
            lambda t, z, _p=b.param: _p(view(t), z),
        )
        for b in k.boxes
    )
    return JointKernel(k.dom, k.cod, boxes, lambda t, z, _m=k.mech: _m(view(t), z))


# ---------------------------------------------------------------------------
# densities, sampling, enumeration


def _check_trace_keys(k: JointKernel, t: Trace):
    ids = k.box_ids
    missing = [b for b in ids if b not in t]
    extra = [b for b in t if b not in set(ids)]
    if missing or extra:
        raise ShapeError(f"trace key mismatch: missing {missing}, extra {extra}")


def joint_log_density(k: JointKernel, z: Value, t: Trace) -> float:
    """Log density of a full trace: the sum of per-box factors in list order.

    Each box's parameter is reconstructed by replaying the deterministic
    mechanisms against the trace, so the factors multiply to the joint
    density of the conditional product.
    """
    check_member(k.dom, z, "kernel input")
    _check_trace_keys(k, t)
    for box in k.boxes:
        check_member(box.primitive.cod, t[box.box_id], f"trace value for {box.box_id}")
    total = 0.0
    for box in k.boxes:
        par = box.param(t, z)
        ld = box.primitive.log_density(par, t[box.box_id])
        if ld == NEG_INF:
            return NEG_INF
        total += ld
    return total


def replay_with_uniforms(
    k: JointKernel, z: Value, u: Mapping[str, Sequence[float]]
) -> tuple[dict, Value]:
    """Deterministically run the kernel at fixed uniform blocks per box."""
    check_member(k.dom, z, "kernel input")
    ids = set(k.box_ids)
    missing = [b for b in k.box_ids if b not in u]
    if missing:
        raise ShapeError(f"missing uniform blocks for boxes {missing}")
    extra = [b for b in u if b not in ids]
    if extra:
        raise ShapeError(f"uniform blocks for unknown boxes {extra}")
    t: dict = {}
    for box in k.boxes:
        block = tuple(float(x) for x in u[box.box_id])
        if len(block) != box.primitive.pushback_dim:
            raise ShapeError(
                f"box {box.box_id} needs {box.primitive.pushback_dim} uniforms, got {len(block)}"
            )
        for x in block:
            if not 0.0 <= x <= 1.0:
                raise ShapeError(f"uniform {x} outside [0, 1] for box {box.box_id}")
        par = box.param(t, z)
        t[box.box_id] = box.primitive.pushforward(block, par)
    out = k.mech(t, z)
    check_member(k.cod, out, "kernel output")
    return t, out


def sample_with_trace(k: JointKernel, z: Value, seed: int) -> tuple[dict, Value]:
    """Draw one (trace, output) pair; bit-reproducible per (kernel, z, seed)."""
    u = {
        b.box_id: uniform_block(seed, b.box_id, b.primitive.pushback_dim)
        for b in k.boxes
    }
    return replay_with_uniforms(k, z, u)


def _exact_factor(p: PrimitiveKernel, par: Value, m: Value) -> Fraction:
    if p.pmf is not None:
        return p.pmf(par, m)
    ld = p.log_density(par, m)
    return Fraction(0) if ld == NEG_INF else Fraction(math.exp(ld))


def enumerate_traces(k: JointKernel, z: Value) -> Iterator[tuple[dict, Fraction]]:
    """All positive-probability traces with exact rational probabilities.

    Requires every box codomain to be finite. Probabilities are exact when
    the primitives expose exact pmfs (all finite built-ins do).
    """
    check_member(k.dom, z, "kernel input")
    for box in k.boxes:
        if not is_finite_space(box.primitive.cod):
            raise ShapeError(
                f"box {box.box_id} has non-finite codomain {box.primitive.cod!r}"
            )
    boxes = k.boxes

    def rec(i: int, t: dict, prob: Fraction):
        if i == len(boxes):
            yield dict(t), prob
            return
        box = boxes[i]
        par = box.param(t, z)
        for m in finite_points(box.primitive.cod):
            f = _exact_factor(box.primitive, par, m)
            if f == 0:
                continue
            t[box.box_id] = m
            yield from rec(i + 1, t, prob * f)
            del t[box.box_id]

    yield from rec(0, {}, Fraction(1))


def marginal_pmf_finite(k: JointKernel, z: Value) -> dict:
    """Exact output pmf by enumerating every residual combination."""
    acc: dict = {}
    for t, prob in enumerate_traces(k, z):
        x = k.mech(t, z)
        acc[x] = acc.get(x, Fraction(0)) + prob
    return {x: float(p) for x, p in acc.items()}


def expose_residuals(k: JointKernel) -> JointKernel:
    """Forget the output and expose the full residual tuple instead."""
    ids = k.box_ids
    return JointKernel(
        k.dom,
        k.residual,
        k.boxes,
        lambda t, z: nest_values([t[b] for b in ids]),
    )
