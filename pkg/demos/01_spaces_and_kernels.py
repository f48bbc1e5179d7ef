"""
01_spaces_and_kernels.py

A ground-up tour of the two core objects: measurable spaces and joint
density kernels.

Spaces are built from four constructors:

    Finite(n)        the set {0, ..., n-1} with counting measure
    Countable()      the integers with counting measure
    Real(d)          R^d with Lebesgue measure
    Product / Coproduct   pairing and tagged union

A kernel from Z to X carries a sampler and a log-density with respect to
the base measure of X. Composition integrates out the middle variable,
but instead of marginalizing eagerly the library keeps every intermediate
value in a trace, which is what makes counterfactual replay possible
later on.
"""

import math

from jointkern import (
    Coproduct, Countable, Finite, FinitePoints, Inr, IntervalBox, Product,
    ProductSet, Real, UNIT_VALUE, base_measure_mass, bernoulli, categorical,
    compose, cover_index_bound, descriptor_contains, from_primitive,
    joint_log_density, marginal_pmf_finite, normal, sample_with_trace,
    sigma_finite_cover, tensor,
)

# --- spaces and their base measures ---------------------------------------

coin = Finite(2)
die = Finite(6)
line = Real(1)

print("mass of {0,1} under counting measure:",
      base_measure_mass(coin, FinitePoints([0, 1])))
print("mass of [0, 2.5] under Lebesgue:",
      base_measure_mass(line, IntervalBox([(0.0, 2.5)])))

# Product masses multiply, coproduct masses add.
board = Product(coin, die)
print("mass of a 2x6 grid:",
      base_measure_mass(board, ProductSet(FinitePoints([0, 1]),
                                          FinitePoints(list(range(6))))))

# The real line has infinite total mass, so integration against it works
# through a countable cover by finite-mass pieces.
mixed = Coproduct(Countable(), Real(1))
point = Inr(1234.5)
idx = cover_index_bound(mixed, point)
piece = sigma_finite_cover(mixed, idx)
assert descriptor_contains(mixed, piece, point)
print("cover piece", idx, "holds Inr(1234.5) with mass",
      base_measure_mass(mixed, piece))

# --- primitive kernels -----------------------------------------------------

flip = bernoulli(0.3)
print("\nlog p(heads) for a 0.3 coin:", flip.log_density(UNIT_VALUE, 1))
print("exp of that:", math.exp(flip.log_density(UNIT_VALUE, 1)))

# Samplers are deterministic functions of their uniform inputs. The same
# block of uniforms always reproduces the same draw.
u = [0.25]
assert flip.pushforward(u, UNIT_VALUE) == flip.pushforward(u, UNIT_VALUE)
print("pushforward of u=0.25 through the 0.3 coin:",
      flip.pushforward(u, UNIT_VALUE))

# --- composing kernels -----------------------------------------------------

# A two-stage chain: flip a biased coin, then pass it through a noisy
# channel that keeps the bit with probability 0.8.
first = from_primitive(bernoulli(0.3), "first")
channel = from_primitive(
    categorical([lambda z: 0.8 if z == 0 else 0.2,
                 lambda z: 0.2 if z == 0 else 0.8],
                dom=Finite(2), size=2),
    "noisy")
chain = compose(first, channel)

print("\nchain output marginal:", marginal_pmf_finite(chain, UNIT_VALUE))

# The composite is a joint kernel: it remembers both stages in its trace.
trace, out = sample_with_trace(chain, UNIT_VALUE, seed=4)
print("one sampled trace:", trace, "-> output", out)
print("log-density of that trace:",
      joint_log_density(chain, UNIT_VALUE, trace))

# Tensoring runs kernels side by side on independent inputs.
two_coins = tensor(from_primitive(bernoulli(0.5), "l"),
                   from_primitive(bernoulli(0.9), "r"))
print("\njoint pmf of independent coins:",
      marginal_pmf_finite(two_coins, (UNIT_VALUE, UNIT_VALUE)))

# A continuous stage composes the same way; densities just switch from
# pmf values to Lebesgue densities.
loc = compose(from_primitive(bernoulli(0.5), "sign"),
              from_primitive(normal(lambda z: 3.0 * z, 1.0, dom=Finite(2)),
                             "reading"))
t, x = sample_with_trace(loc, UNIT_VALUE, seed=11)
print("\nmixture sample:", t, "->", round(x, 4))
print("its joint log-density:",
      round(joint_log_density(loc, UNIT_VALUE, t), 6))
