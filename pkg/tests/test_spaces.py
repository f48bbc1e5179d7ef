import math
import random

import pytest

from jointkern import (
    Coproduct,
    CoproductSet,
    Countable,
    Finite,
    FinitePoints,
    Inl,
    Inr,
    IntervalBox,
    Product,
    ProductSet,
    Real,
    ShapeError,
    UNIT,
    UNIT_VALUE,
    base_measure_mass,
    cantor_pair,
    cantor_unpair,
    cover_index_bound,
    descriptor_contains,
    finite_points,
    membership,
    nest_product,
    nest_values,
    sigma_finite_cover,
    unnest_values,
    zigzag,
    zigzag_index,
)


def test_space_constructor_guards():
    with pytest.raises(ShapeError):
        Finite(0)
    with pytest.raises(ShapeError):
        Real(0)
    assert UNIT == Finite(1)
    assert membership(UNIT, UNIT_VALUE)


def test_membership_basic():
    assert membership(Finite(2), 1)
    assert not membership(Finite(2), 2)
    assert membership(Product(Finite(2), Real(1)), (0, 3.5))
    assert not membership(Finite(2), True)
    assert not membership(Real(1), 1)
    assert membership(Real(1), 1.0)
    assert not membership(Real(1), float("nan"))
    assert not membership(Real(1), float("inf"))
    assert membership(Real(3), (0.0, 1.0, -2.0))
    assert not membership(Real(3), (0.0, 1.0))
    assert membership(Coproduct(Finite(2), Real(1)), Inl(1))
    assert membership(Coproduct(Finite(2), Real(1)), Inr(0.5))
    assert not membership(Coproduct(Finite(2), Real(1)), 1)
    assert membership(Countable(), -17)


def test_mass_examples():
    assert base_measure_mass(Finite(2), FinitePoints([0, 1])) == 2.0
    assert base_measure_mass(Real(1), IntervalBox([(0, 0.5)])) == 0.5
    got = base_measure_mass(
        Product(Finite(3), Real(1)),
        ProductSet(FinitePoints([0, 1]), IntervalBox([(0, 2)])))
    assert got == 4.0
    got = base_measure_mass(
        Coproduct(Finite(1), Real(1)),
        CoproductSet(FinitePoints([0]), IntervalBox([(0, 1)])))
    assert got == 2.0


def test_mass_counts_distinct_points():
    assert base_measure_mass(Finite(3), FinitePoints([0, 0, 1])) == 2.0


def test_mass_shape_errors():
    with pytest.raises(ShapeError):
        base_measure_mass(Real(1), FinitePoints([0.5]))
    with pytest.raises(ShapeError):
        base_measure_mass(Finite(2), IntervalBox([(0, 1)]))
    with pytest.raises(ShapeError):
        base_measure_mass(Real(2), IntervalBox([(0, 1)]))
    with pytest.raises(ShapeError):
        IntervalBox([(1, 0)])
    with pytest.raises(ShapeError):
        base_measure_mass(Finite(2), FinitePoints([5]))


def test_product_and_coproduct_mass_laws_random():
    rng = random.Random(42)
    for _ in range(500):
        n = rng.randint(1, 6)
        pts = FinitePoints([rng.randrange(8) for _ in range(n)])
        lo, hi = sorted(rng.uniform(-5, 5) for _ in range(2))
        box = IntervalBox([(lo, hi)])
        a = base_measure_mass(Finite(8), pts)
        b = base_measure_mass(Real(1), box)
        prod = base_measure_mass(Product(Finite(8), Real(1)), ProductSet(pts, box))
        assert abs(prod - a * b) <= 1e-12
        cop = base_measure_mass(Coproduct(Finite(8), Real(1)), CoproductSet(pts, box))
        assert abs(cop - (a + b)) <= 1e-12


def test_disjoint_additivity():
    rng = random.Random(7)
    for _ in range(200):
        cut = rng.randrange(1, 9)
        left = FinitePoints(range(cut))
        right = FinitePoints(range(cut, 10))
        whole = FinitePoints(range(10))
        s = base_measure_mass(Finite(10), left) + base_measure_mass(Finite(10), right)
        assert abs(s - base_measure_mass(Finite(10), whole)) <= 1e-12

        a, b, c = sorted(rng.uniform(-3, 3) for _ in range(3))
        s = base_measure_mass(Real(1), IntervalBox([(a, b)])) + \
            base_measure_mass(Real(1), IntervalBox([(b, c)]))
        assert abs(s - base_measure_mass(Real(1), IntervalBox([(a, c)]))) <= 1e-12


def test_zigzag_roundtrip():
    seen = [zigzag(n) for n in range(11)]
    assert seen == [0, -1, 1, -2, 2, -3, 3, -4, 4, -5, 5]
    for k in range(-50, 51):
        assert zigzag(zigzag_index(k)) == k


def test_cantor_roundtrip():
    for n in range(200):
        i, j = cantor_unpair(n)
        assert cantor_pair(i, j) == n
    assert cantor_pair(0, 0) == 0


def test_cover_examples():
    piece = sigma_finite_cover(Real(1), 0)
    assert piece == IntervalBox([(0.0, 1.0)])
    assert base_measure_mass(Real(1), piece) == 1.0

    piece = sigma_finite_cover(Finite(5), 0)
    assert piece == FinitePoints(range(5))
    assert base_measure_mass(Finite(5), piece) == 5.0

    for n in (0, 3, 17):
        piece = sigma_finite_cover(Product(Real(1), Real(1)), n)
        assert base_measure_mass(Product(Real(1), Real(1)), piece) == 1.0


def test_cover_soundness_random_points():
    rng = random.Random(2024)
    spaces = [
        Finite(4),
        Countable(),
        Real(1),
        Real(2),
        Product(Finite(3), Real(1)),
        Coproduct(Countable(), Real(1)),
        Product(Real(1), Product(Finite(2), Countable())),
    ]

    def sample_point(sp):
        if isinstance(sp, Finite):
            return rng.randrange(sp.size)
        if isinstance(sp, Countable):
            return rng.randint(-40, 40)
        if isinstance(sp, Real):
            if sp.dim == 1:
                return rng.uniform(-20, 20)
            return tuple(rng.uniform(-20, 20) for _ in range(sp.dim))
        if isinstance(sp, Product):
            return (sample_point(sp.left), sample_point(sp.right))
        if rng.random() < 0.5:
            return Inl(sample_point(sp.left))
        return Inr(sample_point(sp.right))

    for _ in range(1000):
        sp = rng.choice(spaces)
        v = sample_point(sp)
        idx = cover_index_bound(sp, v)
        piece = sigma_finite_cover(sp, idx)
        assert descriptor_contains(sp, piece, v)
        assert math.isfinite(base_measure_mass(sp, piece))


def test_cover_pieces_always_finite_mass():
    rng = random.Random(5)
    spaces = [Countable(), Real(1), Real(3), Product(Countable(), Real(2)),
              Coproduct(Real(1), Finite(2))]
    for sp in spaces:
        for _ in range(50):
            piece = sigma_finite_cover(sp, rng.randrange(10000))
            assert math.isfinite(base_measure_mass(sp, piece))


def test_cover_index_guards():
    with pytest.raises(ShapeError):
        sigma_finite_cover(Real(1), -1)
    with pytest.raises(ShapeError):
        cover_index_bound(Finite(2), 5)


def test_finite_points_enumeration():
    assert finite_points(Finite(3)) == [0, 1, 2]
    assert finite_points(Product(Finite(2), Finite(2))) == [(0, 0), (0, 1), (1, 0), (1, 1)]
    pts = finite_points(Coproduct(Finite(1), Finite(2)))
    assert pts == [Inl(0), Inr(0), Inr(1)]
    with pytest.raises(ShapeError):
        finite_points(Countable())


def test_nesting_helpers():
    assert nest_product([]) == UNIT
    assert nest_product([Finite(2)]) == Finite(2)
    assert nest_product([Finite(2), Real(1), Countable()]) == \
        Product(Product(Finite(2), Real(1)), Countable())
    assert nest_values([]) == UNIT_VALUE
    assert nest_values([1, 2.0, 3]) == ((1, 2.0), 3)
    assert unnest_values(((1, 2.0), 3), 3) == [1, 2.0, 3]
    assert unnest_values(5, 1) == [5]
    assert unnest_values(UNIT_VALUE, 0) == []
