import math

import pytest
from sympy import multiplicity

from abelian import (
    groups_of_order,
    groups_up_to,
    make_group,
    parse_group,
    primary_component,
    primary_ranks,
    reconstruct_primary_from_torsion,
    torsion_order,
    torsion_subgroup,
)
from errors import InconsistentInputError, ParseError


def test_group_basics():
    group = parse_group("2,12")
    assert group.factors == (2, 12)
    assert group.order == 24
    assert group.exponent == 12
    assert str(group) == "2,12"


def test_empty_literal_is_trivial():
    assert parse_group("").factors == (1,)
    assert make_group([]).is_trivial


@pytest.mark.parametrize("text", ["0", "3,-1", "a,b"])
def test_bad_group_literals(text):
    with pytest.raises(ParseError):
        parse_group(text)


def test_element_arithmetic():
    group = make_group([2, 12])
    a, b = group.element((1, 5)), group.element((1, 9))
    assert (a + b).coords == (0, 2)
    assert group.element((1, 4)).order == 6
    assert (5 * a).coords == (1, 1)
    assert (a - a).is_zero()
    with pytest.raises(ParseError):
        group.element((1,))


def test_enumeration_indices_are_consistent():
    group = make_group([3, 4, 2])
    for i, coords in enumerate(group.coordinates):
        assert group.index_of(coords) == i
    assert group.addition_table[group.index_of((2, 3, 1)), group.index_of((1, 1, 1))] == group.index_of((0, 0, 0))


def test_torsion_order_examples():
    group = make_group([2, 12])
    assert torsion_order(group, 2) == 4
    assert torsion_order(group, 3) == 3
    assert torsion_order(group, 0) == 24
    assert torsion_order(group, 24) == 24
    with pytest.raises(ParseError):
        torsion_order(group, -1)


@pytest.mark.parametrize("factors", [[1], [12], [2, 12], [3, 9, 9], [5, 5]])
def test_torsion_subgroup_matches_torsion_order(factors):
    group = make_group(factors)
    for k in range(0, 2 * group.exponent + 1):
        members = torsion_subgroup(group, k)
        assert len(members) == torsion_order(group, k)
        assert all((k * x).is_zero() for x in members)


@pytest.mark.parametrize("factors", [[12], [2, 12], [3, 9, 9]])
def test_torsion_order_is_multiplicative(factors):
    group = make_group(factors)
    for k in range(1, 13):
        for l in range(1, 13):
            if math.gcd(k, l) == 1:
                assert torsion_order(group, k * l) == torsion_order(group, k) * torsion_order(group, l)


def test_primary_ranks():
    group = make_group([2, 12])
    assert primary_ranks(group, 2).as_dict() == {1: 1, 2: 1}
    assert primary_ranks(group, 3).as_dict() == {1: 1}
    assert primary_ranks(group, 5).as_dict() == {}
    with pytest.raises(ParseError):
        primary_ranks(group, 4)


def test_primary_component():
    sub, embedding = primary_component(make_group([12]), 3)
    assert sub.factors == (3,)
    assert embedding.images[0].coords == (4,)
    assert embedding.is_injective()

    sub, embedding = primary_component(make_group([5]), 2)
    assert sub.is_trivial
    assert embedding.is_injective()


def test_reconstruct_from_torsion_example():
    ranks = reconstruct_primary_from_torsion({1: 27, 2: 243, 3: 243}, 3)
    assert ranks.as_dict() == {1: 1, 2: 2}


def test_reconstruct_matches_primary_ranks():
    for group in groups_up_to(100):
        for p in (2, 3, 5, 7):
            top = multiplicity(p, group.exponent) + 1
            orders = {m: torsion_order(group, p**m) for m in range(1, top + 1)}
            assert reconstruct_primary_from_torsion(orders, p) == primary_ranks(group, p)


@pytest.mark.parametrize(
    "orders",
    [
        {1: 3, 2: 6},  # ratio is not a power of p
        {1: 3, 2: 81},  # more growth at m=2 than m=1 allows
        {1: 3, 3: 9},  # gap in the table
        {1: 9, 2: 3},  # not divisible step by step
    ],
)
def test_reconstruct_rejects_inconsistent_tables(orders):
    with pytest.raises(InconsistentInputError):
        reconstruct_primary_from_torsion(orders, 3)


def test_groups_of_order():
    assert len(groups_of_order(1)) == 1
    assert len(groups_of_order(8)) == 3
    assert len(groups_of_order(36)) == 4
    assert all(g.order == 72 for g in groups_of_order(72))
    assert len(groups_of_order(72)) == 6


def test_groups_up_to_odd_only():
    groups = groups_up_to(9, odd_only=True)
    assert [g.order for g in groups] == [1, 3, 5, 7, 9, 9]
