import itertools

import pytest

from abelian import groups_up_to, make_group
from classify import (
    WallInvariants,
    block_form,
    diagonal_form,
    find_isomorphism,
    is_isomorphic_bruteforce,
    is_isomorphic_odd,
    orthogonal_split_odd_p,
    primary_forms,
    wall_invariants,
)
from errors import BoundExceededError, UnsupportedGroupError
from forms import enumerate_bicharacters, orthogonal_sum, parse_form


def test_split_examples(z3_nonresidue, hyperbolic3):
    (block,) = orthogonal_split_odd_p(z3_nonresidue)
    assert (block.p, block.s, block.deltas) == (3, 1, (2,))
    assert block.sigma == -1

    (block,) = orthogonal_split_odd_p(parse_form("9", "1/9"))
    assert (block.s, block.deltas) == (2, (1,))

    (block,) = orthogonal_split_odd_p(hyperbolic3)
    assert block.deltas == (2, 1)
    assert block.sigma == -1


def test_split_of_mixed_levels():
    blocks = orthogonal_split_odd_p(parse_form("3,9", "1/3,0;0,2/9"))
    assert [(b.s, b.rank) for b in blocks] == [(1, 1), (2, 1)]
    assert [b.sigma for b in blocks] == [1, -1]


def test_split_rejects_other_orders(z2):
    with pytest.raises(UnsupportedGroupError):
        orthogonal_split_odd_p(z2)
    with pytest.raises(UnsupportedGroupError):
        orthogonal_split_odd_p(parse_form("15", "1/15"))
    assert orthogonal_split_odd_p(parse_form("1", "0")) == []


@pytest.mark.parametrize(
    "group, gram, expected",
    [
        ("3", "1/3", {"3^1": {"r": 1, "sigma": 1}}),
        ("3", "2/3", {"3^1": {"r": 1, "sigma": -1}}),
        ("3,3", "1/3,0;0,2/3", {"3^1": {"r": 2, "sigma": -1}}),
        ("15", "1/15", {"3^1": {"r": 1, "sigma": -1}, "5^1": {"r": 1, "sigma": -1}}),
        ("2", "1/2", {"2-part": "unclassified"}),
        ("6", "1/6", {"3^1": {"r": 1, "sigma": -1}, "2-part": "unclassified"}),
        ("1", "0", {}),
    ],
)
def test_wall_invariants(group, gram, expected):
    invariants = wall_invariants(parse_form(group, gram))
    assert invariants.to_json() == expected
    assert WallInvariants.from_json(invariants.to_json()) == invariants


def test_primary_forms():
    parts = primary_forms(parse_form("15", "1/15"))
    assert sorted(parts) == [3, 5]
    assert parts[3].gram_text() == "2/3"
    assert parts[5].gram_text() == "3/5"


def test_invariants_merge_over_orthogonal_sums():
    first = parse_form("3,9", "1/3,0;0,2/9")
    second = parse_form("3,5", "2/3,0;0,2/5")
    total = orthogonal_sum(first, second)
    assert wall_invariants(total) == wall_invariants(first).merge(wall_invariants(second))
    assert wall_invariants(total).rank(3, 1) == 2
    assert wall_invariants(total).sigma(3, 1) == -1


def test_isomorphic_odd(hyperbolic3):
    a = parse_form("3,3", "1/3,0;0,1/3")
    b = parse_form("3,3", "2/3,0;0,2/3")
    c = parse_form("3,3", "1/3,0;0,2/3")
    assert is_isomorphic_odd(a, b)
    assert not is_isomorphic_odd(a, c)
    assert is_isomorphic_odd(c, hyperbolic3)
    assert not is_isomorphic_odd(a, parse_form("9", "1/9"))
    with pytest.raises(UnsupportedGroupError):
        is_isomorphic_odd(parse_form("2", "1/2"), parse_form("2", "1/2"))


def test_find_isomorphism_carries_the_form():
    first = parse_form("3,3", "1/3,0;0,2/3")
    second = parse_form("3,3", "0,1/3;1/3,0")
    images = find_isomorphism(first, second)
    assert images is not None
    for (i, x), (j, y) in itertools.product(enumerate(images), repeat=2):
        assert second.pair(x, y) == first.gram[i][j]


def test_bruteforce_on_even_groups():
    assert not is_isomorphic_bruteforce(parse_form("4", "1/4"), parse_form("4", "3/4"))
    assert is_isomorphic_bruteforce(parse_form("2,2", "1/2,0;0,1/2"), parse_form("2,2", "1/2,1/2;1/2,0"))
    assert not is_isomorphic_bruteforce(parse_form("2,2", "1/2,0;0,1/2"), parse_form("2,2", "0,1/2;1/2,0"))
    assert not is_isomorphic_bruteforce(parse_form("4", "1/4"), parse_form("2,2", "1/2,0;0,1/2"))
    assert not is_isomorphic_bruteforce(parse_form("3", "1/3"), parse_form("5", "1/5"))


def test_bruteforce_bound(monkeypatch):
    monkeypatch.setenv("TY_BRUTEFORCE_BOUND", "5")
    with pytest.raises(BoundExceededError):
        find_isomorphism(parse_form("9", "1/9"), parse_form("9", "2/9"))


@pytest.mark.parametrize("factors", [[3], [5], [7], [9], [3, 3], [15], [25], [27], [3, 9]])
def test_invariants_agree_with_bruteforce(factors):
    forms = enumerate_bicharacters(make_group(factors))
    classes = {}
    for chi in forms:
        classes.setdefault(wall_invariants(chi), []).append(chi)
    for members in classes.values():
        for chi in members[1:]:
            assert is_isomorphic_bruteforce(chi, members[0])
    for first, second in itertools.combinations(classes.values(), 2):
        assert not is_isomorphic_bruteforce(first[0], second[0])


def test_split_reconstructs_the_form():
    for group in groups_up_to(27, odd_only=True):
        for chi in enumerate_bicharacters(group)[:10]:
            for p, component in primary_forms(chi).items():
                blocks = orthogonal_split_odd_p(component)
                assert is_isomorphic_bruteforce(block_form(blocks), component)


@pytest.mark.parametrize(
    "entries",
    [
        (((3, 1), 1, -1),),
        (((3, 1), 2, -1), ((3, 2), 1, 1)),
        (((5, 1), 1, -1), ((7, 1), 2, -1)),
        (),
    ],
)
def test_diagonal_form_realizes_the_invariants(entries):
    invariants = WallInvariants(entries)
    assert wall_invariants(diagonal_form(invariants)) == invariants


def test_diagonal_form_needs_odd_data():
    with pytest.raises(UnsupportedGroupError):
        diagonal_form(WallInvariants(two_part=True))
