import pickle

import pytest

from abelian import Embedding, make_group
from errors import BoundExceededError, DegenerateFormError, ParseError
from forms import (
    Bicharacter,
    PhaseQZ,
    QuadraticMap,
    count_gram_candidates,
    enumerate_bicharacters,
    enumerate_quadratic_maps,
    enumerate_symmetric_forms,
    homogeneous_base_map,
    is_homogeneous,
    is_quadratic,
    iter_bicharacters,
    orthogonal_sum,
    parse_form,
    parse_form_literal,
    power_form,
    quadratic_refinements,
    radical,
    restrict,
    search_quadratic_maps,
)

SMALL_FORMS = [
    ("1", "0"),
    ("2", "1/2"),
    ("3", "1/3"),
    ("4", "1/4"),
    ("4", "3/4"),
    ("8", "3/8"),
    ("2,2", "0,1/2;1/2,0"),
    ("2,2", "1/2,0;0,1/2"),
    ("3,3", "1/3,0;0,2/3"),
    ("2,4", "1/2,1/2;1/2,1/4"),
]

DEGENERATE_FORMS = [
    ("2", "0"),
    ("4", "1/2"),
    ("3,3", "1/3,0;0,0"),
    ("2,2", "1/2,1/2;1/2,1/2"),
]


def test_phase_arithmetic():
    assert PhaseQZ(4, 3) == PhaseQZ(1, 3)
    assert PhaseQZ.of("-1/3") == PhaseQZ(2, 3)
    assert PhaseQZ(1, 3) + PhaseQZ(2, 3) == PhaseQZ()
    assert 3 * PhaseQZ(1, 6) == PhaseQZ(1, 2)
    assert PhaseQZ(1, 2).halves() == (PhaseQZ(1, 4), PhaseQZ(3, 4))
    assert str(PhaseQZ(2, 6)) == "1/3"
    assert PhaseQZ(1, 4).numerator_over(12) == 3
    with pytest.raises(ParseError):
        PhaseQZ.of("abc")


@pytest.mark.parametrize(
    "group, gram",
    [
        ("3", "1/4"),  # denominator does not divide 3
        ("3,3", "1/3,1/3;0,1/3"),  # not symmetric
        ("3,3", "1/3"),  # wrong shape
        ("2,3", "0,1/2;1/2,0"),  # off-diagonal denominator must divide gcd(2, 3)
        ("3", "x"),
    ],
)
def test_ill_defined_forms_are_rejected(group, gram):
    with pytest.raises(ParseError):
        parse_form(group, gram)


def test_form_literal():
    form = parse_form_literal("group=3,3; gram=1/3,0;0,2/3")
    assert form.group.factors == (3, 3)
    assert form.literal() == "group=3,3; gram=1/3,0;0,2/3"
    assert parse_form_literal(form.literal()) == form
    with pytest.raises(ParseError):
        parse_form_literal("3,3 1/3,0;0,2/3")


def test_pairing(z3, hyperbolic3):
    assert z3.pair((1,), (2,)) == PhaseQZ(2, 3)
    assert hyperbolic3.pair((1, 0), (0, 1)) == PhaseQZ(1, 3)
    assert hyperbolic3.pair((1, 1), (1, 1)) == PhaseQZ(2, 3)


@pytest.mark.parametrize("group, gram, size", [("2", "0", 2), ("3,3", "1/3,0;0,0", 3), ("4", "1/2", 2), ("3", "1/3", 1)])
def test_radical(group, gram, size):
    form = parse_form(group, gram)
    assert len(radical(form)) == size
    assert form.is_nondegenerate == (size == 1)


def test_bicharacter_requires_nondegenerate():
    form = parse_form("2", "0")
    with pytest.raises(DegenerateFormError):
        Bicharacter.from_form(form)
    assert isinstance(Bicharacter.from_form(parse_form("3", "1/3")), Bicharacter)


def test_power_form(z3):
    cubed = power_form(z3, 3)
    assert not cubed.is_nondegenerate
    assert len(radical(cubed)) == 3
    assert power_form(z3, -1).gram == parse_form("3", "2/3").gram


def test_orthogonal_sum(z3, trivial):
    other = Bicharacter.from_form(parse_form("5", "2/5"))
    total = orthogonal_sum(Bicharacter.from_form(z3), other)
    assert total.group.factors == (3, 5)
    assert isinstance(total, Bicharacter)
    assert total.pair((1, 0), (0, 1)).is_zero()
    assert orthogonal_sum(trivial, z3) == z3


def test_restrict_to_subgroup():
    form = parse_form("9", "1/9")
    embedding = Embedding(make_group([3]), form.group, ((3,),))
    sub = restrict(form, embedding)
    assert sub.gram == ((PhaseQZ(),),)
    assert not sub.is_nondegenerate


def test_homogeneous_base_map_examples(z3, z2):
    assert homogeneous_base_map(z3).values() == (PhaseQZ(), PhaseQZ(2, 3), PhaseQZ(2, 3))
    assert homogeneous_base_map(z2).values() == (PhaseQZ(), PhaseQZ(1, 4))


@pytest.mark.parametrize("group, gram", SMALL_FORMS + DEGENERATE_FORMS)
def test_homogeneous_base_map_is_quadratic_and_homogeneous(group, gram):
    form = parse_form(group, gram)
    mu0 = homogeneous_base_map(form)
    assert is_quadratic(mu0, form)
    assert is_homogeneous(mu0)


@pytest.mark.parametrize("group, gram", SMALL_FORMS)
def test_enumerated_maps_are_exactly_the_searched_maps(group, gram):
    form = parse_form(group, gram)
    maps = enumerate_quadratic_maps(form)
    tables = {mu.values() for mu in maps}
    assert len(maps) == form.order
    assert len(tables) == form.order
    assert all(is_quadratic(mu, form) for mu in maps)
    assert tables == set(search_quadratic_maps(form))


@pytest.mark.parametrize("group, gram", DEGENERATE_FORMS)
def test_refinements_of_degenerate_forms_are_complete(group, gram):
    form = parse_form(group, gram)
    tables = {mu.values() for mu in quadratic_refinements(form)}
    assert len(tables) == form.order
    assert tables == set(search_quadratic_maps(form))
    with pytest.raises(DegenerateFormError):
        enumerate_quadratic_maps(form)


def test_is_quadratic_rejects_wrong_tables(z3):
    assert is_quadratic(["0", "2/3", "2/3"], z3)
    assert not is_quadratic(["0", "1/3", "1/3"], z3)
    with pytest.raises(ParseError):
        is_quadratic(["0", "2/3"], z3)


def test_shifted_map_is_not_homogeneous_on_odd_groups(z3):
    mu0 = homogeneous_base_map(z3)
    assert not is_homogeneous(mu0.shifted((1,)))
    assert mu0.shifted((1,)).values() == (PhaseQZ(), PhaseQZ(0), PhaseQZ(1, 3))


def test_scaled_map_refines_the_power_form(z3):
    scaled = homogeneous_base_map(z3).scaled(-2)
    assert scaled.values() == (PhaseQZ(), PhaseQZ(2, 3), PhaseQZ(2, 3))
    assert is_quadratic(scaled, scaled.form)


def test_character_must_be_a_homomorphism(z3):
    with pytest.raises(ParseError):
        QuadraticMap(z3, (PhaseQZ(),), character=(PhaseQZ(1, 2),))


def test_enumerate_symmetric_forms_counts():
    assert len(enumerate_symmetric_forms(make_group([3, 3]))) == 27
    assert len(enumerate_symmetric_forms(make_group([2, 4]))) == 2 * 2 * 4


@pytest.mark.parametrize(
    "factors, total, classes",
    [
        ([1], 1, 1),
        ([2], 1, 1),
        ([3], 2, 2),
        ([4], 2, 2),
        ([2, 2], 4, 2),
        ([3, 3], 18, 2),
        ([9], 6, 2),
    ],
)
def test_enumerate_bicharacters(factors, total, classes):
    group = make_group(factors)
    assert len(enumerate_bicharacters(group)) == total
    assert len(enumerate_bicharacters(group, up_to_isomorphism=True)) == classes


def test_enumeration_bound(monkeypatch):
    monkeypatch.setenv("TY_ENUMERATION_LIMIT", "10")
    with pytest.raises(BoundExceededError):
        enumerate_bicharacters(make_group([3, 3]))


def test_bound_errors_survive_pickling():
    error = BoundExceededError("gram matrices on Z/3 + Z/3", 27, 10)
    restored = pickle.loads(pickle.dumps(error))
    assert (restored.size, restored.bound, str(restored)) == (27, 10, str(error))


@pytest.mark.parametrize("factors", [[2, 2, 2], [3, 3], [4, 2]])
def test_iter_bicharacters_slices_the_candidates(factors):
    group = make_group(factors)
    total = count_gram_candidates(group)
    pieces = [list(iter_bicharacters(group, start, min(start + 5, total))) for start in range(0, total, 5)]
    assert [chi for piece in pieces for chi in piece] == enumerate_bicharacters(group)
