import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from abelian import FiniteAbelianGroup, GroupElement, parse_group
from errors import BoundExceededError, DegenerateFormError, InternalConsistencyError, ParseError
from logger import get_logger
from settings import get_settings

log = get_logger("forms")


@dataclass(frozen=True, order=True)
class PhaseQZ:
    """An element of Q/Z, standing for the root of unity exp(2*pi*i*numerator/denominator)."""

    numerator: int = 0
    denominator: int = 1

    def __post_init__(self):
        if self.denominator == 0:
            raise ParseError("phase with zero denominator")
        value = Fraction(self.numerator, self.denominator) % 1
        object.__setattr__(self, "numerator", value.numerator)
        object.__setattr__(self, "denominator", value.denominator)

    @classmethod
    def of(cls, value):
        if isinstance(value, PhaseQZ):
            return value
        if isinstance(value, str):
            try:
                value = Fraction(value.strip())
            except (ValueError, ZeroDivisionError) as e:
                raise ParseError(f"bad phase literal {value!r}") from e
        value = Fraction(value)
        return cls(value.numerator, value.denominator)

    @property
    def fraction(self):
        return Fraction(self.numerator, self.denominator)

    @property
    def order(self):
        return self.denominator

    def is_zero(self):
        return self.numerator == 0

    def __add__(self, other):
        return PhaseQZ.of(self.fraction + PhaseQZ.of(other).fraction)

    def __sub__(self, other):
        return PhaseQZ.of(self.fraction - PhaseQZ.of(other).fraction)

    def __neg__(self):
        return PhaseQZ.of(-self.fraction)

    def __mul__(self, n):
        return PhaseQZ.of(self.fraction * int(n))

    __rmul__ = __mul__

    def halves(self):
        """The two square roots of the root of unity, as phases."""
        half = self.fraction / 2
        return PhaseQZ.of(half), PhaseQZ.of(half + Fraction(1, 2))

    def numerator_over(self, conductor):
        if conductor % self.denominator:
            raise ValueError(f"{self} is not a multiple of 1/{conductor}")
        return self.numerator * (conductor // self.denominator)

    def to_complex(self):
        return complex(np.exp(2j * np.pi * self.numerator / self.denominator))

    def __str__(self):
        return "0" if self.numerator == 0 else f"{self.numerator}/{self.denominator}"


def _phases_from_table(values, conductor):
    return tuple(PhaseQZ(int(v), conductor) for v in values)


@dataclass(frozen=True)
class SymmetricForm:
    """chi(a, b) = sum_ij a_i b_j gram[i][j] in Q/Z, possibly degenerate."""

    group: FiniteAbelianGroup
    gram: tuple

    def __post_init__(self):
        rows = [tuple(PhaseQZ.of(x) for x in row) for row in self.gram]
        factors = self.group.factors
        if len(rows) != len(factors) or any(len(row) != len(factors) for row in rows):
            raise ParseError(f"gram must be {len(factors)}x{len(factors)} for group {self.group}")
        for i, j in itertools.product(range(len(factors)), repeat=2):
            if rows[i][j] != rows[j][i]:
                raise ParseError(f"gram is not symmetric at ({i + 1},{j + 1}): {rows[i][j]} vs {rows[j][i]}")
            g = math.gcd(factors[i], factors[j])
            if g % rows[i][j].denominator:
                raise ParseError(
                    f"gram entry ({i + 1},{j + 1}) = {rows[i][j]} is ill-defined: "
                    f"denominator does not divide gcd({factors[i]},{factors[j]}) = {g}"
                )
        object.__setattr__(self, "gram", tuple(rows))

    @property
    def order(self):
        return self.group.order

    @cached_property
    def conductor(self):
        return math.lcm(1, *(x.denominator for row in self.gram for x in row))

    def gram_over(self, conductor):
        return np.array([[x.numerator_over(conductor) for x in row] for row in self.gram], dtype=np.int64)

    def pair(self, a, b):
        n = self.conductor
        value = np.asarray(tuple(a), dtype=np.int64) @ self.gram_over(n) @ np.asarray(tuple(b), dtype=np.int64)
        return PhaseQZ(int(value) % n, n)

    @cached_property
    def against_generators(self):
        """(order x rank) table of chi(a, e_j) over the conductor."""
        return np.mod(self.group.coordinates @ self.gram_over(self.conductor), self.conductor)

    def pairing_matrix(self, conductor=None):
        """(order x order) table of chi(a, b) over the given conductor."""
        conductor = conductor or self.conductor
        scale = conductor // self.conductor
        return np.mod(self.against_generators @ self.group.coordinates.T, self.conductor) * scale

    def diagonal(self, conductor=None):
        conductor = conductor or self.conductor
        values = np.einsum("ij,ij->i", self.against_generators, self.group.coordinates)
        return np.mod(values, self.conductor) * (conductor // self.conductor)

    @cached_property
    def radical_indices(self):
        return np.flatnonzero(np.all(self.against_generators == 0, axis=1))

    @property
    def is_nondegenerate(self):
        return len(self.radical_indices) == 1

    def gram_text(self):
        return ";".join(",".join(str(x) for x in row) for row in self.gram)

    def literal(self):
        return f"group={self.group}; gram={self.gram_text()}"

    def __str__(self):
        return self.literal()


@dataclass(frozen=True)
class Bicharacter(SymmetricForm):
    """A SymmetricForm certified nondegenerate."""

    def __post_init__(self):
        super().__post_init__()
        if not self.is_nondegenerate:
            raise DegenerateFormError(f"form {self.literal()} has a radical of size {len(self.radical_indices)}")

    @classmethod
    def from_form(cls, form):
        if isinstance(form, Bicharacter):
            return form
        return cls(form.group, form.gram)


@dataclass(frozen=True)
class QuadraticMap:
    """mu(a) = sum_i a_i^2 base_i + sum_{i<j} a_i a_j chi(e_i, e_j) + chi(a, shift) + sum_i a_i character_i.

    base_i is mu(e_i) of the underlying homogeneous part; character is a
    homomorphism A -> Q/Z given on generators (d_i * character_i = 0). Coordinates
    are always the reduced representatives 0 <= a_i < d_i.
    """

    form: SymmetricForm
    base: tuple
    shift: tuple = None
    character: tuple = None

    def __post_init__(self):
        group = self.form.group
        object.__setattr__(self, "base", tuple(PhaseQZ.of(x) for x in self.base))
        if len(self.base) != group.rank:
            raise ParseError("quadratic map needs one base value per generator")
        shift = group.zero() if self.shift is None else group.element(tuple(self.shift))
        object.__setattr__(self, "shift", shift)
        character = (PhaseQZ(),) * group.rank if self.character is None else tuple(PhaseQZ.of(x) for x in self.character)
        if len(character) != group.rank or any(not (d * x).is_zero() for d, x in zip(group.factors, character)):
            raise ParseError(f"character values {[str(x) for x in character]} are not a homomorphism on {group}")
        object.__setattr__(self, "character", character)

    @property
    def group(self):
        return self.form.group

    @cached_property
    def conductor(self):
        return math.lcm(self.form.conductor, *(x.denominator for x in self.base + self.character))

    @cached_property
    def table(self):
        """Values on every element (enumeration order), as numerators over self.conductor."""
        n = self.conductor
        coords = self.group.coordinates
        gram = self.form.gram_over(n)
        base = np.array([x.numerator_over(n) for x in self.base], dtype=np.int64)
        linear = np.array([x.numerator_over(n) for x in self.character], dtype=np.int64)
        diagonal = (coords * coords) @ base
        cross = np.einsum("ij,ij->i", coords @ np.triu(gram, 1), coords)
        shift = coords @ (gram @ np.asarray(self.shift.coords, dtype=np.int64) + linear)
        return np.mod(diagonal + cross + shift, n)

    def values(self):
        limit = get_settings().materialize_limit
        if self.group.order > limit:
            raise BoundExceededError("materialized value table", self.group.order, limit)
        return _phases_from_table(self.table, self.conductor)

    def __call__(self, a):
        return PhaseQZ(int(self.table[self.group.index_of(tuple(a))]), self.conductor)

    def shifted(self, c):
        c = self.group.element(tuple(c))
        return QuadraticMap(self.form, self.base, (self.shift + c).coords, self.character)

    def twisted(self, character):
        character = tuple(x + PhaseQZ.of(y) for x, y in zip(self.character, character))
        return QuadraticMap(self.form, self.base, self.shift.coords, character)

    def scaled(self, m):
        """a -> m*mu(a), a quadratic map for chi^m."""
        return QuadraticMap(
            power_form(self.form, m),
            tuple(m * x for x in self.base),
            self.shift.coords,
            tuple(m * x for x in self.character),
        )

    def on_radical(self):
        return self.table[self.form.radical_indices]


def parse_gram(text):
    text = str(text).strip()
    if not text:
        raise ParseError("empty gram literal")
    try:
        return tuple(tuple(PhaseQZ.of(x) for x in row.split(",")) for row in text.split(";"))
    except ParseError:
        raise
    except ValueError as e:
        raise ParseError(f"bad gram literal {text!r}: {e}") from e


def parse_form(group_text, gram_text):
    return validate_form(parse_group(group_text), parse_gram(gram_text))


def parse_form_literal(text):
    """Read 'group=3,3; gram=1/3,0;0,2/3'."""
    text = str(text)
    head, sep, gram_text = text.partition("gram=")
    group_text = head.strip().rstrip(";").strip()
    if not sep or not group_text.startswith("group="):
        raise ParseError(f"form literal must look like 'group=...; gram=...', got {text!r}")
    return parse_form(group_text[len("group="):], gram_text)


def validate_form(group, gram, as_bicharacter=False):
    form = SymmetricForm(group, tuple(tuple(row) for row in gram))
    if as_bicharacter:
        return Bicharacter.from_form(form)
    return form


def require_bicharacter(form):
    if isinstance(form, Bicharacter):
        return form
    return Bicharacter.from_form(form)


def radical(form):
    return [GroupElement(form.group, tuple(form.group.coordinates[i])) for i in form.radical_indices]


def power_form(form, k):
    return SymmetricForm(form.group, tuple(tuple(k * x for x in row) for row in form.gram))


def orthogonal_sum(first, second):
    if first.group.is_trivial:
        return second
    if second.group.is_trivial:
        return first
    r1, r2 = first.group.rank, second.group.rank
    zero = PhaseQZ()
    rows = [tuple(row) + (zero,) * r2 for row in first.gram]
    rows += [(zero,) * r1 + tuple(row) for row in second.gram]
    form = SymmetricForm(first.group.direct_sum(second.group), tuple(rows))
    if isinstance(first, Bicharacter) and isinstance(second, Bicharacter):
        return Bicharacter.from_form(form)
    return form


def restrict(form, embedding):
    """Pull chi back along an injective homomorphism into form.group."""
    if embedding.target != form.group:
        raise ParseError("embedding does not land in the form's group")
    images = embedding.images
    gram = tuple(tuple(form.pair(a, b) for b in images) for a in images)
    return SymmetricForm(embedding.source, gram)


def _generator_check(mu):
    """Coboundary test against the generators; with mu(0) = 0 this certifies mu is quadratic."""
    group = mu.group
    n = mu.conductor
    table = mu.table
    if table[0] != 0:
        return False
    gram = mu.form.gram_over(n)
    for j, gen in enumerate(group.generators()):
        moved = group.indices_of(group.coordinates + np.asarray(gen.coords, dtype=np.int64))
        expected = np.mod(group.coordinates @ gram[:, j], n)
        if np.any(np.mod(table[moved] - table - table[group.index_of(gen.coords)] - expected, n)):
            return False
    return True


def homogeneous_base_map(form):
    """A homogeneous quadratic map mu0 with coboundary chi.

    q_i(a) = h_i a^2 chi(e_i, e_i) with h_i = (d_i + 1)/2 for odd d_i, and
    q_i(a) = a^2 c_i / (2 d_i) with chi(e_i, e_i) = c_i / d_i for even d_i.
    """
    base = []
    for d, row in zip(form.group.factors, form.gram):
        diagonal = row[len(base)]
        if d % 2:
            base.append(((d + 1) // 2) * diagonal)
        else:
            c = diagonal.fraction * d
            base.append(PhaseQZ.of(c / (2 * d)))
    mu0 = QuadraticMap(form, tuple(base))
    if not _generator_check(mu0):
        raise InternalConsistencyError(f"base map for {form.literal()} fails the coboundary check")
    if not is_homogeneous(mu0):
        raise InternalConsistencyError(f"base map for {form.literal()} is not homogeneous")
    return mu0


def enumerate_quadratic_maps(form):
    """Q_chi as the |A| shifts mu0 + chi(., c); complete only for nondegenerate chi."""
    chi = require_bicharacter(form)
    mu0 = homogeneous_base_map(chi)
    return [mu0.shifted(c) for c in chi.group.elements()]


def _table_over(values, conductor):
    phases = [PhaseQZ.of(v) for v in values]
    conductor = math.lcm(conductor, *(x.denominator for x in phases))
    return np.array([x.numerator_over(conductor) for x in phases], dtype=np.int64), conductor


def _is_quadratic_table(table, conductor, form):
    group = form.group
    pairing = form.pairing_matrix() * (conductor // form.conductor)
    add = group.addition_table
    defect = table[add] - table[:, None] - table[None, :] - pairing
    return not np.any(np.mod(defect, conductor))


def is_quadratic(values, form):
    """Exhaustive coboundary test over all |A|^2 pairs."""
    if isinstance(values, QuadraticMap):
        table, conductor = values.table, values.conductor
        conductor = math.lcm(conductor, form.conductor)
        table = table * (conductor // values.conductor)
    else:
        if len(values) != form.order:
            raise ParseError(f"value table has {len(values)} entries, group has {form.order} elements")
        table, conductor = _table_over(values, form.conductor)
    return _is_quadratic_table(table, conductor, form)


def is_homogeneous(mu):
    """mu(n a) = n^2 mu(a) for all a and 0 <= n < exponent."""
    group = mu.group
    n_mod = mu.conductor
    table = mu.table
    for n in range(group.exponent):
        if np.any(np.mod(table[group.multiples(n)] - n * n * table, n_mod)):
            return False
    return True


def search_quadratic_maps(form):
    """Every value table with coboundary chi, found by brute force over generator values.

    Generator values run over the 1/(2 d_i) grid, which contains mu(e_i) for any
    quadratic map; each candidate is extended by mu(a e) = a mu(e) + C(a,2) chi(e,e)
    plus the cross terms, then kept only if it passes the exhaustive pair check.
    """
    group = form.group
    conductor = math.lcm(form.conductor, 2 * group.exponent)
    coords = group.coordinates
    gram = form.gram_over(conductor)
    binomial = (coords * (coords - 1)) // 2
    fixed = binomial @ np.diag(gram) + np.einsum("ij,ij->i", coords @ np.triu(gram, 1), coords)
    grids = [range(0, conductor, conductor // (2 * d)) for d in group.factors]
    found = []
    for generator_values in itertools.product(*grids):
        table = np.mod(coords @ np.array(generator_values, dtype=np.int64) + fixed, conductor)
        if _is_quadratic_table(table, conductor, form):
            found.append(_phases_from_table(table, conductor))
    log.debug("search over %s found %d quadratic maps", form.literal(), len(found))
    return found


def count_gram_candidates(group):
    factors = group.factors
    return math.prod(math.gcd(factors[i], factors[j]) for i in range(len(factors)) for j in range(i, len(factors)))


def _gram_slots(group):
    factors = group.factors
    return [(i, j, math.gcd(factors[i], factors[j])) for i in range(len(factors)) for j in range(i, len(factors))]


def _form_from_entries(group, slots, entries):
    rank = group.rank
    gram = [[Fraction(0)] * rank for _ in range(rank)]
    for (i, j, g), t in zip(slots, entries):
        gram[i][j] = gram[j][i] = Fraction(int(t), g)
    return SymmetricForm(group, tuple(tuple(row) for row in gram))


def _check_enumeration(group):
    settings = get_settings()
    if group.order > settings.max_order:
        raise BoundExceededError(f"symmetric forms on {group}", group.order, settings.max_order)
    estimate = count_gram_candidates(group)
    if estimate > settings.enumeration_limit:
        raise BoundExceededError(f"gram matrices on {group}", estimate, settings.enumeration_limit)


def enumerate_symmetric_forms(group):
    """Every well-defined symmetric gram on group, degenerate ones included."""
    _check_enumeration(group)
    slots = _gram_slots(group)
    return [_form_from_entries(group, slots, entries) for entries in itertools.product(*(range(g) for _, _, g in slots))]


def iter_bicharacters(group, start=0, stop=None):
    """Nondegenerate grams among the candidates start..stop-1, in enumeration order."""
    _check_enumeration(group)
    slots = _gram_slots(group)
    candidates = itertools.product(*(range(g) for _, _, g in slots))
    for entries in itertools.islice(candidates, start, stop):
        form = _form_from_entries(group, slots, entries)
        if form.is_nondegenerate:
            yield Bicharacter.from_form(form)


def enumerate_bicharacters(group, up_to_isomorphism=False):
    """All nondegenerate symmetric grams over group, optionally one per isomorphism class."""
    found = list(iter_bicharacters(group))
    log.debug("%d of %d symmetric grams on %s are nondegenerate", len(found), count_gram_candidates(group), group)
    if up_to_isomorphism:
        found = _deduplicate(found)
    return found


def random_forms(group, count, rng, nondegenerate=True, attempts=None):
    """Up to count random grams drawn with a numpy Generator; fewer if too many draws are degenerate."""
    slots = _gram_slots(group)
    attempts = attempts or 20 * count
    found = []
    for _ in range(attempts):
        if len(found) == count:
            break
        entries = [rng.integers(g) for _, _, g in slots]
        form = _form_from_entries(group, slots, entries)
        if nondegenerate and not form.is_nondegenerate:
            continue
        found.append(Bicharacter.from_form(form) if form.is_nondegenerate else form)
    return found


def characters(group):
    """All homomorphisms A -> Q/Z, as generator values j_i / d_i."""
    return [tuple(PhaseQZ(int(j), d) for j, d in zip(coords, group.factors)) for coords in group.coordinates]


def quadratic_refinements(form):
    """Every quadratic map with coboundary chi: mu0 plus a character, for any symmetric form."""
    mu0 = homogeneous_base_map(form)
    return [mu0.twisted(character) for character in characters(form.group)]


def _deduplicate(forms):
    from classify import is_isomorphic_bruteforce, wall_invariants

    if not forms:
        return forms
    if forms[0].order % 2:
        seen = {}
        for chi in forms:
            seen.setdefault(wall_invariants(chi), chi)
        return list(seen.values())
    kept = []
    for chi in forms:
        if not any(is_isomorphic_bruteforce(chi, rep) for rep in kept):
            kept.append(chi)
    return kept
