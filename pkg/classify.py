import json
import math
from dataclasses import dataclass, field

import numpy as np
from sympy import factorint, multiplicity

from abelian import Embedding, make_group, primary_component
from errors import BoundExceededError, DegenerateFormError, InternalConsistencyError, UnsupportedGroupError
from forms import Bicharacter, PhaseQZ, orthogonal_sum, require_bicharacter, restrict
from gauss import legendre, odd_prime_of
from logger import get_logger
from settings import get_settings

log = get_logger("classify")


@dataclass(frozen=True)
class DiagonalBlock:
    """The level-s part of an orthogonal splitting: chi = diag(delta_i / p^s)."""

    p: int
    s: int
    deltas: tuple
    basis: tuple = field(default=(), compare=False, repr=False)

    @property
    def rank(self):
        return len(self.deltas)

    @property
    def determinant(self):
        return math.prod(self.deltas) % self.p

    @property
    def sigma(self):
        return legendre(self.determinant, self.p)


@dataclass(frozen=True)
class WallInvariants:
    """Ranks r_{p,s} and signs sigma_{p,s} per odd prime level; the 2-part is only flagged."""

    entries: tuple = ()
    two_part: bool = False

    def __post_init__(self):
        merged = {}
        for (p, s), r, sigma in self.entries:
            if r:
                old_r, old_sigma = merged.get((p, s), (0, 1))
                merged[(p, s)] = (old_r + r, old_sigma * sigma)
        object.__setattr__(self, "entries", tuple(sorted((key, r, sigma) for key, (r, sigma) in merged.items())))

    @classmethod
    def from_blocks(cls, blocks, two_part=False):
        return cls(tuple(((b.p, b.s), b.rank, b.sigma) for b in blocks), two_part)

    def rank(self, p, s):
        return next((r for key, r, _ in self.entries if key == (p, s)), 0)

    def sigma(self, p, s):
        return next((sigma for key, _, sigma in self.entries if key == (p, s)), 1)

    def merge(self, other):
        """Invariants of an orthogonal sum: ranks add, signs multiply."""
        return WallInvariants(self.entries + other.entries, self.two_part or other.two_part)

    def to_json(self):
        out = {f"{p}^{s}": {"r": r, "sigma": sigma} for (p, s), r, sigma in self.entries}
        if self.two_part:
            out["2-part"] = "unclassified"
        return out

    @classmethod
    def from_json(cls, data):
        entries = []
        two_part = False
        for key, value in data.items():
            if key == "2-part":
                two_part = True
                continue
            p, s = (int(x) for x in key.split("^"))
            entries.append(((p, s), int(value["r"]), int(value["sigma"])))
        return cls(tuple(entries), two_part)

    def __str__(self):
        return json.dumps(self.to_json(), sort_keys=True)


def orthogonal_split_odd_p(form):
    """Diagonalize a bicharacter on an odd p-group, one block per level s.

    Repeatedly takes the lexicographically least element a whose diagonal value has
    maximal order p^s, records delta = chi(a, a) * p^s and continues in the
    orthogonal complement of a.
    """
    chi = require_bicharacter(form)
    p = odd_prime_of(chi.group)
    if p is None:
        return []
    group = chi.group
    n_mod = chi.conductor
    diagonal = chi.diagonal()
    diagonal_orders = n_mod // np.gcd(diagonal, n_mod)
    alive = np.ones(group.order, dtype=bool)
    picked = []
    remaining = group.order
    while remaining > 1:
        candidates = np.where(alive, diagonal_orders, 0)
        best = int(np.argmax(candidates))
        order = int(candidates[best])
        if order == 1:
            raise DegenerateFormError(f"no element with a nontrivial diagonal value in a subgroup of {chi}")
        a = group.element(tuple(group.coordinates[best]))
        delta = int(diagonal[best]) * order // n_mod
        picked.append((multiplicity(p, order), delta, a))
        against_a = np.mod(chi.against_generators @ np.asarray(a.coords, dtype=np.int64), n_mod)
        alive &= against_a == 0
        before, remaining = remaining, int(alive.sum())
        if remaining * order != before:
            raise InternalConsistencyError(f"complement of {a} has the wrong size in {chi}")
    blocks = []
    for s in sorted({s for s, _, _ in picked}):
        level = [(delta, a) for t, delta, a in picked if t == s]
        blocks.append(DiagonalBlock(p, s, tuple(d for d, _ in level), tuple(a for _, a in level)))
    _check_split(chi, blocks)
    log.debug("split %s into levels %s", chi, [(b.s, b.deltas) for b in blocks])
    return blocks


def block_form(blocks):
    """The diagonal bicharacter on (+) Z/p^s described by the blocks."""
    factors = [b.p**b.s for b in blocks for _ in b.deltas]
    values = [PhaseQZ(d, b.p**b.s) for b in blocks for d in b.deltas]
    zero = PhaseQZ()
    gram = tuple(tuple(values[i] if i == j else zero for j in range(len(values))) for i in range(len(values)))
    return Bicharacter(make_group(factors), gram) if factors else Bicharacter(make_group([1]), ((zero,),))


def _check_split(chi, blocks):
    diagonal = block_form(blocks)
    embedding = Embedding(diagonal.group, chi.group, tuple(a.coords for b in blocks for a in b.basis))
    if not embedding.is_injective() or restrict(chi, embedding).gram != diagonal.gram:
        raise InternalConsistencyError(f"orthogonal basis of {chi} does not reproduce a diagonal form")


def primary_forms(form):
    """Restriction of chi to each p-primary component, keyed by p."""
    chi = require_bicharacter(form)
    out = {}
    for p in sorted(factorint(chi.order)):
        sub, embedding = primary_component(chi.group, p)
        out[p] = Bicharacter.from_form(restrict(chi, embedding))
    return out


def wall_invariants(form):
    invariants = WallInvariants()
    for p, component in primary_forms(form).items():
        if p == 2:
            invariants = invariants.merge(WallInvariants(two_part=True))
            continue
        invariants = invariants.merge(WallInvariants.from_blocks(orthogonal_split_odd_p(component)))
    return invariants


def is_isomorphic_odd(first, second):
    for chi in (first, second):
        if chi.order % 2 == 0:
            raise UnsupportedGroupError(f"Wall invariants do not classify forms on {chi.group}; use the brute-force oracle")
    if first.order != second.order:
        return False
    return wall_invariants(first) == wall_invariants(second)


def _order_profile(group):
    return np.bincount(group.element_orders, minlength=group.exponent + 1)


def find_isomorphism(first, second):
    """Images of the generators of first.group in second.group carrying chi1 to chi2, or None."""
    if first.order != second.order:
        return None
    bound = get_settings().bruteforce_bound
    if first.order > bound:
        raise BoundExceededError("brute-force isomorphism search", first.order, bound)
    g1, g2 = first.group, second.group
    if g1.exponent != g2.exponent or not np.array_equal(_order_profile(g1), _order_profile(g2)):
        return None
    n_mod = math.lcm(first.conductor, second.conductor)
    gram1 = first.gram_over(n_mod)
    pairing2 = second.pairing_matrix(n_mod)
    diagonal2 = np.diagonal(pairing2)
    orders2 = g2.element_orders
    pools = [
        np.flatnonzero((d % orders2 == 0) & (diagonal2 == gram1[i, i]))
        for i, d in enumerate(g1.factors)
    ]
    chosen = []

    def extend(i):
        if i == len(pools):
            images = g2.coordinates[chosen]
            return len(np.unique(g2.indices_of(g1.coordinates @ images))) == g1.order
        for y in pools[i]:
            if all(pairing2[y, chosen[j]] == gram1[i, j] for j in range(i)):
                chosen.append(int(y))
                if extend(i + 1):
                    return True
                chosen.pop()
        return False

    if not extend(0):
        return None
    return tuple(g2.element(tuple(g2.coordinates[y])) for y in chosen)


def is_isomorphic_bruteforce(first, second):
    return find_isomorphism(first, second) is not None


def _least_nonresidue(p):
    return next(d for d in range(2, p) if legendre(d, p) == -1)


def diagonal_form(invariants):
    """A diagonal representative with the given Wall invariants."""
    if invariants.two_part:
        raise UnsupportedGroupError("no canonical representative for an unclassified 2-part")
    blocks = []
    for (p, s), r, sigma in invariants.entries:
        deltas = (1,) * (r - 1) + ((1 if sigma == 1 else _least_nonresidue(p)),)
        blocks.append(DiagonalBlock(p, s, deltas))
    forms = [block_form([b]) for b in blocks]
    result = block_form([])
    for chi in forms:
        result = orthogonal_sum(result, chi)
    return result
