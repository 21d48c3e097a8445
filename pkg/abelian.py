import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from sympy import factorint, isprime, multiplicity
from sympy.utilities.iterables import partitions

from errors import InconsistentInputError, ParseError
from logger import get_logger

log = get_logger("abelian")


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """A = Z/d1 + ... + Z/dr, kept exactly as the factor list it was built from."""

    factors: tuple

    def __post_init__(self):
        factors = tuple(int(d) for d in self.factors) or (1,)
        if any(d < 1 for d in factors):
            raise ParseError(f"cyclic orders must be positive, got {list(factors)}")
        object.__setattr__(self, "factors", factors)

    @property
    def rank(self):
        return len(self.factors)

    @property
    def order(self):
        return math.prod(self.factors)

    @property
    def exponent(self):
        return math.lcm(*self.factors)

    @property
    def is_trivial(self):
        return self.order == 1

    def __str__(self):
        return ",".join(str(d) for d in self.factors)

    # Enumeration is lexicographic in coords; the first coordinate varies slowest.

    @cached_property
    def strides(self):
        out = []
        step = 1
        for d in reversed(self.factors):
            out.append(step)
            step *= d
        return np.array(out[::-1], dtype=np.int64)

    @cached_property
    def moduli(self):
        return np.array(self.factors, dtype=np.int64)

    @cached_property
    def coordinates(self):
        """(order x rank) integer matrix, row i holds the coords of the i-th element."""
        grids = np.indices(self.factors, dtype=np.int64).reshape(self.rank, -1)
        return np.ascontiguousarray(grids.T)

    def elements(self):
        return [GroupElement(self, coords) for coords in itertools.product(*(range(d) for d in self.factors))]

    def element(self, coords):
        return GroupElement(self, coords)

    def zero(self):
        return GroupElement(self, (0,) * self.rank)

    def generators(self):
        return [GroupElement(self, tuple(int(i == j) % d for j, d in enumerate(self.factors))) for i in range(self.rank)]

    def index_of(self, coords):
        return int(np.dot(np.mod(np.asarray(coords, dtype=np.int64), self.moduli), self.strides))

    def indices_of(self, coords):
        """Vectorized index_of over the rows of an integer matrix."""
        return np.mod(np.asarray(coords, dtype=np.int64), self.moduli) @ self.strides

    @cached_property
    def addition_table(self):
        coords = self.coordinates
        summed = coords[:, None, :] + coords[None, :, :]
        return self.indices_of(summed.reshape(-1, self.rank)).reshape(self.order, self.order)

    def multiples(self, n):
        """Index of n*a for every element a, in enumeration order."""
        return self.indices_of(n * self.coordinates)

    @cached_property
    def element_orders(self):
        coords = self.coordinates
        per_factor = self.moduli // np.gcd(coords, self.moduli)
        return np.lcm.reduce(per_factor, axis=1) if self.rank else np.ones(self.order, dtype=np.int64)

    def direct_sum(self, other):
        return FiniteAbelianGroup(self.factors + other.factors)


@dataclass(frozen=True)
class GroupElement:
    group: FiniteAbelianGroup = field(repr=False)
    coords: tuple

    def __post_init__(self):
        coords = tuple(self.coords)
        if len(coords) != self.group.rank:
            raise ParseError(f"expected {self.group.rank} coordinates, got {len(coords)}")
        object.__setattr__(self, "coords", tuple(int(a) % d for a, d in zip(coords, self.group.factors)))

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]

    def __add__(self, other):
        return GroupElement(self.group, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return GroupElement(self.group, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, n):
        return GroupElement(self.group, tuple(n * a for a in self.coords))

    @property
    def index(self):
        return self.group.index_of(self.coords)

    @property
    def order(self):
        return math.lcm(*(d // math.gcd(a, d) for a, d in zip(self.coords, self.group.factors)))

    def is_zero(self):
        return not any(self.coords)

    def __str__(self):
        return "(" + ",".join(map(str, self.coords)) + ")"


@dataclass(frozen=True)
class Embedding:
    """Homomorphism source -> target given by the images of the source generators."""

    source: FiniteAbelianGroup
    target: FiniteAbelianGroup
    images: tuple

    def __post_init__(self):
        images = tuple(GroupElement(self.target, tuple(img)) for img in self.images)
        if len(images) != self.source.rank:
            raise ParseError("an embedding needs one image per source generator")
        for d, img in zip(self.source.factors, images):
            if (d * img).coords != self.target.zero().coords:
                raise ParseError(f"image {img} does not have order dividing {d}")
        object.__setattr__(self, "images", images)

    @cached_property
    def matrix(self):
        """(source rank x target rank) integer matrix of image coordinates."""
        return np.array([img.coords for img in self.images], dtype=np.int64).reshape(self.source.rank, self.target.rank)

    def __call__(self, coords):
        return GroupElement(self.target, tuple(np.asarray(coords, dtype=np.int64) @ self.matrix))

    def is_injective(self):
        images = self.target.indices_of(self.source.coordinates @ self.matrix)
        return len(np.unique(images)) == self.source.order


@dataclass(frozen=True)
class PrimaryRanks:
    """r_{p,s}: the number of Z/p^s summands of the p-primary part, zero ranks omitted."""

    p: int
    ranks: tuple = ()

    def __post_init__(self):
        ranks = dict(self.ranks)
        object.__setattr__(self, "ranks", tuple(sorted((int(s), int(r)) for s, r in ranks.items() if r)))

    def as_dict(self):
        return dict(self.ranks)

    def rank(self, s):
        return self.as_dict().get(s, 0)

    @property
    def log_order(self):
        return sum(s * r for s, r in self.ranks)


def parse_group(text):
    """Read a group literal such as '2,12'."""
    text = str(text).strip()
    if not text:
        return make_group([])
    try:
        factors = [int(part) for part in text.split(",")]
    except ValueError as e:
        raise ParseError(f"bad group literal {text!r}: {e}") from e
    return make_group(factors)


def make_group(factors):
    return FiniteAbelianGroup(tuple(factors))


def torsion_order(group, k):
    if k < 0:
        raise ParseError(f"k must be nonnegative, got {k}")
    return math.prod(math.gcd(k, d) if k else d for d in group.factors)


def torsion_subgroup(group, k):
    if k < 0:
        raise ParseError(f"k must be nonnegative, got {k}")
    killed = np.all(np.mod(k * group.coordinates, group.moduli) == 0, axis=1)
    return [GroupElement(group, tuple(row)) for row in group.coordinates[killed]]


def _require_prime(p):
    if not isprime(p):
        raise ParseError(f"{p} is not a prime")


def primary_ranks(group, p):
    _require_prime(p)
    ranks = {}
    for d in group.factors:
        s = multiplicity(p, d)
        if s:
            ranks[s] = ranks.get(s, 0) + 1
    return PrimaryRanks(p, tuple(ranks.items()))


def primary_component(group, p):
    """The p-primary subgroup A^(p) and its embedding, one cyclic factor per p-divisible d_i."""
    _require_prime(p)
    factors = []
    images = []
    for i, d in enumerate(group.factors):
        s = multiplicity(p, d)
        if not s:
            continue
        cofactor = d // p**s
        factors.append(p**s)
        images.append(tuple(cofactor if j == i else 0 for j in range(group.rank)))
    if not factors:
        sub = make_group([1])
        return sub, Embedding(sub, group, (group.zero().coords,))
    sub = make_group(factors)
    return sub, Embedding(sub, group, tuple(images))


def reconstruct_primary_from_torsion(orders, p):
    """Invert m -> |A_{p^m}| into the ranks r_{p,s}.

    Uses log_p(|A_{p^(m+1)}| / |A_{p^m}|) = r_{p,m+1} + r_{p,m+2} + ..., with
    |A_{p^0}| = 1 and the table assumed to reach an m where p^m kills A^(p).
    """
    _require_prime(p)
    orders = {int(m): int(o) for m, o in dict(orders).items()}
    if not orders:
        return PrimaryRanks(p)
    top = max(orders)
    if sorted(orders) != list(range(1, top + 1)):
        raise InconsistentInputError(f"torsion orders must be given for m = 1..{top}, got {sorted(orders)}")
    sequence = [1] + [orders[m] for m in range(1, top + 1)]
    tails = []
    for lower, upper in zip(sequence, sequence[1:]):
        if upper % lower:
            raise InconsistentInputError(f"|A_p^m| sequence {sequence} is not divisible step by step")
        ratio = upper // lower
        if ratio == 1:
            tails.append(0)
            continue
        exponent = multiplicity(p, ratio)
        if p**exponent != ratio:
            raise InconsistentInputError(f"ratio {ratio} in {sequence} is not a power of {p}")
        tails.append(exponent)
    tails.append(0)
    ranks = {}
    for s in range(1, len(tails)):
        r = tails[s - 1] - tails[s]
        if r < 0:
            raise InconsistentInputError(f"torsion orders {sequence} do not come from a {p}-group")
        ranks[s] = r
    return PrimaryRanks(p, tuple(ranks.items()))


def groups_of_order(n):
    """One representative of every isomorphism type of order n, as a list of prime-power factors."""
    if n < 1:
        raise ParseError(f"group order must be positive, got {n}")
    if n == 1:
        return [make_group([1])]
    per_prime = []
    for p, e in sorted(factorint(n).items()):
        shapes = []
        for part in partitions(e):
            shape = sorted((s for s, count in part.items() for _ in range(count)), reverse=True)
            shapes.append([p**s for s in shape])
        per_prime.append(sorted(shapes))
    return [make_group([d for block in combo for d in block]) for combo in itertools.product(*per_prime)]


def groups_up_to(max_order, odd_only=False):
    out = []
    for n in range(1, max_order + 1):
        if odd_only and n % 2 == 0:
            continue
        out.extend(groups_of_order(n))
    log.debug("%d groups of order <= %d (odd_only=%s)", len(out), max_order, odd_only)
    return out
