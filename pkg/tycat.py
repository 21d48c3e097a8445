import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from abelian import torsion_order
from cyclotomic import CyclotomicInt
from errors import InternalConsistencyError, ParseError
from forms import PhaseQZ, homogeneous_base_map, require_bicharacter
from gauss import AlgebraicUnit, gauss_sum_phases, zeta_sequence, zeta_via_prin
from logger import get_logger
from surd import SurdValue

log = get_logger("tycat")

LensInvariant = SurdValue


@dataclass(frozen=True)
class TYData:
    """The Tambara-Yamagami category TY(A, chi, nu): simples A and m, dimension 2|A|."""

    chi: object
    nu: int

    def __post_init__(self):
        if self.nu not in (1, -1):
            raise ParseError(f"nu must be +1 or -1, got {self.nu}")
        object.__setattr__(self, "chi", require_bicharacter(self.chi))

    @property
    def group(self):
        return self.chi.group

    @property
    def n(self):
        return self.chi.order

    @property
    def dimension(self):
        return 2 * self.n

    @cached_property
    def catalog(self):
        return center_simples(self)

    def describe(self):
        return f"{self.chi.literal()}; nu={self.nu:+d}"

    def __str__(self):
        return self.describe()


@dataclass(frozen=True)
class CenterSimple:
    """A simple object of the center: X(a, eps), Y(a, b) or Z(c, delta).

    label holds the group data; for Z it is the shift c of the refinement
    mu0 + chi(., c). dim_squared is 1, 4 or n, and the twist is exact.
    """

    kind: str
    label: tuple
    dim_squared: int
    twist: PhaseQZ
    gamma: PhaseQZ = None

    @property
    def dim(self):
        return math.sqrt(self.dim_squared)

    def __str__(self):
        parts = ",".join(str(x) for x in self.label)
        return f"{self.kind}({parts})"


def center_simples(category):
    """2n objects X(a, eps), n(n-1)/2 objects Y(a, b) and 2n objects Z(mu, delta)."""
    chi, nu, n = category.chi, category.nu, category.n
    elements = chi.group.elements()
    catalog = []
    for a in elements:
        twist = -chi.pair(a, a)
        for eps in twist.halves():
            catalog.append(CenterSimple("X", (a, eps), 1, twist))
    for i, a in enumerate(elements):
        for b in elements[i + 1:]:
            catalog.append(CenterSimple("Y", (a, b), 4, -chi.pair(a, b)))
    sign = PhaseQZ(0 if nu == 1 else 1, 2)
    for c, gamma in zip(elements, gauss_sum_phases(chi)):
        for delta in (gamma + sign).halves():
            catalog.append(CenterSimple("Z", (c, delta), n, delta, gamma))
    expected = 2 * n + n * (n - 1) // 2 + 2 * n
    if len(catalog) != expected:
        raise InternalConsistencyError(f"center of {category} has {len(catalog)} simples, expected {expected}")
    log.debug("center of %s: %d simple objects", category, len(catalog))
    return catalog


def global_dim_center(category):
    total = sum(simple.dim_squared for simple in category.catalog)
    if total != 4 * category.n**2:
        raise InternalConsistencyError(f"global dimension {total} of the center of {category} is not 4n^2")
    return total


def tau_k_direct(category, k):
    """tau_k = sum_i theta_i^k dim(i)^2 over the catalog, exactly in Z[zeta_N]."""
    if k < 0:
        raise ParseError(f"k must be nonnegative, got {k}")
    catalog = category.catalog
    conductor = math.lcm(1, *(simple.twist.denominator for simple in catalog))
    residues = np.array([k * simple.twist.numerator_over(conductor) % conductor for simple in catalog], dtype=np.int64)
    weights = np.array([simple.dim_squared for simple in catalog], dtype=np.int64)
    coeffs = np.zeros(conductor, dtype=np.int64)
    np.add.at(coeffs, residues, weights)
    return CyclotomicInt(conductor, tuple(int(c) for c in coeffs))


def tau_k_closed(category, k, zeta=None):
    """2n|A_k| for odd k; 2n(|A_k| + nu^(k/2) |A|^(1/2) |A_{k/2}|^(1/2) zeta_{k/2}) for even k."""
    if k < 0:
        raise ParseError(f"k must be nonnegative, got {k}")
    n, group = category.n, category.group
    value = SurdValue.rational(2 * n * torsion_order(group, k))
    if k % 2:
        return value
    half = k // 2
    if zeta is None:
        zeta = zeta_via_prin(category.chi, half)
    return value + SurdValue.from_unit_sqrt(2 * n * category.nu**half, n * torsion_order(group, half), zeta)


def lens_invariant(category, k, zeta=None):
    """|L_k| = tau_k / (2n)^2; zeta, if given, is zeta_{k/2}(chi)."""
    return tau_k_closed(category, k, zeta) / (2 * category.n) ** 2


def lens_invariant_direct(category, k):
    return tau_k_direct(category, k).to_complex() / (2 * category.n) ** 2


def lens_sequence(category, k_max, zetas=None):
    """|L_0| .. |L_k_max|; zetas[j] = zeta_j(chi) may be shared between the two values of nu."""
    if zetas is None:
        zetas = zeta_sequence(category.chi, k_max // 2)
    return tuple(lens_invariant(category, k, zetas[k // 2] if k % 2 == 0 else None) for k in range(k_max + 1))


def fs_normalized(category, k):
    """|A_k|^(-1/2) nu_{2k}(m) = nu^k zeta_k: Zero or an 8th root of unity."""
    return AlgebraicUnit.sign(category.nu**k) * zeta_via_prin(category.chi, k)


def fs_indicator(category, k):
    """nu_{2k}(m) = nu^k |A_k|^(1/2) zeta_k(chi)."""
    if k < 1:
        raise ParseError(f"k must be at least 1, got {k}")
    zeta = zeta_via_prin(category.chi, k)
    return SurdValue.from_unit_sqrt(Fraction(category.nu**k), torsion_order(category.group, k), zeta)


def fs_indicator_from_catalog(category, k):
    """sum over the Z objects of delta^(2k), divided by 2|A|^(1/2)."""
    total = sum(np.exp(2j * np.pi * float((2 * k * s.twist).fraction)) for s in category.catalog if s.kind == "Z")
    return complex(total) / (2 * math.sqrt(category.n))


def fs_vanishes(category, k):
    """nu_{2k}(m) = 0 iff -k mu0 is nontrivial on A_k, the radical of chi^-k."""
    mu = homogeneous_base_map(category.chi).scaled(-k)
    return bool(np.any(mu.on_radical()))
