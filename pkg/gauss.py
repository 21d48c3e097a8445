import math
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
from sympy import factorint, isprime, multiplicity

from abelian import torsion_order
from cyclotomic import CyclotomicInt, sqrt_int
from errors import DegenerateFormError, InternalConsistencyError, ParseError, UnsupportedGroupError
from forms import Bicharacter, PhaseQZ, QuadraticMap, homogeneous_base_map, is_homogeneous, require_bicharacter
from logger import get_logger
from settings import get_settings

log = get_logger("gauss")


@dataclass(frozen=True)
class AlgebraicUnit:
    """Exactly zero, an 8th root of unity zeta8^j, or a unit that failed to snap."""

    kind: str
    j: int = 0
    value: complex = 0j

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def one(cls):
        return cls("root", 0)

    @classmethod
    def eighth_root(cls, j):
        return cls("root", int(j) % 8)

    @classmethod
    def unit(cls, value):
        return cls("unit", 0, complex(value))

    @classmethod
    def sign(cls, s):
        return cls.eighth_root(0 if s > 0 else 4)

    @classmethod
    def parse(cls, text):
        text = text.strip()
        if text == "0":
            return cls.zero()
        if text.startswith("zeta8^"):
            return cls.eighth_root(int(text[len("zeta8^"):]))
        raise ParseError(f"not an algebraic unit literal: {text!r}")

    def is_zero(self):
        return self.kind == "zero"

    def is_root(self):
        return self.kind == "root"

    @property
    def phase(self):
        if not self.is_root():
            raise ValueError(f"{self} has no exact phase")
        return PhaseQZ(self.j, 8)

    def to_complex(self):
        if self.kind == "zero":
            return 0j
        if self.kind == "root":
            return complex(np.exp(2j * np.pi * self.j / 8))
        return self.value

    def to_cyclotomic(self):
        if self.kind == "unit":
            raise ValueError("an unsnapped unit has no exact form")
        if self.kind == "zero":
            return CyclotomicInt.integer(0, 8)
        return CyclotomicInt.root(8, self.j)

    def __mul__(self, other):
        if self.is_zero() or other.is_zero():
            return AlgebraicUnit.zero()
        if self.is_root() and other.is_root():
            return AlgebraicUnit.eighth_root(self.j + other.j)
        return snap(self.to_complex() * other.to_complex())

    def __pow__(self, k):
        if k == 0:
            return AlgebraicUnit.one()
        if self.is_zero():
            return self
        if self.is_root():
            return AlgebraicUnit.eighth_root(self.j * k)
        return snap(self.value**k)

    def conj(self):
        if self.is_root():
            return AlgebraicUnit.eighth_root(-self.j)
        if self.kind == "unit":
            return AlgebraicUnit.unit(self.value.conjugate())
        return self

    def __str__(self):
        if self.kind == "zero":
            return "0"
        if self.kind == "root":
            return f"zeta8^{self.j}"
        return f"unit({self.value.real:.12g}{self.value.imag:+.12g}j)"

    def to_json(self):
        z = self.to_complex()
        return {"value": str(self), "numeric": [z.real, z.imag]}


def snap(z, tolerance=None, warn=True):
    """Round a complex number to Zero or the nearest 8th root of unity when within tolerance."""
    return snap_many([z], tolerance, warn)[0]


def snap_many(values, tolerance=None, warn=True):
    """snap over an array of complex numbers."""
    tolerance = tolerance or get_settings().snap_tolerance
    z = np.asarray(values, dtype=complex).ravel()
    js = np.mod(np.rint(np.angle(z) / (np.pi / 4)).astype(np.int64), 8)
    zero = np.abs(z) < tolerance
    root = np.abs(z - _roots(8)[js]) < tolerance
    out = []
    for value, j, is_zero, is_root in zip(z, js, zero, root):
        if is_zero:
            out.append(AlgebraicUnit.zero())
        elif is_root:
            out.append(AlgebraicUnit.eighth_root(j))
        else:
            if warn:
                log.warning("value %s did not snap to 0 or an 8th root of unity", value)
            out.append(AlgebraicUnit.unit(value))
    return out


@lru_cache(maxsize=256)
def _roots(conductor):
    return np.exp(2j * np.pi * np.arange(conductor) / conductor)


def _sum_table(table, conductor):
    counts = np.bincount(table, minlength=conductor)
    return complex(counts @ _roots(conductor))


def gauss_sum(mu):
    """gamma(mu) = |A|^(-1/2) |radical|^(-1/2) sum_a mu(a)."""
    if np.any(mu.on_radical()):
        return AlgebraicUnit.zero()
    radical_size = len(mu.form.radical_indices)
    total = _sum_table(mu.table, mu.conductor) / math.sqrt(mu.group.order * radical_size)
    value = snap(total, warn=False)
    if value.is_zero():
        raise InternalConsistencyError(f"gauss sum vanished although mu is trivial on the radical of {mu.form}")
    if not value.is_root():
        if is_homogeneous(mu):
            raise InternalConsistencyError(f"gauss sum of a homogeneous map on {mu.form} is not an 8th root: {total}")
        value = AlgebraicUnit.unit(total / abs(total))
    return value


def gauss_sum_exact(mu):
    """sum_a mu(a) in Z[zeta_N] with N = lcm(2 exponent, 8)."""
    conductor = math.lcm(2 * mu.group.exponent, 8, mu.conductor)
    return CyclotomicInt.from_residues(mu.table * (conductor // mu.conductor), conductor)


def gauss_sum_phases(form):
    """Exact phase of gamma(mu0 + chi(., c)) for every c, in enumeration order.

    For nondegenerate chi, gamma(mu0 + chi(., c)) = gamma(mu0) * mu0(c)^-1.
    """
    chi = require_bicharacter(form)
    mu0 = homogeneous_base_map(chi)
    base = gauss_sum(mu0)
    return tuple(base.phase - PhaseQZ(int(v), mu0.conductor) for v in mu0.table)


def _require_nondegenerate(form):
    try:
        return require_bicharacter(form)
    except DegenerateFormError as e:
        raise DegenerateFormError(f"zeta_k is only defined for nondegenerate forms: {e}") from e


def _require_ks(ks):
    ks = np.asarray(ks, dtype=np.int64).ravel()
    if np.any(ks < 0):
        raise ParseError(f"k must be nonnegative, got {int(ks.min())}")
    return ks


@dataclass(frozen=True)
class ZetaData:
    """What zeta_k(chi) needs from chi, computed once and shared by every k."""

    chi: Bicharacter
    mu0: QuadraticMap

    @classmethod
    def of(cls, form, base=None):
        chi = _require_nondegenerate(form)
        if base is None:
            return cls(chi, homogeneous_base_map(chi))
        if not isinstance(base, QuadraticMap) or not is_homogeneous(base):
            raise ParseError("zeta_k needs a homogeneous quadratic map as its base")
        return cls(chi, base)

    @cached_property
    def gamma0(self):
        return gauss_sum(self.mu0)

    @cached_property
    def refinement_sums(self):
        """gamma(mu0 + chi(., c)) for every c, summed directly."""
        conductor = self.mu0.conductor
        # column c holds mu0(a) + chi(a, c) for all a
        shifted = np.mod(self.mu0.table[:, None] + self.chi.pairing_matrix(conductor), conductor)
        return _roots(conductor)[shifted].sum(axis=0) / math.sqrt(self.chi.order)

    @cached_property
    def blocks(self):
        from classify import orthogonal_split_odd_p

        return orthogonal_split_odd_p(self.chi)

    def torsion_orders(self, ks):
        return np.array([torsion_order(self.chi.group, int(k)) for k in ks], dtype=np.int64)

    def bruteforce(self, ks):
        """|A|^(-1/2) |A_k|^(-1/2) sum over Q_chi of gamma(mu)^k, for every k in ks."""
        ks = _require_ks(ks)
        totals = (self.refinement_sums[None, :] ** ks[:, None]).sum(axis=1)
        totals = totals / np.sqrt(self.chi.order * self.torsion_orders(ks))
        return [AlgebraicUnit.one() if k == 0 else value for k, value in zip(ks, snap_many(totals))]

    def scaled_gauss_sums(self, ms):
        """gamma(m mu0) for every m in ms; the radical of chi^m is the m-torsion since chi is nondegenerate."""
        ms = np.asarray(ms, dtype=np.int64).ravel()
        conductor = self.mu0.conductor
        values = np.mod(ms[:, None] * self.mu0.table[None, :], conductor)
        killed = np.mod(ms[:, None], self.chi.group.element_orders[None, :]) == 0
        nontrivial = np.any(killed & (values != 0), axis=1)
        totals = _roots(conductor)[values].sum(axis=1) / np.sqrt(self.chi.order * killed.sum(axis=1))
        out = []
        for m, skip, value in zip(ms, nontrivial, snap_many(totals, warn=False)):
            if skip:
                out.append(AlgebraicUnit.zero())
            elif not value.is_root():
                raise InternalConsistencyError(f"gauss sum of {m} mu0 on {self.chi.literal()} is not an 8th root: {value}")
            else:
                out.append(value)
        return out

    def via_prin(self, ks):
        """gamma(-k mu0) gamma(mu0)^k for every k in ks."""
        ks = _require_ks(ks)
        scaled = self.scaled_gauss_sums(-ks)
        return [AlgebraicUnit.one() if k == 0 else g * self.gamma0**int(k) for k, g in zip(ks, scaled)]


def zeta_bruteforce(form, k, data=None):
    """zeta_k(chi) = |A|^(-1/2) |A_k|^(-1/2) sum over all quadratic refinements of gamma(mu)^k."""
    data = data or ZetaData.of(form)
    return data.bruteforce([k])[0]


def zeta_via_prin(form, k, base=None, data=None):
    """zeta_k(chi) = gamma(-k mu0) gamma(mu0)^k for a homogeneous refinement mu0."""
    data = data or ZetaData.of(form, base)
    return data.via_prin([k])[0]


def zeta_sequence(form, k_max, method="prin", data=None):
    """[zeta_0, .., zeta_k_max] by the named method, sharing the per-form data."""
    data = data or ZetaData.of(form)
    ks = range(k_max + 1)
    if method == "brute":
        return data.bruteforce(ks)
    if method == "prin":
        return data.via_prin(ks)
    if method == "closed":
        return [zeta_closed_form_p(form, k, data) for k in ks]
    raise ParseError(f"unknown method {method!r}")


def _epsilon(a):
    return AlgebraicUnit.eighth_root(2 if a % 4 == 3 else 0)


def odd_prime_of(group):
    primes = factorint(group.order)
    if group.order == 1:
        return None
    if len(primes) != 1 or 2 in primes:
        raise UnsupportedGroupError(f"closed forms need an odd prime power order, got |A| = {group.order}")
    return next(iter(primes))


def zeta_closed_form_p(form, k, data=None):
    """zeta_k from the Wall data of an odd p-group: prod_s beta_{k,s}^{r_s} sigma_s^{alpha_{k,s}}."""
    data = data or ZetaData.of(form)
    p = odd_prime_of(data.chi.group)
    if k < 0:
        raise ParseError(f"k must be nonnegative, got {k}")
    if k == 0 or p is None:
        return AlgebraicUnit.one()
    result = AlgebraicUnit.one()
    for block in data.blocks:
        s = block.s
        t = min(multiplicity(p, k), s)
        h = (p**s + 1) // 2
        alpha = k * s + s - t
        beta = _epsilon(p**s) ** k * _epsilon(p ** (s - t)).conj()
        beta = beta * AlgebraicUnit.sign(legendre(h, p) ** alpha)
        if t < s:
            beta = beta * AlgebraicUnit.sign(legendre(k // p**t, p) ** (s - t))
        result = result * beta ** len(block.deltas) * AlgebraicUnit.sign(block.sigma**alpha)
    return result


@dataclass(frozen=True)
class GaussValue:
    """p^(half_power/2) * unit, the closed form of a classical quadratic Gauss sum."""

    p: int
    half_power: int
    unit: AlgebraicUnit

    def to_complex(self):
        return self.p ** (self.half_power / 2) * self.unit.to_complex()

    def exact(self):
        return sqrt_int(self.p**self.half_power) * self.unit.to_cyclotomic()

    def __str__(self):
        return f"{self.p}^({self.half_power}/2)*{self.unit}"


def classical_gauss(d, p, s):
    """Closed form of sum_{j < p^s} exp(2 pi i d j^2 / p^s)."""
    _require_odd_prime(p)
    if s < 1:
        raise ParseError(f"s must be at least 1, got {s}")
    t = s if d % p**s == 0 else multiplicity(p, abs(d))
    unit = _epsilon(p ** (s - t))
    if t < s:
        unit = unit * AlgebraicUnit.sign(legendre(d // p**t, p) ** (s - t))
    return GaussValue(p, s + t, unit)


def direct_gauss_sum(d, p, s, exact=False):
    q = p**s
    residues = np.mod(d * np.arange(q, dtype=np.int64) ** 2, q)
    if exact:
        return CyclotomicInt.from_residues(residues, q)
    return _sum_table(residues, q)


def _require_odd_prime(p):
    if p == 2 or not isprime(p):
        raise ParseError(f"{p} is not an odd prime")


def legendre(d, p):
    """(d/p) by Euler's criterion."""
    _require_odd_prime(p)
    if d % p == 0:
        raise ParseError(f"legendre symbol ({d}/{p}) is undefined: {p} divides {d}")
    return 1 if pow(d % p, (p - 1) // 2, p) == 1 else -1
