import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from sympy import Poly, cyclotomic_poly, factorint, symbols
from sympy.functions.combinatorial.numbers import legendre_symbol

_x = symbols("x")


@lru_cache(maxsize=None)
def _cyclotomic_modulus(n):
    return Poly(cyclotomic_poly(n, _x), _x)


@dataclass(frozen=True, eq=False)
class CyclotomicInt:
    """sum_j coeffs[j] * zeta_N^j with integer coefficients, N = conductor.

    Coefficients are stored modulo x^N - 1 only; equality reduces modulo the N-th
    cyclotomic polynomial, so different coefficient vectors may be equal.
    """

    conductor: int
    coeffs: tuple

    def __post_init__(self):
        if self.conductor < 1:
            raise ValueError(f"conductor must be positive, got {self.conductor}")
        folded = [0] * self.conductor
        for j, c in enumerate(self.coeffs):
            folded[j % self.conductor] += int(c)
        object.__setattr__(self, "coeffs", tuple(folded))

    @classmethod
    def integer(cls, value, conductor=1):
        return cls(conductor, (int(value),) + (0,) * (conductor - 1))

    @classmethod
    def root(cls, conductor, j=1):
        """zeta_N^j."""
        coeffs = [0] * conductor
        coeffs[j % conductor] = 1
        return cls(conductor, tuple(coeffs))

    @classmethod
    def from_residues(cls, residues, conductor):
        """sum over a table of exponents: each residue r contributes zeta_N^r."""
        counts = np.bincount(np.mod(np.asarray(residues, dtype=np.int64), conductor), minlength=conductor)
        return cls(conductor, tuple(int(c) for c in counts))

    def lift(self, conductor):
        if conductor % self.conductor:
            raise ValueError(f"cannot lift conductor {self.conductor} to {conductor}")
        step = conductor // self.conductor
        coeffs = [0] * conductor
        for j, c in enumerate(self.coeffs):
            coeffs[j * step] = c
        return CyclotomicInt(conductor, tuple(coeffs))

    def _aligned(self, other):
        if not isinstance(other, CyclotomicInt):
            other = CyclotomicInt.integer(other)
        n = math.lcm(self.conductor, other.conductor)
        return self.lift(n), other.lift(n)

    def __add__(self, other):
        a, b = self._aligned(other)
        return CyclotomicInt(a.conductor, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return CyclotomicInt(self.conductor, tuple(-c for c in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CyclotomicInt(self.conductor, tuple(other * c for c in self.coeffs))
        a, b = self._aligned(other)
        product = np.convolve(np.array(a.coeffs, dtype=object), np.array(b.coeffs, dtype=object))
        return CyclotomicInt(a.conductor, tuple(product))

    __rmul__ = __mul__

    def __pow__(self, k):
        if k < 0:
            raise ValueError("negative powers are not cyclotomic integers in general")
        result = CyclotomicInt.integer(1, self.conductor)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conj(self):
        n = self.conductor
        return CyclotomicInt(n, tuple(self.coeffs[-j % n] for j in range(n)))

    def reduced(self):
        """Coefficients of the canonical representative of degree < phi(N)."""
        poly = Poly(list(reversed(self.coeffs)), _x)
        rest = poly.rem(_cyclotomic_modulus(self.conductor))
        coeffs = [int(c) for c in reversed(rest.all_coeffs())]
        width = _cyclotomic_modulus(self.conductor).degree()
        return tuple(coeffs + [0] * (width - len(coeffs)))

    def is_zero(self):
        return not any(self.reduced())

    def __eq__(self, other):
        if not isinstance(other, (CyclotomicInt, int)):
            return NotImplemented
        a, b = self._aligned(other)
        return (a - b).is_zero()

    __hash__ = None

    def to_complex(self):
        n = self.conductor
        roots = np.exp(2j * np.pi * np.arange(n) / n)
        return complex(np.dot(np.array(self.coeffs, dtype=float), roots))

    def __str__(self):
        terms = [f"{c}*z{self.conductor}^{j}" if j else str(c) for j, c in enumerate(self.coeffs) if c]
        return " + ".join(terms) or "0"


def imaginary_unit():
    return CyclotomicInt.root(4)


def _sqrt_prime(p):
    if p == 2:
        return CyclotomicInt.root(8, 1) + CyclotomicInt.root(8, 7)
    # quadratic Gauss sum g_p = sum_j (j/p) zeta_p^j; g_p = sqrt(p) or i*sqrt(p)
    g = CyclotomicInt(p, tuple(int(legendre_symbol(j, p)) if j else 0 for j in range(p)))
    if p % 4 == 1:
        return g
    return -imaginary_unit() * g


def sqrt_int(m):
    """The positive square root of a positive integer as a cyclotomic integer."""
    if m < 1:
        raise ValueError(f"sqrt_int needs a positive integer, got {m}")
    square, free = squarefree_split(m)
    result = CyclotomicInt.integer(square)
    for p in sorted(factorint(free)):
        result = result * _sqrt_prime(p)
    return result


def squarefree_split(m):
    """m = s^2 * f with f squarefree; returns (s, f)."""
    s, f = 1, 1
    for p, e in factorint(m).items():
        s *= p ** (e // 2)
        if e % 2:
            f *= p
    return s, f
