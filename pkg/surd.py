from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

from sympy import factorint

from cyclotomic import CyclotomicInt, imaginary_unit, sqrt_int, squarefree_split
from errors import ParseError

# signs of (real, imaginary) in sqrt(m) * zeta8^j = sqrt(2m)/2 * (+-1 +- i), odd j
_ODD_ROOT_SIGNS = {1: (1, 1), 3: (-1, 1), 5: (-1, -1), 7: (1, -1)}


@dataclass(frozen=True)
class SurdValue:
    """(re_rat + re_coef*sqrt(m)) + i*(im_rat + im_coef*sqrt(m)) with squarefree m."""

    re_rat: Fraction = Fraction(0)
    re_coef: Fraction = Fraction(0)
    im_rat: Fraction = Fraction(0)
    im_coef: Fraction = Fraction(0)
    m: int = 1

    def __post_init__(self):
        values = [Fraction(x) for x in (self.re_rat, self.re_coef, self.im_rat, self.im_coef)]
        m = int(self.m)
        if m < 1 or any(e > 1 for e in factorint(m).values()):
            raise ParseError(f"radicand must be a squarefree positive integer, got {m}")
        if m == 1:
            values = [values[0] + values[1], Fraction(0), values[2] + values[3], Fraction(0)]
        if values[1] == 0 and values[3] == 0:
            m = 1
        for name, value in zip(("re_rat", "re_coef", "im_rat", "im_coef"), values):
            object.__setattr__(self, name, value)
        object.__setattr__(self, "m", m)

    @classmethod
    def rational(cls, q):
        return cls(re_rat=Fraction(q))

    @classmethod
    def from_unit_sqrt(cls, coefficient, radicand, unit):
        """coefficient * sqrt(radicand) * unit for a Zero or 8th-root AlgebraicUnit."""
        if unit.is_zero() or coefficient == 0:
            return cls()
        if not unit.is_root():
            raise ValueError(f"{unit} has no exact surd form")
        square, free = squarefree_split(radicand)
        c = Fraction(coefficient) * square
        j = unit.j
        if j in (0, 4):
            return cls(re_coef=c if j == 0 else -c, m=free)
        if j in (2, 6):
            return cls(im_coef=c if j == 2 else -c, m=free)
        re_sign, im_sign = _ODD_ROOT_SIGNS[j]
        if free % 2:
            c, free = c / 2, 2 * free
        else:
            free = free // 2
        return cls(re_coef=re_sign * c, im_coef=im_sign * c, m=free)

    def _check_radicand(self, other):
        if self.m != other.m and self.m != 1 and other.m != 1:
            raise ValueError(f"cannot combine sqrt({self.m}) and sqrt({other.m}) in one surd")
        return max(self.m, other.m)

    def __add__(self, other):
        if not isinstance(other, SurdValue):
            other = SurdValue.rational(other)
        m = self._check_radicand(other)
        return SurdValue(
            self.re_rat + other.re_rat,
            self.re_coef + other.re_coef,
            self.im_rat + other.im_rat,
            self.im_coef + other.im_coef,
            m,
        )

    __radd__ = __add__

    def __neg__(self):
        return SurdValue(-self.re_rat, -self.re_coef, -self.im_rat, -self.im_coef, self.m)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, q):
        q = Fraction(q)
        return SurdValue(q * self.re_rat, q * self.re_coef, q * self.im_rat, q * self.im_coef, self.m)

    __rmul__ = __mul__

    def __truediv__(self, q):
        return self * (1 / Fraction(q))

    def is_zero(self):
        return not any((self.re_rat, self.re_coef, self.im_rat, self.im_coef))

    @cached_property
    def value(self):
        root = self.m**0.5
        return complex(float(self.re_rat) + float(self.re_coef) * root, float(self.im_rat) + float(self.im_coef) * root)

    def to_complex(self):
        return self.value

    def to_cyclotomic(self):
        """Exact embedding into a cyclotomic field; needs integral coefficients."""
        parts = (self.re_rat, self.re_coef, self.im_rat, self.im_coef)
        if any(x.denominator != 1 for x in parts):
            raise ValueError(f"{self} has non-integral coefficients")
        a, b, c, d = (int(x) for x in parts)
        root = sqrt_int(self.m)
        i = imaginary_unit()
        return CyclotomicInt.integer(a) + root * b + i * (CyclotomicInt.integer(c) + root * d)

    def to_json(self):
        return {
            "re": [_rat(self.re_rat), _rat(self.re_coef)],
            "im": [_rat(self.im_rat), _rat(self.im_coef)],
            "m": self.m,
        }

    @classmethod
    def from_json(cls, data):
        try:
            (a, b), (c, d) = data["re"], data["im"]
            return cls(Fraction(a), Fraction(b), Fraction(c), Fraction(d), int(data["m"]))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"bad surd JSON {data!r}") from e

    def __str__(self):
        real = _linear(self.re_rat, self.re_coef, self.m)
        imag = _linear(self.im_rat, self.im_coef, self.m)
        if imag == "0":
            return real
        if real == "0":
            return f"i*({imag})"
        return f"{real} + i*({imag})"


def _rat(q):
    return f"{q.numerator}/{q.denominator}"


def _linear(rational, coefficient, m):
    terms = []
    if rational:
        terms.append(str(rational))
    if coefficient:
        term = f"sqrt({m})" if abs(coefficient) == 1 else f"{abs(coefficient)}*sqrt({m})"
        if terms:
            terms.append(("- " if coefficient < 0 else "+ ") + term)
        else:
            terms.append(("-" if coefficient < 0 else "") + term)
    return " ".join(terms) or "0"
