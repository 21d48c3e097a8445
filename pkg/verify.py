import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np

from errors import BoundExceededError
from logger import get_logger
from settings import get_settings

log = get_logger("verify")


@dataclass(frozen=True)
class FSymbols:
    """Associator data of TY(A, chi, nu) in the multiplicity-free F-symbol basis.

    Simples are the group elements 0..n-1 (enumeration order) and m = n.
    [F^{abc}_d]_{ef} has e in a*b and f in b*c. All entries are 1 except
    F^{a m b}_m = F^{m a m}_b = chi(a, b) and F^{m m m}_m = nu n^(-1/2) chi(e, f)^-1.
    """

    n: int
    nu: int
    pairing: np.ndarray = field(repr=False)
    addition: np.ndarray = field(repr=False)
    mmm_scale: float = 1.0
    amb_factor: bool = True

    @classmethod
    def from_category(cls, category):
        chi = category.chi
        conductor = chi.conductor
        pairing = np.exp(2j * np.pi * chi.pairing_matrix() / conductor)
        return cls(category.n, category.nu, pairing, chi.group.addition_table)

    @property
    def m(self):
        return self.n

    @property
    def simples(self):
        return range(self.n + 1)

    def label(self, x):
        return "m" if x == self.m else str(x)

    def fuse(self, x, y):
        if x == self.m and y == self.m:
            return range(self.n)
        if x == self.m or y == self.m:
            return (self.m,)
        return (int(self.addition[x, y]),)

    def admissible(self, x, y, z):
        return z in self.fuse(x, y)

    def inverse(self, a):
        return a if a == self.m else int(np.flatnonzero(self.addition[a] == 0)[0])

    def __call__(self, a, b, c, d, e, f):
        m = self.m
        if not (self.admissible(a, b, e) and self.admissible(e, c, d) and self.admissible(b, c, f) and self.admissible(a, f, d)):
            return 0j
        pattern = (a == m, b == m, c == m)
        if pattern == (False, True, False):
            return complex(self.pairing[a, c]) if self.amb_factor else 1 + 0j
        if pattern == (True, False, True):
            return complex(self.pairing[b, d])
        if pattern == (True, True, True):
            return self.mmm_scale * self.nu / math.sqrt(self.n) * complex(np.conj(self.pairing[e, f]))
        return 1 + 0j

    def matrix(self, a, b, c, d):
        rows = [e for e in self.simples if self.admissible(a, b, e) and self.admissible(e, c, d)]
        cols = [f for f in self.simples if self.admissible(b, c, f) and self.admissible(a, f, d)]
        values = np.array([[self(a, b, c, d, e, f) for f in cols] for e in rows], dtype=complex).reshape(len(rows), len(cols))
        return rows, cols, values

    # negative controls

    def with_broken_pairing(self, turn=0.1):
        """Multiply chi(x, x) of the first nonzero x by exp(2 pi i turn); the table stops being bilinear."""
        pairing = self.pairing.copy()
        pairing[1, 1] *= np.exp(2j * np.pi * turn)
        return replace(self, pairing=pairing)

    def with_scaled_mmm(self, scale=2.0):
        return replace(self, mmm_scale=scale)

    def without_amb_factor(self):
        return replace(self, amb_factor=False)


@dataclass(frozen=True)
class QuadrupleResult:
    quadruple: tuple
    residual: float
    passed: bool


@dataclass
class PentagonReport:
    """One QuadrupleResult per (a, b, c, d); failures repeats the failing ones as dicts."""

    checked: int = 0
    equations: int = 0
    quadruples: list = field(default_factory=list)
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures


def _check_bound(n):
    bound = get_settings().pentagon_bound
    if n > bound:
        raise BoundExceededError("structural verification", n, bound)


def check_pentagon(fsymbols, tolerance=None):
    """[F^{fcd}_e]_{gl} [F^{abl}_e]_{fk} = sum_h [F^{abc}_g]_{fh} [F^{ahd}_e]_{gk} [F^{bcd}_k]_{hl}."""
    tolerance = tolerance or get_settings().numeric_tolerance
    F = fsymbols
    report = PentagonReport()
    for a, b, c, d in itertools.product(F.simples, repeat=4):
        worst = 0.0
        for e in F.simples:
            for f in F.fuse(a, b):
                for g in F.fuse(f, c):
                    if not F.admissible(g, d, e):
                        continue
                    for l in F.fuse(c, d):
                        for k in F.fuse(b, l):
                            if not F.admissible(a, k, e):
                                continue
                            lhs = F(f, c, d, e, g, l) * F(a, b, l, e, f, k)
                            rhs = sum(F(a, b, c, g, f, h) * F(a, h, d, e, g, k) * F(b, c, d, k, h, l) for h in F.fuse(b, c))
                            worst = max(worst, abs(lhs - rhs))
                            report.equations += 1
        labels = tuple(F.label(x) for x in (a, b, c, d))
        report.checked += 1
        report.quadruples.append(QuadrupleResult(labels, worst, worst <= tolerance))
        if worst > tolerance:
            report.failures.append({"quadruple": list(labels), "residual": worst})
    log.info("pentagon: %d quadruples, %d equations, %d failures", report.checked, report.equations, len(report.failures))
    return report


def verify_pentagon(category, fsymbols=None):
    _check_bound(category.n)
    return check_pentagon(fsymbols or FSymbols.from_category(category))


@dataclass(frozen=True)
class DualityCoefficients:
    """Scalars of the duality maps of m (the group-like objects use 1 throughout).

    Left: coev_m includes 1 into m*m with left_coev, ev_m projects with left_ev.
    Right: coev'_m includes with right_coev, ev'_m projects with right_ev.
    """

    left_coev: float
    left_ev: float
    right_coev: float
    right_ev: float

    @classmethod
    def for_category(cls, category):
        root = math.sqrt(category.n)
        return cls(1.0, category.nu * root, float(category.nu), root)

    def with_scaled_left_ev(self, scale=2.0):
        return replace(self, left_ev=self.left_ev * scale)


@dataclass
class DualityReport:
    zigzags: dict = field(default_factory=dict)
    dims: dict = field(default_factory=dict)
    fs_indicator_m: float = None
    failures: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failures


def _unit_entry(F, x, y, z, inverse=False):
    rows, cols, values = F.matrix(x, y, z, z)
    if inverse:
        values = np.linalg.inv(values).T
    return values[rows.index(0), cols.index(0)]


def check_duality(fsymbols, coefficients, tolerance=None):
    """Zig-zag identities of both dualities, left/right dimensions and nu_2(m)."""
    tolerance = tolerance or get_settings().numeric_tolerance
    F = fsymbols
    report = DualityReport()
    for x in F.simples:
        dual = F.inverse(x)
        if x == F.m:
            lc, le, rc, re = coefficients.left_coev, coefficients.left_ev, coefficients.right_coev, coefficients.right_ev
        else:
            lc = le = rc = re = 1.0
        composites = {
            "left_x": lc * _unit_entry(F, x, dual, x) * le,
            "left_dual": lc * _unit_entry(F, dual, x, dual, inverse=True) * le,
            "right_x": rc * _unit_entry(F, x, dual, x, inverse=True) * re,
            "right_dual": rc * _unit_entry(F, dual, x, dual) * re,
        }
        label = F.label(x)
        report.zigzags[label] = {name: complex(value) for name, value in composites.items()}
        for name, value in composites.items():
            if abs(value - 1) > tolerance:
                report.failures.append({"object": label, "composite": name, "value": [value.real, value.imag]})
        left_dim, right_dim = re * lc, le * rc
        report.dims[label] = (left_dim, right_dim)
        if abs(left_dim - right_dim) > tolerance:
            report.failures.append({"object": label, "composite": "dimension", "value": [left_dim, right_dim]})
        if x == F.m:
            report.fs_indicator_m = le * lc / left_dim
    return report


def verify_duality(category, fsymbols=None, coefficients=None):
    _check_bound(category.n)
    fsymbols = fsymbols or FSymbols.from_category(category)
    return check_duality(fsymbols, coefficients or DualityCoefficients.for_category(category))
