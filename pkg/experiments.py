import itertools
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import partial
from pathlib import Path
from typing import Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field, model_validator
from sympy import factorint
from tqdm import tqdm

from abelian import groups_up_to
from classify import block_form, find_isomorphism, is_isomorphic_bruteforce, orthogonal_split_odd_p, primary_forms, wall_invariants
from cyclotomic import CyclotomicInt
from errors import TYError
from forms import (
    count_gram_candidates,
    enumerate_bicharacters,
    enumerate_symmetric_forms,
    iter_bicharacters,
    parse_form,
    quadratic_refinements,
    random_forms,
)
from gauss import ZetaData, classical_gauss, direct_gauss_sum, gauss_sum, gauss_sum_exact, zeta_sequence
from logger import get_logger
from settings import get_settings
from surd import SurdValue
from tycat import (
    TYData,
    fs_indicator,
    fs_indicator_from_catalog,
    fs_normalized,
    fs_vanishes,
    global_dim_center,
    lens_invariant,
    lens_sequence,
    tau_k_closed,
    tau_k_direct,
)
from verify import DualityCoefficients, FSymbols, check_duality, check_pentagon, verify_duality, verify_pentagon

log = get_logger("experiments")


class ExperimentConfig(BaseModel):
    max_order: int = Field(9, ge=1)
    odd_only: bool = True
    allow_even: bool = False
    k_max: Optional[int] = None
    output: Optional[Path] = None
    format: Literal["json", "csv"] = "json"
    seed: int = 0
    parallelism: int = Field(1, ge=1)
    # non-representative members per class compared against the representative
    members_per_class: int = Field(2, ge=0)

    @model_validator(mode="after")
    def _fill_defaults(self):
        cap = get_settings().max_order
        if self.max_order > cap:
            log.warning("max_order %d clamped to TY_MAX_ORDER=%d", self.max_order, cap)
            self.max_order = cap
        if self.allow_even:
            self.odd_only = False
        elif not self.odd_only:
            raise ValueError("even orders are only scanned with allow_even")
        if self.k_max is None:
            self.k_max = 8 * self.max_order
        if self.k_max < 2:
            raise ValueError(f"k_max must be at least 2, got {self.k_max}")
        return self


@dataclass
class CategoryClass:
    """One isomorphism class of bicharacter pairs, with the forms found in it."""

    representative: object
    members: list = field(default_factory=list)

    def categories(self):
        return [TYData(self.representative, 1), TYData(self.representative, -1)]


@dataclass(frozen=True)
class DistinguishRow:
    first: str
    second: str
    verdict: str
    k: Optional[int] = None
    witness: Optional[str] = None


@dataclass
class DistinguishReport:
    rows: list = field(default_factory=list)
    categories: int = 0
    k_max: int = 0
    odd_only: bool = True
    members: int = 0
    members_checked: int = 0

    @property
    def unseparated(self):
        return [row for row in self.rows if row.verdict == "UNSEPARATED"]

    @property
    def failures(self):
        return [row for row in self.rows if row.verdict in ("UNSEPARATED", "DISAGREE", "NO_WITNESS")]

    @property
    def max_separating_k(self):
        return max((row.k for row in self.rows if row.verdict == "separated"), default=None)

    @property
    def twin_separations(self):
        """First separating k of (A, chi, +1) against (A, chi, -1), per form."""
        out = {}
        for row in self.rows:
            if row.verdict == "separated" and row.first.rsplit(";", 1)[0] == row.second.rsplit(";", 1)[0]:
                out[row.first.rsplit(";", 1)[0]] = row.k
        return out

    def records(self):
        return [asdict(row) for row in self.rows]

    def to_json(self):
        return {
            "categories": self.categories,
            "k_max": self.k_max,
            "odd_only": self.odd_only,
            "max_separating_k": self.max_separating_k,
            "unseparated": len(self.unseparated),
            "equivalence_checks": {"members": self.members, "checked": self.members_checked},
            "twin_separations": self.twin_separations,
            "rows": self.records(),
        }


def category_classes(group, odd_only=True):
    """All bicharacters on group, grouped into isomorphism classes."""
    forms = enumerate_bicharacters(group)
    if group.order % 2:
        classes = {}
        for chi in forms:
            classes.setdefault(wall_invariants(chi), CategoryClass(chi)).members.append(chi)
        return list(classes.values())
    if odd_only:
        return []
    classes = []
    for chi in forms:
        home = next((c for c in classes if is_isomorphic_bruteforce(chi, c.representative)), None)
        if home is None:
            classes.append(CategoryClass(chi, [chi]))
        else:
            home.members.append(chi)
    return classes


def _sequences(job):
    chi, k_max = job
    zetas = zeta_sequence(chi, k_max // 2)
    return tuple(lens_sequence(TYData(chi, nu), k_max, zetas) for nu in (1, -1))


def first_difference(first, second):
    return next((k for k, (x, y) in enumerate(zip(first, second)) if x != y), None)


def _verdict(first, second, sequences, witness):
    k = first_difference(*sequences)
    if witness is not None:
        images = ";".join(str(x) for x in witness)
        return DistinguishRow(first.describe(), second.describe(), "equivalent" if k is None else "DISAGREE", k, images)
    if k is None:
        return DistinguishRow(first.describe(), second.describe(), "UNSEPARATED")
    return DistinguishRow(first.describe(), second.describe(), "separated", k)


def compare_categories(first, second, k_max):
    """Verdict for two categories: equivalent (with witness), separated at k, or UNSEPARATED."""
    witness = find_isomorphism(first.chi, second.chi) if first.nu == second.nu else None
    return _verdict(first, second, [lens_sequence(t, k_max) for t in (first, second)], witness)


def _sample_members(classes, count, rng):
    """(class index, member) for up to count non-representative members of every class."""
    return [(index, member) for index, cls in enumerate(classes) for member in _sample(cls.members[1:], count, rng)]


def _equivalence_rows(representative, member, sequences, witness):
    rows = []
    for nu, pair in zip((1, -1), zip(*sequences)):
        first, second = TYData(representative, nu), TYData(member, nu)
        if witness is None:
            rows.append(DistinguishRow(first.describe(), second.describe(), "NO_WITNESS", first_difference(*pair)))
        else:
            rows.append(_verdict(first, second, pair, witness))
    return rows


def distinguish(config, progress=True):
    """Scan lens invariants |L_0..L_k_max| for every pair of inequivalent TY categories.

    Sampled members of each class are also compared with their representative,
    for both values of nu, against an explicit isomorphism.
    """
    classes = []
    for group in groups_up_to(config.max_order, config.odd_only):
        classes.extend(category_classes(group, config.odd_only))
    sampled = _sample_members(classes, config.members_per_class, np.random.default_rng(config.seed))
    jobs = [(c.representative, config.k_max) for c in classes] + [(member, config.k_max) for _, member in sampled]
    log.info("%d classes of bicharacter pairs up to order %d, %d sampled members", len(classes), config.max_order, len(sampled))
    if config.parallelism > 1:
        with ProcessPoolExecutor(max_workers=config.parallelism) as pool:
            results = list(tqdm(pool.map(_sequences, jobs), total=len(jobs), disable=not progress, desc="lens"))
    else:
        results = [_sequences(job) for job in tqdm(jobs, disable=not progress, desc="lens")]
    represented, results = results[: len(classes)], results[len(classes) :]
    entries = []
    for cls, pair in zip(classes, represented):
        for category, sequence in zip(cls.categories(), pair):
            entries.append((category, sequence))
    report = DistinguishReport(categories=len(entries), k_max=config.k_max, odd_only=config.odd_only)
    for (t1, s1), (t2, s2) in itertools.combinations(entries, 2):
        k = first_difference(s1, s2)
        verdict = "UNSEPARATED" if k is None else "separated"
        report.rows.append(DistinguishRow(t1.describe(), t2.describe(), verdict, k))
    for (index, member), pair in zip(sampled, results):
        representative = classes[index].representative
        witness = find_isomorphism(representative, member)
        report.rows.extend(_equivalence_rows(representative, member, (represented[index], pair), witness))
    report.members = sum(len(c.members) - 1 for c in classes)
    report.members_checked = len(sampled)
    report.rows.sort(key=lambda row: (row.first, row.second))
    if report.unseparated:
        log.error("%d pairs of inequivalent categories were not separated up to k=%d", len(report.unseparated), config.k_max)
    if len(report.failures) > len(report.unseparated):
        log.error("%d isomorphic pairs disagree or have no witness", len(report.failures) - len(report.unseparated))
    return report


def write_report(report, path, fmt):
    path = Path(path)
    if fmt == "csv":
        pd.DataFrame(report.records(), columns=["first", "second", "verdict", "k", "witness"]).to_csv(path, index=False)
    else:
        path.write_text(json.dumps(report.to_json(), indent=2))
    log.info("wrote %d rows to %s", len(report.rows), path)


# selftest


@dataclass(frozen=True)
class SuiteBounds:
    """Corpus sizes of one selftest level; a count of None means every item."""

    zeta_order: int
    zeta_exhaustive_order: int
    zeta_sample_order: int
    zeta_samples: int
    zeta_k: int
    forms_per_group: int
    trichotomy_order: int
    exact_order: int
    maps_per_form: Optional[int]
    gauss_primes: tuple
    gauss_s: int
    gauss_exact: int
    lens_order: int
    lens_exact_order: int
    lens_k: int
    structure_order: int
    classify_order: int
    members_per_class: Optional[int]
    distinguish_order: int
    fs_order: int
    fs_k: int


QUICK = SuiteBounds(
    zeta_order=27, zeta_exhaustive_order=9, zeta_sample_order=27, zeta_samples=0, zeta_k=16, forms_per_group=3,
    trichotomy_order=12, exact_order=12, maps_per_form=8,
    gauss_primes=(3, 5, 7), gauss_s=3, gauss_exact=81,
    lens_order=12, lens_exact_order=8, lens_k=12,
    structure_order=4,
    classify_order=27, members_per_class=3,
    distinguish_order=9,
    fs_order=12, fs_k=16,
)
FULL = SuiteBounds(
    zeta_order=125, zeta_exhaustive_order=125, zeta_sample_order=500, zeta_samples=24, zeta_k=50, forms_per_group=4,
    trichotomy_order=200, exact_order=100, maps_per_form=None,
    gauss_primes=(3, 5, 7), gauss_s=5, gauss_exact=81,
    lens_order=100, lens_exact_order=32, lens_k=40,
    structure_order=8,
    classify_order=125, members_per_class=None,
    distinguish_order=81,
    fs_order=100, fs_k=50,
)
QUICK_SUITES = 6
CHUNK_CANDIDATES = 4096


@dataclass
class SuiteResult:
    name: str
    passed: bool
    seconds: float
    checked: int
    failures: list


def _sample(items, count, rng):
    """count items drawn without replacement, kept in their original order; all of them when count is None."""
    if count is None or len(items) <= count:
        return list(items)
    return [items[i] for i in sorted(rng.choice(len(items), count, replace=False))]


def _forms_on(group, count, rng, nondegenerate=True):
    if count_gram_candidates(group) <= 64 * count:
        forms = enumerate_bicharacters(group) if nondegenerate else enumerate_symmetric_forms(group)
        return _sample(forms, count, rng)
    return random_forms(group, count, rng, nondegenerate)


def form_corpus(max_order, per_group, rng, odd_only=False, nondegenerate=True):
    """Up to per_group forms for every group of order <= max_order, enumerated when small, drawn otherwise."""
    for group in groups_up_to(max_order, odd_only):
        yield from _forms_on(group, per_group, rng, nondegenerate)


@dataclass(frozen=True)
class CorpusChunk:
    """Forms on one group: the bicharacters among candidates start..stop-1, or `samples` forms drawn with `seed`."""

    group: object
    start: int = 0
    stop: int = 0
    samples: int = 0
    seed: int = 0
    nondegenerate: bool = True

    def rng(self):
        return np.random.default_rng(self.seed)

    def forms(self, rng=None):
        if self.samples:
            return _forms_on(self.group, self.samples, rng or self.rng(), self.nondegenerate)
        return iter_bicharacters(self.group, self.start, self.stop)


def _is_prime_power(n):
    return len(factorint(n)) == 1


def _is_odd_prime_power(n):
    return n % 2 == 1 and len(factorint(n)) <= 1


def _seed(rng):
    return int(rng.integers(2**32))


def zeta_corpus(bounds, rng):
    """Every bicharacter on prime-power groups up to zeta_exhaustive_order, forms_per_group
    forms on the other groups up to zeta_order, one form on zeta_samples larger groups."""
    limit = get_settings().enumeration_limit
    chunks = []
    for group in groups_up_to(bounds.zeta_order):
        total = count_gram_candidates(group)
        if group.order <= bounds.zeta_exhaustive_order and _is_prime_power(group.order) and total <= limit:
            chunks.extend(CorpusChunk(group, start, min(start + CHUNK_CANDIDATES, total)) for start in range(0, total, CHUNK_CANDIDATES))
        else:
            chunks.append(CorpusChunk(group, samples=bounds.forms_per_group, seed=_seed(rng)))
    larger = [g for g in groups_up_to(bounds.zeta_sample_order) if g.order > bounds.zeta_order]
    for group in _sample(larger, bounds.zeta_samples, rng):
        chunks.append(CorpusChunk(group, samples=1, seed=_seed(rng)))
    return chunks


def _run_chunks(check, chunks):
    """check(chunk) -> (checked, failures) over every chunk, in worker processes unless TY_WORKERS=1."""
    workers = get_settings().workers or os.cpu_count() or 1
    if workers == 1 or len(chunks) < 2:
        results = [check(chunk) for chunk in chunks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(check, chunks))
    return sum(checked for checked, _ in results), [f for _, failures in results for f in failures]


def _check_zeta_oracles(k_max, chunk):
    checked, failures = 0, []
    for chi in chunk.forms():
        data = ZetaData.of(chi)
        methods = ("brute", "prin", "closed") if _is_odd_prime_power(chi.order) else ("brute", "prin")
        sequences = {name: zeta_sequence(chi, k_max, name, data) for name in methods}
        for k in range(k_max + 1):
            checked += 1
            values = {name: sequence[k] for name, sequence in sequences.items()}
            if len(set(values.values())) != 1:
                failures.append({"form": chi.literal(), "k": k, **{name: str(v) for name, v in values.items()}})
    return checked, failures


def suite_zeta_oracles(bounds, rng, perturb):
    return _run_chunks(partial(_check_zeta_oracles, bounds.zeta_k), zeta_corpus(bounds, rng))


def _check_zeta_fixed_points(k_max, chunk):
    checked, failures = 0, []
    for chi in chunk.forms():
        data = ZetaData.of(chi)
        n = chi.order
        for method, compute in (("brute", data.bruteforce), ("prin", data.via_prin)):
            for label, value in zip(("zeta_1", "zeta_8n"), compute([1, 8 * n])):
                checked += 1
                if not value.is_root() or value.j != 0:
                    failures.append({"form": chi.literal(), "check": label, "method": method, "value": str(value)})
        for k, value in enumerate(data.via_prin(range(k_max + 1))):
            checked += 1
            if value.kind == "unit":
                failures.append({"form": chi.literal(), "check": "snapped", "k": k, "value": str(value)})
    return checked, failures


def suite_zeta_fixed_points(bounds, rng, perturb):
    return _run_chunks(partial(_check_zeta_fixed_points, bounds.zeta_k), zeta_corpus(bounds, rng))


def _check_gauss_trichotomy(bounds, chunk):
    tolerance = get_settings().numeric_tolerance
    rng = chunk.rng()
    checked, failures = 0, []
    for form in chunk.forms(rng):
        n, radical_size = form.order, len(form.radical_indices)
        refinements = quadratic_refinements(form)
        # refinements[0] is mu0 itself (the zero character)
        maps = refinements if bounds.maps_per_form is None else refinements[:1] + _sample(refinements[1:], bounds.maps_per_form, rng)
        for mu in maps:
            checked += 1
            gamma = gauss_sum(mu)
            nontrivial = bool(np.any(mu.on_radical()))
            if gamma.is_zero() != nontrivial or (not gamma.is_zero() and abs(abs(gamma.to_complex()) - 1) > tolerance):
                failures.append({"form": form.literal(), "map": [str(x) for x in mu.values()], "gamma": str(gamma)})
                continue
            if n > bounds.exact_order:
                continue
            total = gauss_sum_exact(mu)
            expected = CyclotomicInt.integer(0) if gamma.is_zero() else CyclotomicInt.integer(n * radical_size)
            if total * total.conj() != expected:
                failures.append({"form": form.literal(), "map": [str(x) for x in mu.values()], "check": "|S|^2"})
    return checked, failures


def suite_gauss_trichotomy(bounds, rng, perturb):
    chunks = [
        CorpusChunk(group, samples=bounds.forms_per_group, seed=_seed(rng), nondegenerate=False)
        for group in groups_up_to(bounds.trichotomy_order)
    ]
    return _run_chunks(partial(_check_gauss_trichotomy, bounds), chunks)


def suite_classical_gauss(bounds, rng, perturb):
    tolerance = get_settings().numeric_tolerance
    checked, failures = 0, []
    for p in bounds.gauss_primes:
        for s in range(1, bounds.gauss_s + 1):
            q = p**s
            for d in range(q):
                closed = classical_gauss(d, p, s)
                checked += 1
                if q <= bounds.gauss_exact:
                    ok = closed.exact() == direct_gauss_sum(d, p, s, exact=True)
                else:
                    ok = abs(closed.to_complex() - direct_gauss_sum(d, p, s)) <= tolerance * q
                if not ok:
                    failures.append({"d": d, "p": p, "s": s, "closed": str(closed)})
    return checked, failures


def suite_lens_consistency(bounds, rng, perturb):
    tolerance = get_settings().numeric_tolerance
    checked, failures = 0, []
    for chi in form_corpus(bounds.lens_order, bounds.forms_per_group, rng):
        n = chi.order
        for nu in (1, -1):
            category = TYData(chi, nu)
            name = category.describe()
            checked += 1
            if global_dim_center(category) != 4 * n * n:
                failures.append({"category": name, "check": "global dimension"})
            if lens_invariant(category, 0) != SurdValue.rational(1) or lens_invariant(category, 1) != SurdValue.rational(Fraction(1, 2 * n)):
                failures.append({"category": name, "check": "|L_0| = 1, |L_1| = 1/2n"})
            for k in range(bounds.lens_k + 1):
                checked += 1
                direct = tau_k_direct(category, k)
                lens = lens_invariant(category, k)
                scale = (2 * n) ** 2
                if abs(lens.to_complex() * scale - direct.to_complex()) > tolerance * scale:
                    failures.append({"category": name, "k": k, "check": "lens * (2n)^2 = tau_k"})
                elif n <= bounds.lens_exact_order and tau_k_closed(category, k).to_cyclotomic() != direct:
                    failures.append({"category": name, "k": k, "check": "exact tau_k"})
    return checked, failures


def _control_category():
    return TYData(parse_form("3", "1/3"), 1)


def suite_structure(bounds, rng, perturb):
    checked, failures = 0, []
    for group in groups_up_to(bounds.structure_order):
        for chi in enumerate_bicharacters(group):
            for nu in (1, -1):
                category = TYData(chi, nu)
                fsymbols = FSymbols.from_category(category)
                if perturb:
                    fsymbols = fsymbols.with_scaled_mmm()
                pentagon = verify_pentagon(category, fsymbols)
                duality = verify_duality(category, fsymbols)
                checked += 2
                if not pentagon.passed:
                    failures.append({"category": category.describe(), "check": "pentagon", "quadruples": pentagon.failures[:5]})
                if not duality.passed or abs(duality.fs_indicator_m - nu) > get_settings().numeric_tolerance:
                    failures.append({"category": category.describe(), "check": "duality", "failures": duality.failures[:5]})
    control = _control_category()
    base = FSymbols.from_category(control)
    controls = {
        "non-bilinear pairing": base.with_broken_pairing(),
        "scaled F^mmm": base.with_scaled_mmm(),
        "dropped chi in F^amb": base.without_amb_factor(),
    }
    for name, fsymbols in controls.items():
        checked += 1
        if check_pentagon(fsymbols).passed:
            failures.append({"control": name, "check": "pentagon should fail"})
    checked += 1
    scaled = DualityCoefficients.for_category(control).with_scaled_left_ev()
    if check_duality(base, scaled).passed:
        failures.append({"control": "scaled left projection", "check": "duality should fail"})
    return checked, failures


def _check_classification(members_per_class, chunk):
    rng = chunk.rng()
    checked, failures = 0, []
    classes = category_classes(chunk.group)
    for cls in classes:
        for member in _sample(cls.members[1:], members_per_class, rng):
            checked += 1
            if not is_isomorphic_bruteforce(member, cls.representative):
                failures.append({"form": member.literal(), "class": cls.representative.literal(), "check": "same invariants, not isomorphic"})
    for first, second in itertools.combinations(classes, 2):
        checked += 1
        if is_isomorphic_bruteforce(first.representative, second.representative):
            failures.append({"forms": [first.representative.literal(), second.representative.literal()], "check": "different invariants, isomorphic"})
    for cls in classes:
        for chi in _sample(cls.members, members_per_class, rng):
            for p, component in primary_forms(chi).items():
                checked += 1
                if not is_isomorphic_bruteforce(block_form(orthogonal_split_odd_p(component)), component):
                    failures.append({"form": chi.literal(), "p": p, "check": "splitting does not reconstruct the form"})
    return checked, failures


def suite_classification(bounds, rng, perturb):
    limit = get_settings().enumeration_limit
    chunks = []
    for group in groups_up_to(bounds.classify_order, odd_only=True):
        if count_gram_candidates(group) > limit:
            log.warning("classification skips %s: %d candidate grams exceed TY_ENUMERATION_LIMIT", group, count_gram_candidates(group))
            continue
        chunks.append(CorpusChunk(group, seed=_seed(rng)))
    return _run_chunks(partial(_check_classification, bounds.members_per_class), chunks)


def suite_distinguish(bounds, rng, perturb):
    config = ExperimentConfig(max_order=bounds.distinguish_order, k_max=8 * bounds.distinguish_order)
    first = distinguish(config, progress=False)
    second = distinguish(config, progress=False)
    failures = [asdict(row) for row in first.failures]
    if first.rows != second.rows:
        failures.append({"check": "re-run reproduces every row"})
    return len(first.rows), failures


def suite_frobenius_schur(bounds, rng, perturb):
    tolerance = get_settings().numeric_tolerance
    checked, failures = 0, []
    for chi in form_corpus(bounds.fs_order, bounds.forms_per_group, rng):
        for nu in (1, -1):
            category = TYData(chi, nu)
            for k in range(1, bounds.fs_k + 1):
                checked += 1
                normalized = fs_normalized(category, k)
                if normalized.kind == "unit" or normalized.is_zero() != fs_vanishes(category, k):
                    failures.append({"category": category.describe(), "k": k, "value": str(normalized)})
                elif abs(fs_indicator(category, k).to_complex() - fs_indicator_from_catalog(category, k)) > tolerance * max(1, chi.order):
                    failures.append({"category": category.describe(), "k": k, "check": "catalog sum"})
    return checked, failures


SUITES = (
    ("zeta_oracles", suite_zeta_oracles),
    ("zeta_fixed_points", suite_zeta_fixed_points),
    ("gauss_trichotomy", suite_gauss_trichotomy),
    ("classical_gauss", suite_classical_gauss),
    ("lens_consistency", suite_lens_consistency),
    ("structure", suite_structure),
    ("classification", suite_classification),
    ("distinguish", suite_distinguish),
    ("frobenius_schur", suite_frobenius_schur),
)


def run_selftest(level="quick", perturb=False, seed=0, only=None):
    """Run the acceptance suites; quick runs the first six at reduced bounds."""
    bounds = QUICK if level == "quick" else FULL
    suites = SUITES[:QUICK_SUITES] if level == "quick" else SUITES
    results = []
    for name, suite in suites:
        if only and name not in only:
            continue
        rng = np.random.default_rng(seed)
        start = time.perf_counter()
        try:
            checked, failures = suite(bounds, rng, perturb)
        except TYError as e:
            checked, failures = 0, [{"error": type(e).__name__, "message": str(e)}]
        seconds = time.perf_counter() - start
        results.append(SuiteResult(name, not failures, seconds, checked, failures))
        log.info("suite %s: %d checks, %d failures, %.2fs", name, checked, len(failures), seconds)
    return results

