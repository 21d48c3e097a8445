import json
from dataclasses import replace

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

import experiments
from experiments import QUICK, ExperimentConfig, compare_categories, distinguish, run_selftest, write_report, zeta_corpus
from forms import enumerate_bicharacters
from settings import get_settings
from tycat import TYData


@pytest.fixture(scope="module")
def small_report():
    return distinguish(ExperimentConfig(max_order=3), progress=False)


def test_config_defaults():
    config = ExperimentConfig()
    assert config.max_order == 9
    assert config.k_max == 72
    assert config.odd_only
    assert ExperimentConfig(max_order=5, allow_even=True).odd_only is False


@pytest.mark.parametrize("kwargs", [{"k_max": 1}, {"odd_only": False}, {"format": "xml"}, {"max_order": 0}])
def test_config_rejects_bad_values(kwargs):
    with pytest.raises(ValidationError):
        ExperimentConfig(**kwargs)


def test_config_clamps_to_the_order_cap(monkeypatch):
    monkeypatch.setenv("TY_MAX_ORDER", "5")
    config = ExperimentConfig(max_order=9)
    assert config.max_order == 5
    assert config.k_max == 40


def test_distinguish_small_orders(small_report):
    assert small_report.categories == 6
    assert len(small_report.rows) == 15
    assert all(row.verdict == "separated" for row in small_report.rows)
    assert not small_report.failures
    assert small_report.max_separating_k is not None


def test_nu_twins_separate_at_even_k(small_report):
    twins = small_report.twin_separations
    assert set(twins) == {"group=1; gram=0", "group=3; gram=1/3", "group=3; gram=2/3"}
    assert twins["group=1; gram=0"] == 2
    assert all(k % 2 == 0 for k in twins.values())


def test_distinguish_is_reproducible(small_report):
    again = distinguish(ExperimentConfig(max_order=3), progress=False)
    assert again.rows == small_report.rows


def test_distinguish_reports_equivalent_members():
    report = distinguish(ExperimentConfig(max_order=9), progress=False)
    assert report.categories == 22
    assert not report.failures
    assert (report.members, report.members_checked) == (26, 14)
    equivalent = [row for row in report.rows if row.verdict == "equivalent"]
    assert len(equivalent) == 28
    assert all(row.witness for row in equivalent)
    assert sum(row.first.endswith("nu=-1") and row.second.endswith("nu=-1") for row in equivalent) == 14


def test_distinguish_without_member_checks():
    report = distinguish(ExperimentConfig(max_order=5, members_per_class=0), progress=False)
    assert (report.members, report.members_checked) == (2, 0)
    assert report.to_json()["equivalence_checks"] == {"members": 2, "checked": 0}
    assert not [row for row in report.rows if row.verdict == "equivalent"]
    assert len(report.rows) == 45


def test_compare_categories(z3, z3_nonresidue):
    same = compare_categories(TYData(z3, 1), TYData(z3, 1), 8)
    assert same.verdict == "equivalent"
    assert same.witness == "(1)"
    different = compare_categories(TYData(z3, 1), TYData(z3_nonresidue, 1), 8)
    assert (different.verdict, different.k) == ("separated", 4)


def test_write_report(tmp_path, small_report):
    csv_path = tmp_path / "report.csv"
    write_report(small_report, csv_path, "csv")
    frame = pd.read_csv(csv_path)
    assert list(frame.columns) == ["first", "second", "verdict", "k", "witness"]
    assert len(frame) == 15

    json_path = tmp_path / "report.json"
    write_report(small_report, json_path, "json")
    payload = json.loads(json_path.read_text())
    assert payload["categories"] == 6
    assert payload["unseparated"] == 0
    assert len(payload["rows"]) == 15


def test_selftest_selected_suites():
    results = run_selftest("quick", only=["classical_gauss", "structure"])
    assert [r.name for r in results] == ["classical_gauss", "structure"]
    assert all(r.passed for r in results), [r.failures[:3] for r in results]
    assert all(r.checked > 0 for r in results)


def test_selftest_perturbation_is_detected():
    (result,) = run_selftest("quick", perturb=True, only=["structure"])
    assert not result.passed



def test_zeta_corpus_enumerates_prime_power_groups(monkeypatch):
    monkeypatch.setattr(experiments, "CHUNK_CANDIDATES", 16)
    bounds = replace(QUICK, zeta_order=9, zeta_exhaustive_order=8)
    chunks = zeta_corpus(bounds, np.random.default_rng(0))
    groups = {chunk.group for chunk in chunks}
    assert {group.order for group in groups} == set(range(1, 10))
    for group in groups:
        mine = [chunk for chunk in chunks if chunk.group == group]
        if group.order in (2, 3, 4, 5, 7, 8):
            assert all(chunk.samples == 0 for chunk in mine)
            assert [chi for chunk in mine for chi in chunk.forms()] == enumerate_bicharacters(group)
        else:
            assert [chunk.samples for chunk in mine] == [bounds.forms_per_group]
    elementary = next(group for group in groups if group.factors == (2, 2, 2))
    assert len([chunk for chunk in chunks if chunk.group == elementary]) == 4


def test_zeta_suites_pass(monkeypatch):
    monkeypatch.setenv("TY_WORKERS", "1")
    results = run_selftest("quick", only=["zeta_oracles", "zeta_fixed_points", "gauss_trichotomy"])
    assert [r.name for r in results] == ["zeta_oracles", "zeta_fixed_points", "gauss_trichotomy"]
    assert all(r.passed for r in results), [r.failures[:3] for r in results]
    assert all(r.checked > 0 for r in results)


def test_suites_run_in_worker_processes(monkeypatch):
    monkeypatch.setenv("TY_WORKERS", "2")
    (pooled,) = run_selftest("quick", only=["zeta_fixed_points"])
    assert pooled.passed, pooled.failures[:3]
    monkeypatch.setenv("TY_WORKERS", "1")
    get_settings.cache_clear()
    (serial,) = run_selftest("quick", only=["zeta_fixed_points"])
    assert serial.checked == pooled.checked
