import json
from fractions import Fraction

import pytest
from typer.testing import CliRunner

from errors import ParseError
from main import app, parse_k_range, parse_nu
from surd import SurdValue

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, list(args))


def test_parse_k_range():
    assert parse_k_range("0..4") == [0, 1, 2, 3, 4]
    assert parse_k_range("7") == [7]
    assert parse_k_range("1,3,5") == [1, 3, 5]
    for text in ("a..b", "-1", "3..1", ""):
        with pytest.raises(ParseError):
            parse_k_range(text)


def test_parse_nu():
    assert parse_nu("+1") == 1
    assert parse_nu("-1") == -1
    with pytest.raises(ParseError):
        parse_nu("2")


def test_lens_trivial_group():
    result = invoke("lens", "--group", "1", "--gram", "0", "--nu", "-1", "--k", "0..4", "--json")
    assert result.exit_code == 0, result.output
    rows = json.loads(result.stdout)
    assert [row["k"] for row in rows] == [0, 1, 2, 3, 4]
    values = [SurdValue.from_json(row["value"]) for row in rows]
    assert values == [SurdValue.rational(q) for q in (1, Fraction(1, 2), 0, Fraction(1, 2), 1)]


def test_lens_z3():
    result = invoke("lens", "--group", "3", "--gram", "1/3", "--k", "1,2", "--json")
    assert result.exit_code == 0, result.output
    first, second = json.loads(result.stdout)
    assert SurdValue.from_json(first["value"]) == SurdValue.rational(Fraction(1, 6))
    assert second["value"] == {"re": ["1/6", "1/6"], "im": ["0/1", "0/1"], "m": 3}
    assert second["numeric"][0] == pytest.approx((1 + 3**0.5) / 6)


def test_lens_table_output():
    result = invoke("lens", "--group", "3", "--gram", "1/3", "--k", "2")
    assert result.exit_code == 0
    assert "sqrt(3)" in result.stdout


@pytest.mark.parametrize(
    "args, code",
    [
        (("lens", "--group", "3", "--gram", "1/4"), 2),
        (("lens", "--group", "3", "--gram", "1/3", "--k", "a..b"), 2),
        (("lens", "--group", "3", "--gram", "1/3", "--nu", "2"), 2),
        (("lens", "--group", "2", "--gram", "0"), 3),
        (("zeta", "--group", "2", "--gram", "1/2", "--method", "closed"), 4),
        (("zeta", "--group", "3", "--gram", "1/3", "--method", "fourier"), 2),
        (("selftest", "--level", "bogus"), 2),
        (("distinguish", "--max-order", "3", "--k-max", "1"), 2),
    ],
)
def test_exit_codes(args, code):
    result = invoke(*args)
    assert result.exit_code == code, result.output


def test_zeta_all_methods_agree():
    result = invoke("zeta", "--group", "3", "--gram", "1/3", "--k", "0..3", "--json")
    assert result.exit_code == 0, result.output
    rows = json.loads(result.stdout)
    assert rows[2] == {"k": 2, "brute": "zeta8^2", "prin": "zeta8^2", "closed": "zeta8^2"}
    assert all(len({row[m] for m in ("brute", "prin", "closed")}) == 1 for row in rows)


def test_zeta_on_an_even_group_without_closed_form():
    result = invoke("zeta", "--group", "2", "--gram", "1/2", "--k", "2", "--method", "prin", "--json")
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout) == [{"k": 2, "prin": "0"}]


@pytest.mark.parametrize(
    "group, gram, expected",
    [
        ("3", "2/3", {"3^1": {"r": 1, "sigma": -1}}),
        ("2", "1/2", {"2-part": "unclassified"}),
        ("3,9", "1/3,0;0,2/9", {"3^1": {"r": 1, "sigma": 1}, "3^2": {"r": 1, "sigma": -1}}),
    ],
)
def test_classify(group, gram, expected):
    result = invoke("classify", "--group", group, "--gram", gram)
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout) == expected


def test_distinguish_to_stdout():
    result = invoke("distinguish", "--max-order", "3")
    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    assert payload["categories"] == 6
    assert payload["unseparated"] == 0
    assert len(payload["rows"]) == 15
    assert payload["equivalence_checks"] == {"members": 0, "checked": 0}


def test_distinguish_to_csv(tmp_path):
    path = tmp_path / "rows.csv"
    result = invoke("distinguish", "--max-order", "3", "--output", str(path), "--format", "csv")
    assert result.exit_code == 0, result.output
    assert path.read_text().splitlines()[0] == "first,second,verdict,k,witness"


def test_selftest_single_suite():
    result = invoke("selftest", "--suite", "classical_gauss")
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout) == {"passed": True, "failures": []}
