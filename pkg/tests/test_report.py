import csv
import math

import pytest
from hypothesis import given, strategies as st

from olab.verify import VerificationReport
from olab.verify.report import CSV_COLUMNS, check, check_values

logs = st.floats(-700, 700)


@given(logs, logs)
def test_exact_check_semantics(a, b):
    rec = check("s", "i", "step", a, b)
    assert rec.passed == (a <= b + math.log1p(1e-9))
    assert rec.log_ratio == pytest.approx(a - b)


@given(logs, logs)
def test_empirical_check_passes_when_finite(a, b):
    assert check("s", "i", "step", a, b, exact=False).passed


def test_zero_rhs():
    assert not check_values("s", "i", "x", 1.0, 0.0).passed
    rec = check_values("s", "i", "x", 0.0, 0.0)
    assert rec.passed and rec.degenerate and math.isnan(rec.log_ratio)
    assert check_values("s", "i", "x", 0.0, 1.0).passed
    with pytest.raises(ValueError):
        check_values("s", "i", "x", -1.0, 1.0)
    assert not check("s", "i", "x", math.nan, 0.0).passed


def test_slack_boundary():
    assert check_values("s", "i", "x", 1.0 + 5e-10, 1.0).passed
    assert not check_values("s", "i", "x", 1.0 + 2e-9, 1.0).passed


def test_report_constant_and_budget(tmp_path):
    rep = VerificationReport("suite", constant_steps=("main",), budget=2.0)
    rep.add(check_values("suite", "a", "main", 1.5, 1.0, exact=False, t=0.5))
    rep.add(check_values("suite", "a", "aux", 100.0, 1.0, exact=False))
    assert rep.empirical_constant == pytest.approx(1.5)
    assert rep.passed and rep.within_budget
    rep.add(check_values("suite", "b", "main", 3.0, 1.0, exact=False))
    assert not rep.within_budget and not rep.passed
    assert rep.witness_record.instance_id == "b"
    s = rep.summary()
    assert s["records"] == 3 and s["violations"] == 0 and s["budget"] == pytest.approx(2.0)

    path = tmp_path / "r.csv"
    rep.write_csv(path)
    rows = list(csv.DictReader(open(path)))
    assert tuple(rows[0]) == CSV_COLUMNS
    assert float(rows[0]["ratio"]) == pytest.approx(float(rows[0]["lhs"]) / float(rows[0]["rhs"]))


def test_log_budget_below_float_range():
    rep = VerificationReport("s", log_budget=-5000.0)
    rep.add(check("s", "i", "x", -5001.0, 0.0, exact=False))
    assert rep.within_budget
    assert rep.summary()["budget"] == 0.0
