import dataclasses

import pytest

from fq_core import make_field
from verification import SUITES, default_fields, run_verification


def perturbed_f2():
    field = make_field(2)
    chars = field.chars.copy()
    chars[1, 1] = 1.0
    return dataclasses.replace(field, chars=chars)


def test_default_fields():
    assert sorted(default_fields()) == [2, 3, 4, 5]


@pytest.mark.parametrize("suite", ["field", "codes", "spectral", "noise"])
def test_fast_suites_pass(suite):
    report = run_verification([suite])
    assert report.checks
    assert report.passed, [c for c in report.failures]


@pytest.mark.slow
@pytest.mark.parametrize("suite", ["analysis", "pgm", "sampler"])
def test_slow_suites_pass(suite):
    report = run_verification([suite])
    assert report.passed, [c for c in report.failures]


def test_perturbed_character_is_caught():
    report = run_verification(["field"], fields={2: perturbed_f2()})
    assert not report.passed
    failed = {c.name for c in report.failures}
    assert "field.character_orthogonality" in failed
    assert "field.character_formula" in failed


def test_suite_filter_only_runs_named_suites():
    report = run_verification(["field"])
    assert report.suites == ["field"]
    assert all(c.name.startswith("field.") for c in report.checks)


def test_unknown_suite():
    with pytest.raises(ValueError, match="unknown suite"):
        run_verification(["field", "bogus"])


def test_suite_names():
    assert list(SUITES) == ["field", "codes", "spectral", "noise", "analysis", "pgm", "sampler"]
