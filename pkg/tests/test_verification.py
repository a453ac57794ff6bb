# tests/test_verification.py
import math

import pytest

from app.verification import SUITES, CheckResult, VerificationRunner, summarize


def test_check_result_pass_flag():
    assert CheckResult("upsilon", "reflection", 1e-14, 1e-12).passed
    assert not CheckResult("upsilon", "reflection", 1e-6, 1e-12).passed
    assert not CheckResult("upsilon", "reflection", math.nan, 1e-12).passed


def test_check_result_record_flattens_details():
    record = CheckResult("shift", "A/B", 1e-10, 1e-8, {"gamma": 1.0, "i": 2}).to_record()
    assert record["detail_gamma"] == 1.0
    assert record["detail_i"] == 2
    assert "details" not in record


def test_summarize_groups_by_identity():
    results = [
        CheckResult("upsilon", "reflection", 1e-14, 1e-12),
        CheckResult("upsilon", "reflection", 5e-13, 1e-12),
        CheckResult("upsilon", "shift", 1e-9, 1e-10),
    ]
    summary = summarize(results)
    assert not summary["passed"]
    checks = {c["name"]: c for c in summary["checks"]}
    assert checks["reflection"]["count"] == 2
    assert checks["reflection"]["max_residual"] == 5e-13
    assert checks["reflection"]["passed"]
    assert not checks["shift"]["passed"]


def test_unknown_suite():
    with pytest.raises(ValueError):
        VerificationRunner().run("modular")


def test_random_inputs_are_reproducible(params):
    first = VerificationRunner(seed=7).random_input(params)
    second = VerificationRunner(seed=7).random_input(params)
    assert first == second


def test_integral_suite_passes():
    summary = summarize(VerificationRunner().run("integral"))
    assert summary["passed"]
    assert summary["checks"][0]["count"] == 10


@pytest.mark.parametrize("suite", ["upsilon", "reflection", "shift", "blocks", "dozz-limit"])
def test_small_suites_pass(suite):
    results = VerificationRunner(gamma=1.0, trials=2, seed=3).run(suite)
    assert results
    assert summarize(results)["passed"], [r for r in results if not r.passed]


def test_suite_names():
    assert SUITES == ("upsilon", "reflection", "shift", "blocks", "integral", "dozz-limit")


@pytest.mark.slow
def test_shift_suite_at_default_size():
    assert summarize(VerificationRunner(gamma=1.0, trials=100).run("shift"))["passed"]
