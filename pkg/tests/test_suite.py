"""
Tests for the Verification Suite Runner
=========================================

The full default suite runs the MMS study and twenty invariance seeds,
which is too slow for a unit test. These tests select suites and shrink
the randomized parts, then check that every record passes and that the
report is reproducible from the seed.
"""

import pytest
from pydantic import ValidationError

from gliorad.verification.invariance import InvarianceConfig
from gliorad.verification.report import SuiteReport
from gliorad.verification.suite import (
    FOUR_ATOM_CASES,
    VerifyConfig,
    VerifySuite,
    bathtub_cases,
    entropy_cases,
    logistic_case,
    run_verification,
    run_verification_async,
    verification_jobs,
)


# ─── Fixtures ────────────────────────────────────────────────

@pytest.fixture
def quick_config():
    return VerifyConfig(
        suites=[
            VerifySuite.LOGISTIC,
            VerifySuite.INVARIANCE,
            VerifySuite.ADJOINT,
            VerifySuite.GRADIENT,
            VerifySuite.SENSITIVITY,
            VerifySuite.ENTROPY,
            VerifySuite.BATHTUB,
        ],
        bathtub_samples=50,
        invariance=InvarianceConfig(cells=16, num_time_steps=20, seeds=2, mass_seeds=1),
    )


# ─── Single suites ───────────────────────────────────────────

def test_logistic_case_passes():
    (record,) = logistic_case(VerifyConfig())

    assert record.case == "logistic/final"
    assert record.passed
    assert record.value <= 1e-3


def test_entropy_cases_pass():
    records = entropy_cases(VerifyConfig())

    assert {r.case for r in records} == {"entropy/constant", "entropy/gaussian"}
    assert all(r.passed for r in records)


def test_bathtub_cases_cover_the_four_atom_table():
    records = bathtub_cases(VerifyConfig(bathtub_samples=20))

    four_atoms = [r for r in records if r.case.startswith("bathtub/four_atoms/")]
    assert len(four_atoms) == len(FOUR_ATOM_CASES)
    assert all(r.value == 0.0 for r in four_atoms)
    assert all(r.passed for r in records)


def test_jobs_follow_selected_suites(quick_config):
    jobs = verification_jobs(quick_config)

    # 6 single-job suites + 2 range seeds + zero + 1 mass seed
    assert len(jobs) == 6 + 2 + 1 + 1


def test_duplicate_suites_run_once():
    config = VerifyConfig(suites=[VerifySuite.LOGISTIC, VerifySuite.LOGISTIC])

    assert len(verification_jobs(config)) == 1


def test_unknown_suite_rejected():
    with pytest.raises(ValidationError):
        VerifyConfig(suites=["everything"])


# ─── Full runs ───────────────────────────────────────────────

def test_quick_suite_passes(quick_config):
    report = run_verification(quick_config)

    assert report.passed, [r.to_dict() for r in report.failures]
    cases = {record.case for record in report.records}
    assert {
        "logistic/final",
        "adjoint/constant",
        "adjoint/consistency",
        "gradient/distributed",
        "gradient/uniform",
        "sensitivity/random",
        "bathtub/sampled",
    } <= cases
    assert any(case.startswith("range/seed=") for case in cases)


def test_seed_offsets_invariance_seeds(quick_config):
    config = quick_config.model_copy(
        update={"suites": [VerifySuite.INVARIANCE], "seed": 40}
    )

    report = run_verification(config)

    range_cases = sorted({r.case for r in report.records if r.case.startswith("range/")})
    assert range_cases == ["range/seed=0040", "range/seed=0041"]


def test_failing_threshold_is_reported():
    config = VerifyConfig(suites=[VerifySuite.LOGISTIC], logistic_threshold=1e-12)

    report = run_verification(config)

    assert not report.passed
    assert report.to_dict()["failures"] == 1


@pytest.mark.asyncio
async def test_async_entry_point_matches_sync():
    config = VerifyConfig(suites=[VerifySuite.LOGISTIC, VerifySuite.ENTROPY])

    report = await run_verification_async(config)

    expected = SuiteReport("verification", logistic_case(config) + entropy_cases(config))
    assert report.to_dict() == expected.to_dict()
