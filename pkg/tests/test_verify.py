import pytest

from bcspectra.verify import INJECTIONS, SUITES, run_all


@pytest.fixture(scope="module")
def default_run():
    return run_all()


def test_default_run_passes(default_run):
    assert default_run["passed"]
    assert [s["name"] for s in default_run["suites"]] == list(SUITES)
    assert all(s["checks"] > 0 for s in default_run["suites"])


def test_runs_are_reproducible(default_run):
    assert run_all() == default_run


def test_nonhermitian_injection_fails_hermiticity():
    summary = run_all(inject=["nonhermitian"])
    verdicts = {s["name"]: s["passed"] for s in summary["suites"]}
    assert not summary["passed"] and not verdicts["hermiticity"]
    assert all(v for k, v in verdicts.items() if k != "hermiticity")


def test_symmetric_only_injection_keeps_empty_spectrum():
    summary = run_all(inject=["symmetric-only"])
    (seg,) = [s for s in summary["suites"] if s["name"] == "segments"]
    assert summary["passed"] and seg["checks"] == 4 and "0 levels" in seg["detail"]


def test_unknown_injection():
    with pytest.raises(ValueError):
        run_all(inject=["bogus"])
    assert set(INJECTIONS) == {"nonhermitian", "symmetric-only"}
