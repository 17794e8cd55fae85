import pytest

from tautline.config import DEFAULT_TOL, default_tolerance, log_level, resolve_tolerance
from tautline.core.verdicts import Verdict, combine
from tautline.errors import ParameterError


def test_default_tolerance_from_environment(monkeypatch):
    assert default_tolerance() == DEFAULT_TOL
    monkeypatch.setenv("TAUTLINE_TOL", "1e-6")
    assert default_tolerance() == 1e-6
    assert resolve_tolerance() == 1e-6
    assert resolve_tolerance(1e-3) == 1e-3


@pytest.mark.parametrize("raw", ["abc", "0", "-1e-9", "inf", "nan"])
def test_malformed_tolerance_is_rejected(monkeypatch, raw):
    monkeypatch.setenv("TAUTLINE_TOL", raw)
    with pytest.raises(ParameterError):
        default_tolerance()


def test_explicit_tolerance_must_be_positive():
    with pytest.raises(ParameterError):
        resolve_tolerance(0.0)


def test_log_level(monkeypatch):
    monkeypatch.delenv("TAUTLINE_LOG_LEVEL", raising=False)
    assert log_level() == "INFO"
    monkeypatch.setenv("TAUTLINE_LOG_LEVEL", "debug")
    assert log_level() == "DEBUG"
    monkeypatch.setenv("TAUTLINE_LOG_LEVEL", "chatty")
    assert log_level() == "INFO"


def test_combine_passes_only_if_every_part_passes():
    good = Verdict(name="a", ok=True, residual=1e-12)
    bad = Verdict(name="b", ok=False, residual=0.5, violations=("too far",))
    folded = combine("both", [good, bad], lam=0.5)
    assert not folded.ok
    assert folded.residual == 0.5
    assert folded.violations == ("too far",)
    assert folded.details["lam"] == 0.5
    assert len(folded.details["checks"]) == 2
    assert combine("none", []).ok
