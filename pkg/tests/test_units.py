import pytest
from hypothesis import given, strategies as st

from ctxfpga.errors import (
    CadError,
    ContextInUseError,
    CongestionError,
    NotReadyError,
    ParseError,
    UsageError,
    ValidationError,
)
from ctxfpga.units import format_time, parse_quantity


@pytest.mark.parametrize("text,dim,value", [
    ("124.3 ps", "time", 124.3e-12),
    ("13.1 uW", "power", 13.1e-6),
    ("3.2 Gb/s", "rate", 3.2e9),
    ("77.3 Mb", "bits", 77.3e6),
    ("375 lambda2", "area", 375.0),
    ("-2V", "voltage", -2.0),
    ("1us", "time", 1e-6),
    (7, None, 7.0),
])
def test_parse_quantity(text, dim, value):
    assert parse_quantity(text, dim) == value


@pytest.mark.parametrize("text,dim", [("5 V", "time"), ("12 furlongs", None), ("ps", None), ("", None)])
def test_parse_quantity_rejects(text, dim):
    with pytest.raises(ValueError):
        parse_quantity(text, dim)


@given(st.integers(min_value=-10**6, max_value=10**6), st.sampled_from(["p", "n", "u", "m", ""]))
def test_parse_quantity_matches_float_literal(n, prefix):
    scale = {"p": "e-12", "n": "e-9", "u": "e-6", "m": "e-3", "": ""}[prefix]
    assert parse_quantity(f"{n / 10} {prefix}s", "time") == float(f"{n / 10}{scale}")


def test_format_time():
    assert format_time(10e-9) == "10 ns"
    assert format_time(0.02416) == "24.16 ms"


def test_exit_codes_distinct():
    codes = [UsageError.exit_code, ParseError.exit_code, CadError.exit_code,
             NotReadyError.exit_code, ContextInUseError.exit_code]
    assert len(set(codes)) == len(codes)
    assert 0 not in codes
    assert issubclass(CongestionError, CadError)


def test_parse_error_location():
    e = ValidationError("must be non-negative", field="delay", line=4, source="x.toml")
    assert e.line == 4 and e.field == "delay"
    assert str(e).startswith("x.toml:4:")
