import math

import pytest
from hypothesis import given, strategies as st

from cavem.units import UnitError, angular, cyclic, format_si, parse_quantity


@pytest.mark.parametrize(
    "text,expected",
    [
        ("520 kHz", 520e3),
        ("5.087 GHz", 5.087e9),
        ("800kHz", 800e3),
        ("-0.36 V", -0.36),
        ("70 nm", 70e-9),
        ("12.1 fF", 12.1e-15),
        ("75.8 nH", 75.8e-9),
        ("40 pH", 40e-12),
        ("265 us", 265e-6),
        ("265 µs", 265e-6),
        ("20 mK", 0.02),
        ("10 uA", 10e-6),
        ("45.4 kHz/V", 45.4e3),
        ("7.48e12 Hz/T^2", 7.48e12),
        ("170 GPa", 170e9),
        ("500 GOhm", 500e9),
        ("1.5 %", 0.015),
        ("2.0", 2.0),
        ("3 T", 3.0),
        ("2 THz", 2e12),
    ],
)
def test_parse_values(text, expected):
    assert parse_quantity(text) == pytest.approx(expected, rel=1e-15)


def test_ev_converts_to_joules():
    assert parse_quantity("1.5 eV") == pytest.approx(1.5 * 1.602176634e-19, rel=1e-12)


def test_kg_via_gram_prefix():
    assert parse_quantity("1 kg") == pytest.approx(1.0)
    assert parse_quantity("5 g") == pytest.approx(5e-3)


def test_expected_dimension_enforced():
    assert parse_quantity("520 kHz", expect="Hz") == 520e3
    with pytest.raises(UnitError):
        parse_quantity("520 kHz", expect="V")
    with pytest.raises(UnitError):
        parse_quantity("12 zorks")
    with pytest.raises(UnitError):
        parse_quantity("not-a-number Hz")


def test_compound_dimension_labels():
    assert parse_quantity("1 kHz/V", expect="Hz/V") == 1e3
    with pytest.raises(UnitError):
        parse_quantity("1 kHz", expect="Hz/V")


def test_angular_cyclic_inverse():
    assert cyclic(angular(5.087e9)) == pytest.approx(5.087e9, rel=1e-15)
    assert angular(1.0) == pytest.approx(2 * math.pi)


def test_format_si_round_values():
    assert format_si(5.087e9, "Hz") == "5.087 GHz"
    assert format_si(520e3, "Hz") == "520 kHz"
    assert format_si(75.8e-9, "H") == "75.8 nH"
    assert format_si(0.0, "V") == "0 V"


@given(st.floats(min_value=1e-18, max_value=1e18, allow_nan=False))
def test_format_parse_round_trip_close(value):
    assert parse_quantity(format_si(value, "Hz", digits=17)) == pytest.approx(value, rel=1e-12)
