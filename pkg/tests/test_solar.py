"""Solar geometry: closed-form spot checks plus an independent ephemeris
cross-check (the PSA algorithm, implemented from scratch here)."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from ugk.errors import SunBelowHorizon
from ugk.solar import SunState, shadow_azimuth, shadow_length, solar_position


def test_shadow_length_exact_at_45_degrees():
    # 12 m object, 45-degree sun, 4 m cells: 12/4 = 3 grid units, exactly
    assert shadow_length(12.0, SunState(45.0, 180.0), 4.0, 15.0) == 3.0


def test_shadow_length_cap():
    assert shadow_length(100.0, SunState(5.0, 180.0), 4.0, 15.0) == 15.0
    assert shadow_length(100.0, SunState(5.0, 180.0), 4.0, 5.0) == 5.0


def test_shadow_length_zero_cases():
    assert shadow_length(10.0, SunState(-3.0, 180.0), 4.0, 15.0) == 0.0
    assert shadow_length(10.0, SunState(0.0, 180.0), 4.0, 15.0) == 0.0
    assert shadow_length(10.0, SunState(90.0, 180.0), 4.0, 15.0) == 0.0


def test_shadow_length_rejects_nonpositive_height():
    with pytest.raises(ValueError):
        shadow_length(0.0, SunState(45.0, 180.0), 4.0, 15.0)


def test_shadow_azimuth_opposes_sun():
    assert shadow_azimuth(SunState(30.0, 135.0)) == 315.0
    assert shadow_azimuth(SunState(30.0, 315.0)) == 135.0


def test_shadow_azimuth_requires_sun_up():
    with pytest.raises(SunBelowHorizon):
        shadow_azimuth(SunState(-1.0, 135.0))


@given(azim=st.floats(0.0, 359.999))
@settings(max_examples=50, deadline=None)
def test_shadow_azimuth_is_an_involution(azim):
    once = shadow_azimuth(SunState(30.0, azim))
    twice = shadow_azimuth(SunState(30.0, once))
    assert twice == pytest.approx(azim % 360.0, abs=1e-9)


@given(h=st.floats(1.0, 80.0),
       lo=st.floats(5.0, 80.0), delta=st.floats(0.1, 9.0))
@settings(max_examples=50, deadline=None)
def test_shadow_length_monotone_in_elevation(h, lo, delta):
    a = shadow_length(h, SunState(lo, 180.0), 4.0, 15.0)
    b = shadow_length(h, SunState(lo + delta, 180.0), 4.0, 15.0)
    assert b <= a


# ---------------------------------------------------------------------------
# Independent ephemeris cross-check

def psa_position(lat_deg, lon_deg, utc_hour, year, month, day):
    """Blanco-Muriel et al. PSA solar position algorithm (2001 coefficients),
    implemented independently of the library code."""
    rad = math.pi / 180.0
    # Julian day from calendar date (valid for the Gregorian era)
    jd = (
        (1461 * (year + 4800 + (month - 14) // 12)) // 4
        + (367 * (month - 2 - 12 * ((month - 14) // 12))) // 12
        - (3 * ((year + 4900 + (month - 14) // 12) // 100)) // 4
        + day - 32075
    ) - 0.5 + utc_hour / 24.0
    n = jd - 2451545.0
    omega = 2.1429 - 0.0010394594 * n
    mean_lon = 4.8950630 + 0.017202791698 * n
    anomaly = 6.2400600 + 0.0172019699 * n
    ecl_lon = (mean_lon + 0.03341607 * math.sin(anomaly)
               + 0.00034894 * math.sin(2 * anomaly) - 0.0001134
               - 0.0000203 * math.sin(omega))
    obliquity = 0.4090928 - 6.2140e-9 * n + 0.0000396 * math.cos(omega)
    ra = math.atan2(math.cos(obliquity) * math.sin(ecl_lon), math.cos(ecl_lon))
    ra %= 2 * math.pi
    decl = math.asin(math.sin(obliquity) * math.sin(ecl_lon))
    gmst = 6.6974243242 + 0.0657098283 * n + utc_hour
    lmst = (gmst * 15 + lon_deg) * rad
    ha = lmst - ra
    lat = lat_deg * rad
    zenith = math.acos(math.cos(lat) * math.cos(ha) * math.cos(decl)
                       + math.sin(decl) * math.sin(lat))
    azim = math.atan2(-math.sin(ha),
                      math.tan(decl) * math.cos(lat) - math.sin(lat) * math.cos(ha))
    if azim < 0:
        azim += 2 * math.pi
    # parallax correction
    zenith += 6371.01 / 149597890.0 * math.sin(zenith)
    return 90.0 - zenith / rad, azim / rad


@pytest.mark.parametrize("clock", [9.0, 11.0, 13.0, 15.0, 17.0])
def test_position_matches_independent_ephemeris(clock):
    """Singapore, June 21 (day 172): both algorithms agree within 0.5 degrees
    in elevation and in the horizontal sun vector."""
    lat, lon = 1.35, 103.82
    utc_offset = round(lon / 15.0)  # solar-time convention used by the library
    got = solar_position(lat, lon, utc_offset, 172, clock)
    want_elev, want_azim = psa_position(lat, lon, clock - utc_offset, 2023, 6, 21)
    assert got.elevation_deg == pytest.approx(want_elev, abs=0.5)
    # compare azimuths as unit vectors: wrap-around and near-zenith safe
    d = abs((got.azimuth_deg - want_azim + 180.0) % 360.0 - 180.0)
    assert d * math.cos(math.radians(want_elev)) < 0.5


def test_position_daily_arc_shape():
    """Sun rises in the east, sets in the west, peaks near local noon."""
    elevs, azims = [], []
    for clock in range(7, 20):
        s = solar_position(1.35, 103.82, 7, 172, float(clock))
        elevs.append(s.elevation_deg)
        azims.append(s.azimuth_deg)
    peak = max(range(len(elevs)), key=lambda i: elevs[i])
    assert 11 <= peak + 7 <= 14
    assert 0.0 < azims[0] < 180.0  # morning: east half
    assert 180.0 < azims[-1] < 360.0  # evening: west half
