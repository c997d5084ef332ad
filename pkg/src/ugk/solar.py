"""Solar position and shadow geometry primitives.

Shadow length is ``h_obj / tan(elevation)`` capped at an object-specific
maximum, and the shadow points away from the sun (azimuth + 180 degrees).
Degree-native trig (scipy.special) is used so that round angles like 45
degrees give exact results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import tandg

from .errors import SunBelowHorizon


@dataclass(frozen=True)
class SunState:
    elevation_deg: float
    azimuth_deg: float  # clockwise from north

    @property
    def is_up(self) -> bool:
        return self.elevation_deg > 0.0


def solar_position(latitude_deg: float, longitude_deg: float, utc_offset_h: float,
                   day_of_year: int, clock_hour: float) -> SunState:
    """Approximate sun position from declination and hour angle.

    Uses Spencer's Fourier fits for declination and the equation of time;
    accuracy is a few tenths of a degree, sufficient for hourly shadow
    geometry at grid resolution.
    """
    if abs(latitude_deg) > 90:
        raise ValueError("latitude out of range")
    g = 2.0 * math.pi / 365.0 * (day_of_year - 1 + (clock_hour - 12.0) / 24.0)
    eqtime_min = 229.18 * (
        0.000075
        + 0.001868 * math.cos(g)
        - 0.032077 * math.sin(g)
        - 0.014615 * math.cos(2 * g)
        - 0.040849 * math.sin(2 * g)
    )
    decl = (
        0.006918
        - 0.399912 * math.cos(g)
        + 0.070257 * math.sin(g)
        - 0.006758 * math.cos(2 * g)
        + 0.000907 * math.sin(2 * g)
        - 0.002697 * math.cos(3 * g)
        + 0.00148 * math.sin(3 * g)
    )
    time_offset_min = eqtime_min + 4.0 * longitude_deg - 60.0 * utc_offset_h
    true_solar_min = clock_hour * 60.0 + time_offset_min
    ha = math.radians(true_solar_min / 4.0 - 180.0)

    lat = math.radians(latitude_deg)
    sin_elev = math.sin(lat) * math.sin(decl) + math.cos(lat) * math.cos(decl) * math.cos(ha)
    sin_elev = min(1.0, max(-1.0, sin_elev))
    elev = math.asin(sin_elev)

    cos_elev = math.cos(elev)
    if cos_elev < 1e-12:
        azim = 180.0  # sun at zenith: azimuth is degenerate
    else:
        cos_az = (math.sin(decl) - math.sin(lat) * sin_elev) / (math.cos(lat) * cos_elev)
        cos_az = min(1.0, max(-1.0, cos_az))
        azim = math.degrees(math.acos(cos_az))
        if ha > 0:  # afternoon: sun west of the meridian
            azim = 360.0 - azim
    return SunState(elevation_deg=math.degrees(elev), azimuth_deg=azim % 360.0)


def shadow_length(h_obj_m: float, sun: SunState, cell_size_m: float,
                  r_max_grids: float) -> float:
    """Shadow reach in grid units, 0 when the sun is down, capped at r_max."""
    if h_obj_m <= 0:
        raise ValueError("object height must be positive")
    if not sun.is_up:
        return 0.0
    tan_elev = float(tandg(sun.elevation_deg))
    if math.isinf(tan_elev):
        return 0.0
    raw = h_obj_m / (tan_elev * cell_size_m)
    return min(raw, float(r_max_grids))


def shadow_azimuth(sun: SunState) -> float:
    if not sun.is_up:
        raise SunBelowHorizon("no shadow direction when the sun is down")
    return (sun.azimuth_deg + 180.0) % 360.0


def sun_for_record(record, scene) -> SunState:
    """Sun state for a weather record, preferring file-provided angles."""
    if record.solar_elev_deg is not None and record.solar_azim_deg is not None:
        return SunState(record.solar_elev_deg, record.solar_azim_deg)
    # day-of-year and UTC offset are not part of the weather schema; a
    # mid-year day and longitude-derived offset are used when angles are absent
    return solar_position(
        scene.latitude, scene.longitude, round(scene.longitude / 15.0), 172,
        record.clock_hour,
    )
