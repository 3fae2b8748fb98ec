"""Temperature-dependent capacitor and photocell models, plus calibration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .circuit import DiodeModel, diode_dynamic_resistance
from .errors import CalibrationFailure, DomainError
from .scattering import FLOOR_DB, MODES, DEFAULT_PORT_IMPEDANCE, scattering_power

TEMPERATURE_RANGE = (15.0, 80.0)
LIGHT_RANGE = (1.0, 2500.0)
DARK_RESISTANCE_CAP = 10e6
CALIBRATION_BRACKET = (10.0, 10e6)

# measured steady-state anchors (lux, dB), C = 1 nF, absorber mode
MEASURED_LIGHT_ANCHORS = ((3.0, -30.9), (1970.0, -37.5))


@dataclass(frozen=True)
class SensorEnvironment:
    temperature: float
    light_intensity: float

    def __post_init__(self):
        lo, hi = TEMPERATURE_RANGE
        if not lo <= self.temperature <= hi:
            raise DomainError(f"temperature {self.temperature} outside [{lo}, {hi}] C")
        lo, hi = LIGHT_RANGE
        if not lo <= self.light_intensity <= hi:
            raise DomainError(f"light intensity {self.light_intensity} outside [{lo}, {hi}] lux")


@dataclass(frozen=True)
class ThermoCapacitor:
    """Linear-in-temperature capacitance with a positive floor.

    The default slope halves the capacitance between 23.5 and 65.0 C.
    """

    reference_capacitance: float = 10e-9
    reference_temperature: float = 23.5
    slope: float = 0.5 / (65.0 - 23.5)
    floor: float = 0.1e-9

    def __post_init__(self):
        if not self.reference_capacitance > 0 or not self.floor > 0:
            raise DomainError("capacitances must be > 0")
        if not self.slope > 0:
            raise DomainError("slope must be > 0 for a decreasing C(T)")
        if self.floor >= self.reference_capacitance:
            raise DomainError("floor must be below the reference capacitance")


@dataclass(frozen=True)
class Photocell:
    """Power-law light-dependent resistor ``R = R_ref (L / L_ref)^-gamma``."""

    reference_resistance: float
    reference_lux: float = 1.0
    exponent: float = 0.7

    def __post_init__(self):
        if not self.reference_resistance > 0 or not self.reference_lux > 0:
            raise DomainError("reference resistance and lux must be > 0")
        if not self.exponent > 0:
            raise DomainError("exponent must be > 0")


def capacitance_at(cap: ThermoCapacitor, temperature) -> float:
    t = np.asarray(temperature, dtype=float)
    lo, hi = TEMPERATURE_RANGE
    if np.any(t < lo) or np.any(t > hi):
        raise DomainError(f"temperature outside [{lo}, {hi}] C")
    c = cap.reference_capacitance * (1.0 - cap.slope * (t - cap.reference_temperature))
    c = np.maximum(c, cap.floor)
    return float(c) if c.ndim == 0 else c


def resistance_at(cell: Photocell, lux) -> float:
    lux = np.asarray(lux, dtype=float)
    if np.any(lux <= 0):
        raise DomainError("light intensity must be > 0")
    r = cell.reference_resistance * (lux / cell.reference_lux) ** (-cell.exponent)
    r = np.minimum(r, DARK_RESISTANCE_CAP)
    return float(r) if r.ndim == 0 else r


@dataclass(frozen=True)
class CircuitContext:
    """Everything besides R_C that fixes the steady-state response."""

    diode_resistance: float = diode_dynamic_resistance(DiodeModel())
    mode: str = "absorber_reflect"
    port_impedance: float | None = None
    n_sections: int = 9

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown surface mode {self.mode!r}")
        if self.port_impedance is None:
            object.__setattr__(self, "port_impedance", DEFAULT_PORT_IMPEDANCE[self.mode])

    def steady_db(self, resistance: float) -> float:
        p = scattering_power(self.diode_resistance + resistance, self.mode,
                             self.port_impedance, self.n_sections)
        return float(max(10.0 * np.log10(p), FLOOR_DB)) if p > 0 else FLOOR_DB


def solve_resistance(target_db: float, context: CircuitContext,
                     bracket: tuple[float, float] = CALIBRATION_BRACKET) -> float:
    """R_C giving ``target_db`` at steady state.

    In absorber mode the response is V-shaped around ``R_d + R_C = Z_0``;
    only the branch above the match point is searched, where the response
    falls as the resistance drops.
    """
    lo, hi = bracket
    if context.mode == "absorber_reflect":
        lo = max(lo, context.port_impedance - context.diode_resistance)
    f = lambda r: context.steady_db(r) - target_db
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise CalibrationFailure(
            f"no resistance in [{lo:.3g}, {hi:.3g}] ohm reaches {target_db} dB")
    return brentq(f, lo, hi, xtol=1e-12, rtol=1e-14, maxiter=200)


def calibrate_photocell(target_points: Sequence[tuple[float, float]],
                        context: CircuitContext | None = None,
                        exponent: float | None = None,
                        reference_lux: float | None = None) -> Photocell:
    """Fit a :class:`Photocell` to ``(lux, steady-state dB)`` targets.

    Each target is inverted to a resistance by bracketed root finding; the
    exponent is then the negated slope of a least-squares line in log-log
    space. With ``exponent`` given, a single target suffices and only
    ``R_ref`` is fitted.

    Raises:
        CalibrationFailure: if a target is unreachable or the fitted exponent
            is not positive.
    """
    context = context or CircuitContext()
    pts = [(float(l), float(d)) for l, d in target_points]
    if any(l <= 0 for l, _ in pts):
        raise CalibrationFailure("lux values must be > 0")
    lux = np.array([l for l, _ in pts])
    res = np.array([solve_resistance(d, context) for _, d in pts])
    ref = float(reference_lux if reference_lux is not None else lux[0])
    if exponent is None:
        if len(np.unique(lux)) < 2:
            raise CalibrationFailure("need at least two distinct lux values to fit the exponent")
        slope, intercept = np.polyfit(np.log(lux / ref), np.log(res), 1)
        exponent = -slope
        r_ref = float(np.exp(intercept))
    else:
        r_ref = float(np.exp(np.mean(np.log(res) + exponent * np.log(lux / ref))))
    if not exponent > 1e-12:
        raise CalibrationFailure(f"fitted exponent {exponent:.3g} is not positive")
    return Photocell(r_ref, ref, float(exponent))


def default_photocell(context: CircuitContext | None = None) -> Photocell:
    """Photocell calibrated on the measured 3 lux / 1970 lux anchors."""
    return calibrate_photocell(MEASURED_LIGHT_ANCHORS, context)
