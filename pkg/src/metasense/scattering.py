"""Observable reflectance/transmittance traces from circuit transients.

The surface is represented by the instantaneous state of its bridge circuit.
Power waves are taken at the bridge port; the windowed ratio of scattered to
incident energy gives the trace in dB. Three port configurations exist:

``absorber_reflect``
    one-port; the reflected wave is the port power wave ``b``.
``microstrip_transmit``
    the bridge sits in series in a gap of a matched line.
``line_transmit``
    ``n_sections`` identical shunt-loaded cells cascaded on a matched line,
    all sharing one circuit state.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .circuit import BridgeLoad, TransientResult
from .errors import DomainError, WindowTooLarge

MODES = ("absorber_reflect", "microstrip_transmit", "line_transmit")
DEFAULT_PORT_IMPEDANCE = {"absorber_reflect": 377.0, "microstrip_transmit": 50.0, "line_transmit": 50.0}
FLOOR_DB = -80.0
PASSIVITY_TOL_DB = 0.5


@dataclass(frozen=True)
class SurfaceConfig:
    mode: Literal["absorber_reflect", "microstrip_transmit", "line_transmit"] = "absorber_reflect"
    resonator_inductance: float = 2.7e-9
    resonator_capacitance: float = 0.4e-12
    port_impedance: float | None = None
    averaging_window: float = 250e-9
    averaging_step: float = 100e-12
    n_sections: int = 9

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"unknown surface mode {self.mode!r}")
        if self.port_impedance is None:
            object.__setattr__(self, "port_impedance", DEFAULT_PORT_IMPEDANCE[self.mode])
        if not self.port_impedance > 0:
            raise DomainError("port_impedance must be > 0")
        if not self.averaging_window > self.averaging_step > 0:
            raise DomainError("need averaging_window > averaging_step > 0")
        if not (self.resonator_inductance > 0 and self.resonator_capacitance > 0):
            raise DomainError("resonator L and C must be > 0")
        if self.n_sections < 1:
            raise DomainError("n_sections must be >= 1")

    @property
    def quantity(self) -> str:
        return "reflectance" if self.mode == "absorber_reflect" else "transmittance"

    @property
    def resonant_frequency(self) -> float:
        return 1.0 / (2 * np.pi * np.sqrt(self.resonator_inductance * self.resonator_capacitance))


@dataclass(frozen=True)
class TransientTrace:
    times: np.ndarray
    values_db: np.ndarray
    mode: str = "absorber_reflect"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.times) != len(self.values_db):
            raise ValueError("times and values_db differ in length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trace times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    @property
    def quantity(self) -> str:
        return "reflectance" if self.mode == "absorber_reflect" else "transmittance"


def instantaneous_power_waves(v, i, port_impedance: float):
    """Incident and reflected power waves ``(a, b)`` in sqrt(W)."""
    if not port_impedance > 0:
        raise DomainError("port_impedance must be > 0")
    v = np.asarray(v, dtype=float)
    i = np.asarray(i, dtype=float)
    k = 2.0 * np.sqrt(port_impedance)
    return (v + port_impedance * i) / k, (v - port_impedance * i) / k


def _to_db(power_ratio, floor_db: float = FLOOR_DB):
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(power_ratio)
    return np.maximum(db, floor_db)


def scattering_power(load_resistance, mode: str, port_impedance: float, n_sections: int = 9):
    """Scattered power fraction ``|S|^2`` for a purely resistive bridge.

    ``load_resistance`` may be ``inf`` (open bridge).
    """
    r = np.asarray(load_resistance, dtype=float)
    z0 = port_impedance
    with np.errstate(invalid="ignore", divide="ignore"):
        if mode == "absorber_reflect":
            gamma = np.where(np.isinf(r), 1.0, (r - z0) / (r + z0))
            return gamma ** 2
        if mode == "microstrip_transmit":
            return (2.0 * z0 / (2.0 * z0 + r)) ** 2
        if mode == "line_transmit":
            # n cascaded shunt cells [[1, 0], [y, 1]] collapse to [[1, 0], [n*y, 1]]
            y = z0 / r
            t = 2.0 / (2.0 + n_sections * y)
            return t ** 2
    raise DomainError(f"unknown surface mode {mode!r}")


def steady_state_reflectance(load_resistance: float, port_impedance: float,
                             floor_db: float = FLOOR_DB) -> float:
    """Reflectance of a resistive load, ``20 log10(|R - Z0| / (R + Z0))``, floored."""
    if not (load_resistance > 0 and port_impedance > 0):
        raise DomainError("resistances must be > 0")
    return float(_to_db(scattering_power(load_resistance, "absorber_reflect", port_impedance), floor_db))


def steady_state_db(load: BridgeLoad, config: SurfaceConfig, floor_db: float = FLOOR_DB) -> float:
    """Fully charged response: the capacitor is open, leaving ``R_d + R_C``."""
    p = scattering_power(load.steady_state_resistance, config.mode, config.port_impedance, config.n_sections)
    return float(_to_db(p, floor_db))


def _window_layout(n_samples: int, h: float, config: SurfaceConfig):
    # A step finer than the state grid cannot add information, so it is clamped to h.
    nw = max(int(round(config.averaging_window / h)), 1)
    ns = max(int(round(max(config.averaging_step, h) / h)), 1)
    if nw > n_samples:
        raise WindowTooLarge(
            f"averaging window {config.averaging_window:.3e} s exceeds trace duration {n_samples * h:.3e} s")
    starts = np.arange(0, n_samples - nw + 1, ns)
    return nw, starts


def _window_sums(x: np.ndarray, nw: int, starts: np.ndarray) -> np.ndarray:
    c = np.concatenate(([0.0], np.cumsum(x, dtype=np.longdouble)))
    return (c[starts + nw] - c[starts]).astype(float)


def _wave_powers(result: TransientResult, config: SurfaceConfig):
    """Per-sample incident and scattered power (up to the common factor h)."""
    a, b = instantaneous_power_waves(result.port_voltage, result.port_current, config.port_impedance)
    inc = a ** 2
    if config.mode == "absorber_reflect":
        return inc, b ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(result.port_current != 0, result.port_voltage / result.port_current, np.inf)
    r = np.where(r <= 0, np.inf, r)
    return inc, scattering_power(r, config.mode, config.port_impedance, config.n_sections) * inc


def reflectance_trace(result: TransientResult, config: SurfaceConfig,
                      floor_db: float = FLOOR_DB) -> TransientTrace:
    """Moving-average energy ratio of a solved transient.

    Windows of ``averaging_window`` are advanced by ``averaging_step``; each
    output sample is stamped at its window centre. In transmit modes the
    transmitted power replaces the reflected power.

    Raises:
        WindowTooLarge: if the window is longer than the transient.
    """
    t = result.time
    h = result.step
    nw, starts = _window_layout(len(t), h, config)
    inc, sca = _wave_powers(result, config)
    e_inc = _window_sums(inc, nw, starts)
    e_sca = _window_sums(sca, nw, starts)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(e_inc > 0, e_sca / e_inc, 0.0)
    times = t[starts] + 0.5 * (nw - 1) * h
    meta = {
        "capacitance": result.load.capacitance,
        "resistance": result.load.resistance,
        "diode_resistance": result.load.diode_resistance,
        "stimulus_mode": result.stimulus.mode,
        "amplitude": result.stimulus.amplitude,
        "pulse_width": result.stimulus.width,
    }
    return TransientTrace(times, _to_db(ratio, floor_db), config.mode, meta)


def energy_balance(result: TransientResult, config: SurfaceConfig):
    """Per-window energy budget of an absorber-mode run with a linear bridge.

    Returns a dict of arrays ``incident``, ``reflected``, ``dissipated`` and
    ``stored`` (change of capacitor energy across the window), all in joules.
    """
    h = result.step
    nw, starts = _window_layout(len(result), h, config)
    inc, sca = _wave_powers(result, config)
    loss = (result.port_current ** 2 * result.load.diode_resistance
            + result.resistor_current ** 2 * result.load.resistance)
    w_c = 0.5 * result.load.capacitance * result.capacitor_voltage ** 2
    stored = w_c[np.minimum(starts + nw, len(w_c) - 1)] - w_c[starts]
    return {
        "incident": _window_sums(inc, nw, starts) * h,
        "reflected": _window_sums(sca, nw, starts) * h,
        "dissipated": _window_sums(loss, nw, starts) * h,
        "stored": stored,
    }


def frequency_response_surrogate(config: SurfaceConfig, load: BridgeLoad, f_grid,
                                 regime: Literal["short_pulse", "cw"] = "short_pulse",
                                 floor_db: float = FLOOR_DB) -> np.ndarray:
    """Lumped two-state frequency response of the resonant cell.

    The bridge is a fixed resistance: ``R_d`` for short pulses (discharged
    capacitor) and ``R_d + R_C`` for continuous waves (open capacitor). It
    loads an ``L_add``-``C_add`` resonator.

    In ``absorber_reflect`` and ``line_transmit`` mode the resonator is a
    shunt series-LC branch; the absorber returns ``|Gamma|`` of that branch
    as a one-port, the line returns ``|T|`` of ``n_sections`` cascaded shunt
    branches. In ``microstrip_transmit`` the gap holds a parallel LC tank
    shunted by the bridge, in series with the line.

    Returns:
        Array of shape ``(len(f_grid), 2)`` with columns (frequency Hz, dB).
    """
    f = np.asarray(f_grid, dtype=float)
    if np.any(f <= 0):
        raise DomainError("frequencies must be > 0")
    if regime == "short_pulse":
        r = load.diode_resistance
    elif regime == "cw":
        r = load.steady_state_resistance
    else:
        raise DomainError(f"unknown regime {regime!r}")
    w = 2 * np.pi * f
    L, C, z0 = config.resonator_inductance, config.resonator_capacitance, config.port_impedance
    if config.mode == "microstrip_transmit":
        z = 1.0 / (1.0 / r + 1j * w * C + 1.0 / (1j * w * L))
        s = 2 * z0 / (2 * z0 + z)
    else:
        z = r + 1j * w * L + 1.0 / (1j * w * C)
        if config.mode == "absorber_reflect":
            s = (z - z0) / (z + z0)
        else:
            y = z0 / z
            abcd = np.array([[np.ones_like(y), np.zeros_like(y)], [y, np.ones_like(y)]]).transpose(2, 0, 1)
            total = np.linalg.matrix_power(abcd, config.n_sections)
            a, b, c, d = total[:, 0, 0], total[:, 0, 1], total[:, 1, 0], total[:, 1, 1]
            s = 2.0 / (a + b + c + d)  # normalized ABCD, b and c already in Z0 units
    return np.column_stack([f, _to_db(np.abs(s) ** 2, floor_db)])


def write_trace_csv(trace: TransientTrace, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", f"{trace.quantity}_db"])
        for t, v in zip(trace.times, trace.values_db):
            w.writerow([f"{t:.15e}", f"{v:.15e}"])


def write_frequency_csv(response: np.ndarray, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq_hz", "magnitude_db"])
        for f, m in response:
            w.writerow([f"{f:.15e}", f"{m:.15e}"])
