"""Diode physics and transient solvers for the diode-bridge + parallel RC cell.

Two topologies are supported:

* ``dc_envelope``: the reduced circuit in which the rectified drive is a DC
  source feeding the bridge resistance in series with ``R_C || C``. The bridge
  is either a fixed resistance ``R_d`` (``diodes="linear"``) or two Shockley
  diodes in series (``diodes="shockley"``).
* ``rf_sine``: the full four-diode bridge driven by a sinusoidal Thevenin
  source with internal impedance ``Z_0``.

Both are integrated with the trapezoidal rule and a per-step Newton solve.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterator, Literal

import numpy as np
from scipy.signal import lfilter

from .errors import DomainError, InvalidStimulus, NonConvergence

THERMAL_VOLTAGE = 0.02585  # V at 300 K
DEFAULT_ON_CURRENT = 1e-3  # A

NEWTON_TOL = 1e-10
NEWTON_MAX_ITER = 50
MAX_STEP_HALVINGS = 6  # step / 64
_EXP_LIMIT = 80.0


@dataclass(frozen=True)
class DiodeModel:
    """SPICE-style parameters of a single diode (HSMS-286x defaults).

    Junction capacitance, grading, built-in potential and bandgap are carried
    for completeness but not evaluated. Breakdown is only modelled when
    ``breakdown`` is set.
    """

    saturation_current: float = 5e-8
    ideality: float = 1.08
    series_resistance: float = 6.0
    breakdown_voltage: float = 7.0
    junction_capacitance: float = 0.18e-12
    grading: float = 0.5
    built_in_potential: float = 0.65
    bandgap: float = 0.69
    breakdown_current: float = 1e-15
    thermal_voltage: float = THERMAL_VOLTAGE
    breakdown: bool = False

    def __post_init__(self):
        if not self.saturation_current > 0:
            raise DomainError("saturation_current must be > 0")
        if not self.ideality >= 1:
            raise DomainError("ideality must be >= 1")
        if not self.series_resistance >= 0:
            raise DomainError("series_resistance must be >= 0")
        if not self.thermal_voltage > 0:
            raise DomainError("thermal_voltage must be > 0")

    @property
    def n_vt(self) -> float:
        return self.ideality * self.thermal_voltage


@dataclass(frozen=True)
class BridgeLoad:
    """Parallel RC inside the bridge plus the effective bridge resistance.

    Attributes:
        capacitance: C in farads.
        resistance: R_C in ohms.
        diode_resistance: effective resistance R_d of the conducting path.
        source_amplitude: E_0, the DC-equivalent drive in volts.
        port_impedance: Z_0 of the driving port in ohms.
    """

    capacitance: float
    resistance: float
    diode_resistance: float
    source_amplitude: float = 1.0
    port_impedance: float = 377.0

    def __post_init__(self):
        for name in ("capacitance", "resistance", "diode_resistance", "port_impedance"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be > 0")

    @classmethod
    def from_diode(cls, model: DiodeModel, capacitance: float, resistance: float,
                   on_current: float = DEFAULT_ON_CURRENT, **kwargs) -> "BridgeLoad":
        r_d = diode_dynamic_resistance(model, on_current)
        return cls(capacitance, resistance, r_d, **kwargs)

    @property
    def steady_state_resistance(self) -> float:
        return self.diode_resistance + self.resistance


@dataclass(frozen=True)
class CircuitState:
    time: float
    capacitor_voltage: float
    capacitor_current: float
    resistor_current: float
    stored_charge: float
    port_voltage: float
    port_current: float


@dataclass(frozen=True)
class StimulusSpec:
    """Drive waveform description.

    A continuous wave is a pulse whose width equals the total duration, which
    is the default when ``pulse_width`` is None. ``sample_step`` None selects
    the mode default (tau/200 for ``dc_envelope``, 100 ps for ``rf_sine``).
    """

    mode: Literal["dc_envelope", "rf_sine"] = "dc_envelope"
    amplitude: float = 1.0
    total_duration: float = 1e-6
    pulse_width: float | None = None
    sample_step: float | None = None
    frequency: float = 3.9e9

    def __post_init__(self):
        if self.mode not in ("dc_envelope", "rf_sine"):
            raise InvalidStimulus(f"unknown stimulus mode {self.mode!r}")
        if not self.total_duration > 0:
            raise InvalidStimulus("total_duration must be > 0")
        if self.sample_step is not None and not self.sample_step > 0:
            raise InvalidStimulus("sample_step must be > 0")
        if self.pulse_width is not None:
            if not self.pulse_width > 0:
                raise InvalidStimulus("pulse_width must be > 0")
            if self.pulse_width > self.total_duration:
                raise InvalidStimulus("total_duration must be >= pulse_width")
        if self.mode == "rf_sine" and not self.frequency > 0:
            raise InvalidStimulus("frequency must be > 0 in rf_sine mode")

    @property
    def width(self) -> float:
        return self.total_duration if self.pulse_width is None else self.pulse_width

    def source(self, t):
        """Source voltage at time(s) ``t``."""
        t = np.asarray(t, dtype=float)
        on = t <= self.width * (1 + 1e-12)
        if self.mode == "dc_envelope":
            wave = np.full_like(t, self.amplitude)
        else:
            wave = self.amplitude * np.sin(2 * np.pi * self.frequency * t)
        return np.where(on, wave, 0.0)


@dataclass(frozen=True)
class TransientResult:
    """Uniformly sampled solution of a transient run (array-of-fields form).

    Indexing or iterating yields :class:`CircuitState` records.
    """

    time: np.ndarray
    capacitor_voltage: np.ndarray
    capacitor_current: np.ndarray
    resistor_current: np.ndarray
    stored_charge: np.ndarray
    port_voltage: np.ndarray
    port_current: np.ndarray
    load: BridgeLoad
    stimulus: StimulusSpec
    diodes: str = field(default="linear")

    def __len__(self) -> int:
        return len(self.time)

    def __getitem__(self, k: int) -> CircuitState:
        return CircuitState(
            float(self.time[k]), float(self.capacitor_voltage[k]),
            float(self.capacitor_current[k]), float(self.resistor_current[k]),
            float(self.stored_charge[k]), float(self.port_voltage[k]),
            float(self.port_current[k]),
        )

    def __iter__(self) -> Iterator[CircuitState]:
        for k in range(len(self)):
            yield self[k]

    @property
    def step(self) -> float:
        return float(self.time[1] - self.time[0]) if len(self) > 1 else 0.0


def _check_diode_domain(model: DiodeModel, v):
    v = np.asarray(v, dtype=float)
    if np.any(v < -model.breakdown_voltage) or np.any(v > 2.0) or np.any(~np.isfinite(v)):
        raise DomainError(f"diode voltage outside [-{model.breakdown_voltage}, 2] V")
    return v


def _junction(model: DiodeModel, vj):
    """Ideal junction current and conductance (no series resistance)."""
    nvt = model.n_vt
    u = np.minimum(vj / nvt, _EXP_LIMIT)
    e = np.exp(u)
    i = model.saturation_current * np.expm1(u)
    g = model.saturation_current * e / nvt
    if model.breakdown:
        eb = np.exp(np.minimum(-(vj + model.breakdown_voltage) / nvt, _EXP_LIMIT))
        i = i - model.breakdown_current * eb
        g = g + model.breakdown_current * eb / nvt
    return i, g


def diode_current(model: DiodeModel, v, max_iter: int = 100):
    """Terminal current of a diode with series resistance at voltage(s) ``v``.

    Solves ``i = I_S (exp((v - i R_S) / (N V_T)) - 1)`` by a Newton iteration
    on the junction voltage, safeguarded by a bisection bracket so that every
    iterate stays between 0 and ``v``.

    Raises:
        DomainError: if ``v`` lies outside ``[-V_B, 2]`` volts.
        NonConvergence: if the iteration cap is reached.
    """
    scalar = np.ndim(v) == 0
    v = _check_diode_domain(model, v)
    i = _diode_current_unchecked(model, np.atleast_1d(v), max_iter)
    return float(i[0]) if scalar else i.reshape(v.shape)


def _diode_current_unchecked(model: DiodeModel, v: np.ndarray, max_iter: int = 100):
    rs = model.series_resistance
    if rs == 0:
        return _junction(model, v)[0]
    nvt = model.n_vt
    lo = np.minimum(v, 0.0)
    hi = np.maximum(v, 0.0)
    # I(vj) <= v / R_S caps the junction voltage from above for forward bias
    fwd = v > 0
    hi = np.where(fwd, np.minimum(hi, nvt * np.log1p(np.maximum(v, 0) / (rs * model.saturation_current))), hi)
    x = hi.copy()
    for _ in range(max_iter):
        ij, gj = _junction(model, x)
        g = x + rs * ij - v
        done = np.abs(g) <= 1e-15 * np.maximum(np.abs(v), 1e-3)
        hi = np.where(g > 0, x, hi)
        lo = np.where(g <= 0, x, lo)
        x_new = x - g / (1.0 + rs * gj)
        outside = (x_new <= lo) | (x_new >= hi)
        x_new = np.where(outside, 0.5 * (lo + hi), x_new)
        x_new = np.where(done, x, x_new)
        if np.all(done | (np.abs(x_new - x) <= 4e-16 * np.maximum(np.abs(x), 1e-12))):
            x = x_new
            break
        x = x_new
    else:
        raise NonConvergence("diode current iteration did not converge")
    # The junction form avoids cancellation in v - x under reverse bias.
    return _junction(model, x)[0]


def diode_dynamic_resistance(model: DiodeModel, on_current: float = DEFAULT_ON_CURRENT) -> float:
    """Small-signal resistance of the two series diodes conducting in the bridge.

    ``R_d = 2 (N V_T / i_on + R_S)``.
    """
    if not on_current > 0:
        raise DomainError("on_current must be > 0")
    return 2.0 * (model.n_vt / on_current + model.series_resistance)


def time_constant(load: BridgeLoad) -> float:
    """Charging time constant ``C R_C R_d / (R_C + R_d)``."""
    rc, rd = load.resistance, load.diode_resistance
    return load.capacitance * rc * rd / (rc + rd)


def analytic_capacitor_voltage(load: BridgeLoad, t):
    """Closed-form capacitor voltage of the DC-driven equivalent circuit."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be >= 0")
    rc, rd = load.resistance, load.diode_resistance
    v = rc / (rc + rd) * load.source_amplitude * -np.expm1(-t / time_constant(load))
    return float(v) if v.ndim == 0 else v


def _time_grid(stimulus: StimulusSpec, step: float) -> np.ndarray:
    n = int(math.floor(stimulus.total_duration / step * (1 + 1e-12))) + 1
    if n < 2:
        raise InvalidStimulus("total_duration shorter than one sample step")
    return np.arange(n) * step


def transient_solve(model: DiodeModel, load: BridgeLoad, stimulus: StimulusSpec,
                    diodes: Literal["linear", "shockley"] = "linear",
                    fast: bool = True) -> TransientResult:
    """Integrate the bridge circuit over ``stimulus.total_duration``.

    Args:
        model: diode parameters (used by ``shockley`` and ``rf_sine``).
        load: RC load and effective bridge resistance.
        stimulus: drive description; ``mode`` selects the topology.
        diodes: bridge representation in ``dc_envelope`` mode.
        fast: evaluate the linear ``dc_envelope`` recurrence as a filter
            instead of stepping the Newton loop (identical update equation).

    Returns:
        A :class:`TransientResult` sampled every ``sample_step``.
    """
    if stimulus.mode == "dc_envelope":
        if diodes not in ("linear", "shockley"):
            raise InvalidStimulus(f"unknown diode representation {diodes!r}")
        step = stimulus.sample_step or time_constant(load) / 200.0
        t = _time_grid(stimulus, step)
        if diodes == "linear" and fast:
            return _solve_envelope_linear(load, stimulus, t)
        return _solve_envelope(model, load, stimulus, t, diodes)
    step = stimulus.sample_step or 100e-12
    t = _time_grid(stimulus, step)
    return _solve_bridge(model, load, stimulus, t)


def _integrate_charge(i_c: np.ndarray, h: float) -> np.ndarray:
    q = np.empty_like(i_c)
    q[0] = 0.0
    np.cumsum(0.5 * h * (i_c[1:] + i_c[:-1]), out=q[1:])
    return q


def _envelope_result(load, stimulus, t, v, e, i_port, diodes):
    h = t[1] - t[0]
    i_r = v / load.resistance
    i_c = i_port - i_r
    return TransientResult(t, v, i_c, i_r, _integrate_charge(i_c, h), e, i_port,
                           load, stimulus, diodes)


def _solve_envelope_linear(load: BridgeLoad, stimulus: StimulusSpec, t: np.ndarray) -> TransientResult:
    h = t[1] - t[0]
    c, rd = load.capacitance, load.diode_resistance
    g = 1.0 / rd + 1.0 / load.resistance
    denom = c + 0.5 * h * g
    alpha = (c - 0.5 * h * g) / denom
    beta = 0.5 * h / (rd * denom)
    e = stimulus.source(t)
    v, _ = lfilter([beta, beta], [1.0, -alpha], e, zi=[-beta * e[0]])
    return _envelope_result(load, stimulus, t, v, e, (e - v) / rd, "linear")


def _bridge_branch(model: DiodeModel, load: BridgeLoad, diodes: str):
    """Current (and derivative) through the bridge for a voltage drop ``u``."""
    if diodes == "linear":
        rd = load.diode_resistance
        return lambda u: (u / rd, 1.0 / rd)

    def pair(u):
        # two identical diodes in series share the drop equally
        i = _diode_current_unchecked(model, np.atleast_1d(0.5 * u))[0]
        nvt, rs = model.n_vt, model.series_resistance
        gj = _junction(model, np.atleast_1d(0.5 * u - i * rs))[1][0]
        return i, 0.5 * gj / (1.0 + rs * gj)
    return pair


def _solve_envelope(model, load, stimulus, t, diodes) -> TransientResult:
    h = t[1] - t[0]
    c, g_r = load.capacitance, 1.0 / load.resistance
    branch = _bridge_branch(model, load, diodes)
    scale = max(abs(stimulus.amplitude), 1e-12)

    def rhs(tk, v):
        i_b, _ = branch(float(stimulus.source(tk)) - v)
        return i_b - g_r * v

    def step(t0, v0, f0, dt, depth=0):
        t1 = t0 + dt
        e1 = float(stimulus.source(t1))
        v1 = v0
        for _ in range(NEWTON_MAX_ITER):
            i_b, g_b = branch(e1 - v1)
            f1 = i_b - g_r * v1
            r = c * (v1 - v0) - 0.5 * dt * (f0 + f1)
            dr = c + 0.5 * dt * (g_b + g_r)
            dv = -r / dr
            v1 += dv
            if abs(dv) <= NEWTON_TOL * max(abs(v1), scale):
                return v1, rhs(t1, v1)
        if depth >= MAX_STEP_HALVINGS:
            raise NonConvergence(f"Newton failed at t={t1:.6e} s at minimum step size")
        vm, fm = step(t0, v0, f0, dt / 2, depth + 1)
        return step(t0 + dt / 2, vm, fm, dt / 2, depth + 1)

    v = np.zeros_like(t)
    f = rhs(0.0, 0.0)
    for k in range(1, len(t)):
        v[k], f = step(t[k - 1], v[k - 1], f, h)
    e = stimulus.source(t)
    i_port = np.array([branch(e_k - v_k)[0] for e_k, v_k in zip(e, v)])
    return _envelope_result(load, stimulus, t, v, e, i_port, diodes)


# Node numbering for the full bridge: 0 = port, 1 = bridge +, 2 = bridge -,
# -1 = ground; diodes as (anode, cathode).
_BRIDGE_DIODES = ((0, 1), (-1, 1), (2, 0), (2, -1))
_GMIN = 1e-12


def _solve_bridge(model: DiodeModel, load: BridgeLoad, stimulus: StimulusSpec, t: np.ndarray) -> TransientResult:
    h = t[1] - t[0]
    z, c, g_r = load.port_impedance, load.capacitance, 1.0 / load.resistance
    rs = model.series_resistance
    internal = rs > 0
    n = 3 + (4 if internal else 0)
    scale = max(abs(stimulus.amplitude), 1e-3)

    def volt(x, node):
        return 0.0 if node < 0 else x[node]

    def assemble(x, vs, dt, u0, ic0):
        """Residual (currents leaving each node) and Jacobian."""
        F = np.zeros(n)
        J = np.zeros((n, n))
        F[0] += (x[0] - vs) / z
        J[0, 0] += 1.0 / z
        gc = 2.0 * c / dt
        u = x[1] - x[2]
        i_load = g_r * u + gc * (u - u0) - ic0
        F[1] += i_load
        F[2] -= i_load
        gl = g_r + gc
        J[1, 1] += gl
        J[1, 2] -= gl
        J[2, 1] -= gl
        J[2, 2] += gl
        for k, (a, kk) in enumerate(_BRIDGE_DIODES):
            anode = 3 + k if internal else a
            vj = volt(x, anode) - volt(x, kk)
            ij, gj = _junction(model, vj)
            for node, sgn in ((anode, 1.0), (kk, -1.0)):
                if node < 0:
                    continue
                F[node] += sgn * ij
                for other, s2 in ((anode, 1.0), (kk, -1.0)):
                    if other >= 0:
                        J[node, other] += sgn * s2 * gj
            if internal:
                ir = (volt(x, a) - x[anode]) / rs
                for node, sgn in ((a, 1.0), (anode, -1.0)):
                    if node < 0:
                        continue
                    F[node] += sgn * ir
                    for other, s2 in ((a, 1.0), (anode, -1.0)):
                        if other >= 0:
                            J[node, other] += sgn * s2 / rs
        J[np.diag_indices(n)] += _GMIN
        return F, J, i_load - g_r * u

    def step(t0, x0, ic0, dt, depth=0):
        t1 = t0 + dt
        vs = float(stimulus.source(t1))
        u0 = x0[1] - x0[2]
        x = x0.copy()
        for _ in range(NEWTON_MAX_ITER):
            F, J, _ = assemble(x, vs, dt, u0, ic0)
            dx = np.linalg.solve(J, -F)
            big = np.max(np.abs(dx))
            if big > 0.2:
                dx *= 0.2 / big
            x += dx
            if big <= NEWTON_TOL * max(np.max(np.abs(x)), scale):
                _, _, ic1 = assemble(x, vs, dt, u0, ic0)
                return x, ic1
        if depth >= MAX_STEP_HALVINGS:
            raise NonConvergence(f"Newton failed at t={t1:.6e} s at minimum step size")
        xm, icm = step(t0, x0, ic0, dt / 2, depth + 1)
        return step(t0 + dt / 2, xm, icm, dt / 2, depth + 1)

    xs = np.zeros((len(t), n))
    i_c = np.zeros(len(t))
    for k in range(1, len(t)):
        xs[k], i_c[k] = step(t[k - 1], xs[k - 1], i_c[k - 1], h)
    vs = stimulus.source(t)
    u = xs[:, 1] - xs[:, 2]
    i_r = g_r * u
    i_port = (vs - xs[:, 0]) / z
    return TransientResult(t, u, i_c, i_r, _integrate_charge(i_c, h), xs[:, 0].copy(),
                           i_port, load, stimulus, "bridge")


def write_trace_csv(result: TransientResult, path) -> None:
    """Write ``time_s,v_c_volts,i_c_amps,i_r_amps`` rows in scientific notation."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "v_c_volts", "i_c_amps", "i_r_amps"])
        for row in zip(result.time, result.capacitor_voltage,
                       result.capacitor_current, result.resistor_current):
            w.writerow([f"{x:.15e}" for x in row])
