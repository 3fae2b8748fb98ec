"""How temperature and light move the reflectance waveform.

Temperature lowers the capacitance, which speeds up the transition from high
to low reflectance. Light lowers the photocell resistance, which pulls the
steady-state reflectance further down. The two effects act on different parts
of the time-domain trace, which is what lets one trace carry both readings.

Run with ``python demos/02_waveform_selective_sensing.py``.
"""
import numpy as np

from metasense import (BridgeLoad, StimulusSpec, SurfaceConfig, DiodeModel, ThermoCapacitor,
                       capacitance_at, diode_dynamic_resistance, frequency_response_surrogate,
                       reflectance_trace, resistance_at, transient_solve)
from metasense.sensors import default_photocell

diode = DiodeModel()
r_d = diode_dynamic_resistance(diode)
cap, cell = ThermoCapacitor(), default_photocell()
surface = SurfaceConfig()
stimulus = StimulusSpec("dc_envelope", 1.0, 10e-6, sample_step=1e-9)
probe_times = np.array([0.3e-6, 1e-6, 3e-6, 9e-6])


def trace_at(temperature, light):
    load = BridgeLoad(capacitance_at(cap, temperature), resistance_at(cell, light), r_d)
    return reflectance_trace(transient_solve(diode, load, stimulus), SurfaceConfig(averaging_step=1e-9))


def row(label, trace):
    values = np.interp(probe_times, trace.times, trace.values_db)
    print(f"{label:<22}" + "".join(f"{v:9.2f}" for v in values))


header = f"{'environment':<22}" + "".join(f"{t * 1e6:7.1f}us" for t in probe_times)
print("reflectance (dB) at selected times\n" + header)
for temperature in (23.5, 45.0, 65.0):
    row(f"T={temperature:4.1f} C, L=328 lux", trace_at(temperature, 328.0))
for light in (3.0, 100.0, 1970.0):
    row(f"T=23.5 C, L={light:6.0f} lux", trace_at(23.5, light))

# In the frequency domain a short pulse is absorbed at resonance while a
# continuous wave at the same frequency is largely reflected.
load = BridgeLoad(1e-9, 10e3, r_d, port_impedance=50.0)
grid = np.linspace(3e9, 7e9, 401)
print(f"\nresonance {surface.resonant_frequency / 1e9:.2f} GHz")
for regime in ("short_pulse", "cw"):
    response = frequency_response_surrogate(SurfaceConfig(port_impedance=50.0), load, grid, regime)
    k = int(np.argmin(response[:, 1]))
    print(f"{regime:<12} minimum {response[k, 1]:7.2f} dB at {response[k, 0] / 1e9:.2f} GHz")
