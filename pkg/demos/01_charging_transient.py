"""Charging of the capacitor inside the diode bridge.

The bridge behaves like a resistor R_d in series with a parallel R_C || C
load, so the capacitor voltage rises exponentially with time constant
tau = C R_C R_d / (R_C + R_d). This script compares the simulated rise with
that closed form and shows how tau depends on C and R_C.

Run with ``python demos/01_charging_transient.py``.
"""
import numpy as np

from metasense import (BridgeLoad, DiodeModel, StimulusSpec, analytic_capacitor_voltage,
                       diode_dynamic_resistance, time_constant, transient_solve)

diode = DiodeModel()
r_d = diode_dynamic_resistance(diode)
print(f"effective bridge resistance R_d = {r_d:.2f} ohm\n")

# A 10 nF / 10 kOhm load, simulated over ten time constants.
load = BridgeLoad(10e-9, 10e3, r_d)
tau = time_constant(load)
result = transient_solve(diode, load, StimulusSpec("dc_envelope", 1.0, 10 * tau))
exact = analytic_capacitor_voltage(load, result.time)
print(f"tau = {tau * 1e9:.1f} ns, max |simulated - exact| = {np.max(np.abs(result.capacitor_voltage - exact)):.1e} V")

print("\n t/tau   v_C (V)   exact (V)")
for k in np.searchsorted(result.time, np.array([0.5, 1, 2, 3, 5]) * tau):
    print(f"{result.time[k] / tau:6.2f}  {result.capacitor_voltage[k]:8.5f}  {exact[k]:9.5f}")

# Once R_C dominates R_d, tau is set by C alone: ten times the capacitance
# means ten times the charging time.
print("\n   C (nF)  R_C (ohm)  tau (ns)")
for c in (1e-9, 10e-9, 100e-9):
    for r_c in (100.0, 1e3, 10e3):
        print(f"{c * 1e9:8.0f}  {r_c:9.0f}  {time_constant(BridgeLoad(c, r_c, r_d)) * 1e9:8.1f}")

# The same load with exponential diodes charges to a lower voltage because
# the junctions drop part of the drive.
shockley = transient_solve(diode, load, StimulusSpec("dc_envelope", 1.0, 10 * tau), diodes="shockley")
print(f"\nfinal v_C: linearized {result.capacitor_voltage[-1]:.4f} V, "
      f"exponential diodes {shockley.capacitor_voltage[-1]:.4f} V")
