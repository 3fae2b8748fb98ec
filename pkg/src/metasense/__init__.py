"""Time-domain simulation and estimation for waveform-selective metasurface sensors."""
from .circuit import (BridgeLoad, CircuitState, DiodeModel, StimulusSpec, TransientResult,
                      analytic_capacitor_voltage, diode_current, diode_dynamic_resistance,
                      time_constant, transient_solve)
from .scattering import (SurfaceConfig, TransientTrace, frequency_response_surrogate,
                         instantaneous_power_waves, reflectance_trace, steady_state_reflectance)
from .sensors import (Photocell, SensorEnvironment, ThermoCapacitor, calibrate_photocell,
                      capacitance_at, resistance_at)

__version__ = "0.1.0"
