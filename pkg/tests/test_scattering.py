import csv
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from metasense.circuit import (BridgeLoad, DiodeModel, StimulusSpec, diode_dynamic_resistance, time_constant,
                               transient_solve)
from metasense.errors import DomainError, WindowTooLarge
from metasense.scattering import (FLOOR_DB, MODES, PASSIVITY_TOL_DB, SurfaceConfig, energy_balance,
                                  frequency_response_surrogate, instantaneous_power_waves, reflectance_trace,
                                  steady_state_db, steady_state_reflectance, write_frequency_csv,
                                  write_trace_csv)

DIODE = DiodeModel()
R_D = diode_dynamic_resistance(DIODE)


def solve(c, r_c, duration, step, r_d=R_D, z0=377.0, **stim):
    load = BridgeLoad(c, r_c, r_d, port_impedance=z0)
    return transient_solve(DIODE, load, StimulusSpec("dc_envelope", 1.0, duration, sample_step=step, **stim))


def crossing_time(trace, level):
    """First downward crossing of ``level``, linearly interpolated."""
    k = int(np.argmax(trace.values_db < level))
    assert k > 0 and trace.values_db[k] < level
    t0, t1 = trace.times[k - 1], trace.times[k]
    y0, y1 = trace.values_db[k - 1], trace.values_db[k]
    return t0 + (level - y0) * (t1 - t0) / (y1 - y0)


class TestPowerWaves:
    def test_matched(self):
        _, b = instantaneous_power_waves(50.0 * 0.02, 0.02, 50.0)
        assert b == pytest.approx(0.0, abs=1e-15)

    def test_open(self):
        a, b = instantaneous_power_waves(1.3, 0.0, 50.0)
        assert abs(b) == pytest.approx(abs(a))

    def test_short(self):
        a, b = instantaneous_power_waves(0.0, 0.01, 50.0)
        assert b == pytest.approx(-a)

    @given(st.floats(-10, 10), st.floats(-1, 1), st.floats(1, 1000))
    def test_delivered_power_identity(self, v, i, z0):
        a, b = instantaneous_power_waves(v, i, z0)
        assert a * a - b * b == pytest.approx(v * i, abs=1e-9)

    def test_rejects_bad_impedance(self):
        with pytest.raises(DomainError):
            instantaneous_power_waves(1.0, 1.0, 0.0)


class TestSteadyState:
    def test_matched_is_floored(self):
        assert steady_state_reflectance(377.0, 377.0) == FLOOR_DB

    def test_open_limit(self):
        assert steady_state_reflectance(1e15, 377.0) == pytest.approx(0.0, abs=1e-9)

    def test_closed_form(self):
        r = 1067.8
        assert steady_state_reflectance(r, 377.0) == pytest.approx(20 * math.log10((r - 377) / (r + 377)))

    def test_decreasing_rc_lowers_reflectance(self):
        vals = [steady_state_reflectance(R_D + r, 377.0) for r in (10e3, 5e3, 2e3, 1e3, 500.0)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    @given(st.floats(1.0, 376.0), st.floats(1.0, 376.0))
    def test_monotone_below_match(self, r1, r2):
        if r1 != r2:
            lo, hi = sorted((r1, r2))
            assert steady_state_reflectance(lo, 377.0) >= steady_state_reflectance(hi, 377.0)

    def test_transmit_modes(self):
        load = BridgeLoad(1e-9, 1e3, R_D)
        micro = steady_state_db(load, SurfaceConfig("microstrip_transmit"))
        assert micro == pytest.approx(20 * math.log10(100 / (100 + load.steady_state_resistance)))
        line = steady_state_db(load, SurfaceConfig("line_transmit"))
        assert line == pytest.approx(20 * math.log10(2 / (2 + 9 * 50 / load.steady_state_resistance)))


class TestReflectanceTrace:
    def test_matched_resistive_load_hits_floor(self):
        # A near-lossless bridge charges within picoseconds; afterwards R_C = Z0 absorbs everything.
        res = solve(1e-9, 377.0, 20e-9, 1e-12, r_d=1e-2)
        trace = reflectance_trace(res, SurfaceConfig(averaging_window=2e-9, averaging_step=1e-12))
        after = trace.times > 2e-9
        assert np.all(trace.values_db[after] == FLOOR_DB)

    @pytest.mark.parametrize("r_c", [1e3, 10e3, 330.0])
    def test_steady_state_matches_closed_form(self, r_c):
        res = solve(1e-9, r_c, 10e-6, 1e-9)
        trace = reflectance_trace(res, SurfaceConfig(averaging_step=1e-9))
        oracle = 20 * math.log10(abs(R_D + r_c - 377.0) / (R_D + r_c + 377.0))
        assert trace.values_db[-1] == pytest.approx(oracle, abs=1e-6)

    def test_window_centres_and_spacing(self):
        res = solve(1e-9, 1e3, 2e-6, 1e-9)
        trace = reflectance_trace(res, SurfaceConfig(averaging_step=10e-9))
        assert trace.times[0] == pytest.approx(0.5 * 249e-9)
        np.testing.assert_allclose(np.diff(trace.times), 10e-9)

    def test_coarse_states_use_state_spacing(self):
        res = solve(1e-9, 1e3, 2e-6, 1e-9)
        trace = reflectance_trace(res, SurfaceConfig(averaging_step=100e-12))
        np.testing.assert_allclose(np.diff(trace.times), 1e-9)

    def test_window_too_large(self):
        res = solve(1e-9, 1e3, 100e-9, 1e-9)
        with pytest.raises(WindowTooLarge):
            reflectance_trace(res, SurfaceConfig())

    @pytest.mark.parametrize("mode", MODES)
    @pytest.mark.parametrize("r_c", [100.0, 1e3, 10e3])
    def test_passive(self, mode, r_c):
        z0 = SurfaceConfig(mode).port_impedance
        res = solve(10e-9, r_c, 10e-6, 2e-9, z0=z0)
        trace = reflectance_trace(res, SurfaceConfig(mode, averaging_step=2e-9))
        assert np.all(trace.values_db <= PASSIVITY_TOL_DB)

    def test_energy_balance(self):
        res = solve(1e-9, 1e3, 5e-6, 1e-9)
        budget = energy_balance(res, SurfaceConfig(averaging_step=1e-9))
        lhs = budget["incident"]
        rhs = budget["reflected"] + budget["dissipated"] + budget["stored"]
        assert np.max(np.abs(lhs - rhs) / lhs) < 0.01

    def test_energy_balance_in_steady_state_has_no_storage(self):
        res = solve(1e-9, 1e3, 5e-6, 1e-9)
        budget = energy_balance(res, SurfaceConfig(averaging_step=1e-9))
        assert abs(budget["stored"][-1]) < 1e-9 * budget["incident"][-1]
        assert budget["incident"][-1] == pytest.approx(budget["reflected"][-1] + budget["dissipated"][-1],
                                                       rel=1e-6)


class TestModeContrast:
    @pytest.mark.parametrize("c", [1e-9, 10e-9, 100e-9])
    @pytest.mark.parametrize("r_c", [100.0, 1e3, 10e3])
    def test_microstrip_falls_and_line_rises(self, c, r_c):
        duration = max(20 * time_constant(BridgeLoad(c, r_c, R_D)), 1e-6)
        step = duration / 4000
        traces = {}
        for mode in ("microstrip_transmit", "line_transmit"):
            res = solve(c, r_c, duration, step, z0=50.0)
            traces[mode] = reflectance_trace(res, SurfaceConfig(mode, averaging_window=250e-9,
                                                                averaging_step=step)).values_db
        assert np.all(np.diff(traces["microstrip_transmit"]) <= 1e-9)
        assert np.all(np.diff(traces["line_transmit"]) >= -1e-9)


# First -10 dB crossing in absorber mode with R_C = 1 kOhm and the default 250 ns window.
CROSSING_GOLDEN = {1e-9: 1.6846997e-07, 10e-9: 7.7375116e-07, 100e-9: 7.6069353e-06}


@pytest.fixture(scope="module")
def crossings():
    out = {}
    for c in CROSSING_GOLDEN:
        res = solve(c, 1e3, c * 1e4, c * 1e-1)
        out[c] = crossing_time(reflectance_trace(res, SurfaceConfig(averaging_step=c * 1e-1)), -10.0)
    return out


class TestFigureTwoShifts:
    def test_goldens(self, crossings):
        for c, t in CROSSING_GOLDEN.items():
            assert crossings[c] == pytest.approx(t, rel=1e-6)

    def test_tenfold_capacitance_gives_tenfold_shift(self, crossings):
        assert crossings[100e-9] / crossings[10e-9] == pytest.approx(10.0, rel=0.05)

    def test_hundredfold_shift_with_resolving_window(self):
        # The 250 ns window is longer than the 1 nF transition and compresses the
        # shift; a window short against tau recovers the tau ratio.
        times = []
        for c in (1e-9, 100e-9):
            step = min(c * 1e-1, 0.2e-9)
            res = solve(c, 1e3, c * 1e4, step)
            times.append(crossing_time(reflectance_trace(res, SurfaceConfig(averaging_window=2e-9,
                                                                            averaging_step=step)), -10.0))
        assert times[1] / times[0] == pytest.approx(100.0, rel=0.02)

    def test_lower_rc_lowers_steady_state(self):
        finals = [reflectance_trace(solve(1e-9, r, 10e-6, 1e-9), SurfaceConfig(averaging_step=1e-9)).values_db[-1]
                  for r in (10e3, 1e3)]
        assert finals[1] < finals[0]


class TestSurrogate:
    grid = np.linspace(1e9, 8e9, 7001)

    def test_resonant_frequency(self):
        assert SurfaceConfig().resonant_frequency == pytest.approx(4.84e9, rel=1e-3)
        assert SurfaceConfig().resonant_frequency == pytest.approx(1 / (2 * math.pi * math.sqrt(2.7e-9 * 0.4e-12)))

    @pytest.mark.parametrize("mode", ["absorber_reflect", "line_transmit"])
    def test_short_pulse_minimum_at_resonance(self, mode):
        cfg = SurfaceConfig(mode)
        out = frequency_response_surrogate(cfg, BridgeLoad(1e-9, 10e3, R_D, port_impedance=cfg.port_impedance),
                                           self.grid, "short_pulse")
        f_min = out[np.argmin(out[:, 1]), 0]
        assert f_min == pytest.approx(cfg.resonant_frequency, abs=self.grid[1] - self.grid[0])

    @pytest.mark.parametrize("mode", MODES)
    def test_cw_dip_is_reduced(self, mode):
        cfg = SurfaceConfig(mode)
        load = BridgeLoad(1e-9, 10e3, R_D, port_impedance=cfg.port_impedance)
        f0 = np.array([cfg.resonant_frequency])
        pulse = frequency_response_surrogate(cfg, load, f0, "short_pulse")[0, 1]
        cw = frequency_response_surrogate(cfg, load, f0, "cw")[0, 1]
        if mode == "microstrip_transmit":
            # The gap tank blocks the line at resonance once the bridge opens.
            assert cw < pulse
        else:
            assert cw > pulse

    @pytest.mark.parametrize("mode,z0", [("line_transmit", None), ("absorber_reflect", 50.0)])
    def test_cw_contrast_at_least_10db_near_match(self, mode, z0):
        cfg = SurfaceConfig(mode, port_impedance=z0)
        load = BridgeLoad(1e-9, 10e3, R_D, port_impedance=cfg.port_impedance)
        f0 = np.array([cfg.resonant_frequency])
        pulse = frequency_response_surrogate(cfg, load, f0, "short_pulse")[0, 1]
        cw = frequency_response_surrogate(cfg, load, f0, "cw")[0, 1]
        assert cw - pulse >= 10.0

    def test_rejects_non_positive_frequency(self):
        with pytest.raises(DomainError):
            frequency_response_surrogate(SurfaceConfig(), BridgeLoad(1e-9, 1e3, R_D), [0.0, 1e9])

    def test_rejects_unknown_regime(self):
        with pytest.raises(DomainError):
            frequency_response_surrogate(SurfaceConfig(), BridgeLoad(1e-9, 1e3, R_D), [1e9], "burst")

    def test_passive(self):
        for mode in MODES:
            cfg = SurfaceConfig(mode)
            for regime in ("short_pulse", "cw"):
                out = frequency_response_surrogate(cfg, BridgeLoad(1e-9, 1e3, R_D), self.grid, regime)
                assert np.all(out[:, 1] <= 1e-9)


class TestSurfaceConfig:
    def test_defaults(self):
        assert SurfaceConfig().port_impedance == 377.0
        assert SurfaceConfig("microstrip_transmit").port_impedance == 50.0
        assert SurfaceConfig("line_transmit").quantity == "transmittance"

    def test_window_must_exceed_step(self):
        with pytest.raises(DomainError):
            SurfaceConfig(averaging_window=1e-9, averaging_step=1e-9)

    def test_unknown_mode(self):
        with pytest.raises(DomainError):
            SurfaceConfig("mirror")


def test_csv_exports(tmp_path):
    res = solve(1e-9, 1e3, 1e-6, 1e-9)
    trace = reflectance_trace(res, SurfaceConfig(averaging_step=1e-9))
    write_trace_csv(trace, tmp_path / "t.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["time_s", "reflectance_db"] and len(rows) == len(trace) + 1
    ttrace = reflectance_trace(res, SurfaceConfig("line_transmit", averaging_step=1e-9))
    write_trace_csv(ttrace, tmp_path / "u.csv")
    assert open(tmp_path / "u.csv").readline().strip() == "time_s,transmittance_db"
    out = frequency_response_surrogate(SurfaceConfig(), BridgeLoad(1e-9, 1e3, R_D), [1e9, 2e9])
    write_frequency_csv(out, tmp_path / "f.csv")
    rows = list(csv.reader(open(tmp_path / "f.csv")))
    assert rows[0] == ["freq_hz", "magnitude_db"] and len(rows) == 3
