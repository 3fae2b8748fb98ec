"""Synthetic benchmark: labelled trace datasets, N_tr sweeps and reports."""
from __future__ import annotations

import configparser
import csv
import dataclasses
import io
import os
import typing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .circuit import BridgeLoad, DiodeModel, StimulusSpec, diode_dynamic_resistance, transient_solve
from .errors import ConfigError, MetasenseError, SizeMismatch
from .inference import (TARGETS, Dataset, ForestParams, SplitSpec, determination_coefficient,
                        extract_features, random_split, train_forest, train_ridge)
from .scattering import MODES, SurfaceConfig, reflectance_trace, write_trace_csv
from .sensors import (LIGHT_RANGE, TEMPERATURE_RANGE, CircuitContext, Photocell, ThermoCapacitor,
                      capacitance_at, default_photocell, resistance_at)

# N_te column of the random-forest sweep tables; N_tr = size - N_te
REFERENCE_TEST_SIZES = (115, 229, 344, 458, 573, 687, 802, 916, 1031, 1145, 1260, 1374, 1489,
                    1603, 1718, 1832, 1947, 2061, 2176, 2268, 2279, 2281, 2284, 2286, 2288)
DEFAULT_SIZE = 2290
DEFAULT_TRAIN_SIZES = tuple(DEFAULT_SIZE - n for n in REFERENCE_TEST_SIZES)
REGRESSORS = ("forest", "ridge")


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment configuration; ``a_b`` fields map to dotted keys ``a.b``."""

    seed: int = 0
    dataset_size: int = DEFAULT_SIZE
    grid_points: int = 458
    grid_repeats: int = 5
    grid_t_min: float = 23.5
    grid_t_max: float = 65.0
    grid_l_min: float = 3.0
    grid_l_max: float = 1970.0
    noise_sigma_db: float = 0.5
    sensor_c_ref: float = 10e-9
    sensor_t_ref: float = 23.5
    sensor_slope: float = 0.5 / (65.0 - 23.5)
    sensor_c_min: float = 0.1e-9
    photocell_r_ref: float | None = None  # None -> calibrate on the measured anchors
    photocell_l_ref: float = 3.0
    photocell_gamma: float | None = None
    circuit_on_current: float = 1e-3
    circuit_amplitude: float = 1.0
    stimulus_mode: str = "dc_envelope"
    stimulus_duration: float = 10e-6
    stimulus_step: float = 1e-9
    stimulus_frequency: float = 3.9e9
    surface_mode: str = "absorber_reflect"
    surface_port_impedance: float | None = None
    surface_window: float = 250e-9
    surface_step: float | None = None  # None -> stimulus.step
    sweep_ntr: tuple = DEFAULT_TRAIN_SIZES
    sweep_regressors: tuple = REGRESSORS
    sweep_repeats: int = 1
    forest_n_trees: int = 100
    forest_max_features: int = 14
    forest_min_leaf: int = 1
    forest_bootstrap: bool = True
    ridge_alpha: float = 1.0
    output_dir: str = "out"
    workers: int = 1

    def __post_init__(self):
        if self.grid_points * self.grid_repeats != self.dataset_size:
            raise ConfigError(f"grid.points x grid.repeats = {self.grid_points * self.grid_repeats}"
                              f" != dataset.size {self.dataset_size}")
        lo, hi = TEMPERATURE_RANGE
        if not lo <= self.grid_t_min <= self.grid_t_max <= hi:
            raise ConfigError(f"temperature grid must lie in [{lo}, {hi}]")
        lo, hi = LIGHT_RANGE
        if not lo <= self.grid_l_min <= self.grid_l_max <= hi:
            raise ConfigError(f"light grid must lie in [{lo}, {hi}]")
        if self.surface_mode not in MODES:
            raise ConfigError(f"surface.mode must be one of {MODES}")
        if self.stimulus_mode not in ("dc_envelope", "rf_sine"):
            raise ConfigError("stimulus.mode must be dc_envelope or rf_sine")
        if self.noise_sigma_db < 0:
            raise ConfigError("noise.sigma_db must be >= 0")
        if any(r not in REGRESSORS for r in self.sweep_regressors) or not self.sweep_regressors:
            raise ConfigError(f"sweep.regressors must be drawn from {REGRESSORS}")
        if self.sweep_repeats < 1 or self.workers < 1:
            raise ConfigError("sweep.repeats and workers must be >= 1")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    # sensor / circuit objects -------------------------------------------------

    def thermo_capacitor(self) -> ThermoCapacitor:
        return ThermoCapacitor(self.sensor_c_ref, self.sensor_t_ref, self.sensor_slope, self.sensor_c_min)

    def photocell(self) -> Photocell:
        if self.photocell_r_ref is None:
            return default_photocell(CircuitContext(self.diode_resistance()))
        return Photocell(self.photocell_r_ref, self.photocell_l_ref,
                         0.7 if self.photocell_gamma is None else self.photocell_gamma)

    def diode_resistance(self) -> float:
        return diode_dynamic_resistance(DiodeModel(), self.circuit_on_current)

    def surface(self) -> SurfaceConfig:
        return SurfaceConfig(mode=self.surface_mode, port_impedance=self.surface_port_impedance,
                             averaging_window=self.surface_window,
                             averaging_step=self.surface_step or self.stimulus_step)

    def stimulus(self) -> StimulusSpec:
        return StimulusSpec(self.stimulus_mode, self.circuit_amplitude, self.stimulus_duration,
                            None, self.stimulus_step, self.stimulus_frequency)

    def forest_params(self) -> ForestParams:
        return ForestParams(self.forest_n_trees, self.forest_max_features, self.forest_min_leaf,
                            self.forest_bootstrap)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}
_HINTS = typing.get_type_hints(ExperimentConfig)


def config_keys() -> list[tuple[str, object]]:
    """Dotted keys with their defaults, in declaration order."""
    out = []
    for f in dataclasses.fields(ExperimentConfig):
        out.append((_dotted(f.name), f.default))
    return out


def _dotted(name: str) -> str:
    if name in ("seed", "workers"):
        return name
    head, _, tail = name.partition("_")
    if head == "output":
        return "output.dir"
    return f"{head}.{tail}"


_BY_DOTTED = {_dotted(n): n for n in _FIELDS}


def _coerce(name: str, raw: str):
    hint = _HINTS[name]
    default = _FIELDS[name].default
    raw = raw.strip()
    if raw.lower() in ("none", "") and default is None:
        return None
    try:
        if isinstance(default, bool):
            if raw.lower() in ("true", "yes", "1", "on"):
                return True
            if raw.lower() in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if isinstance(default, tuple):
            items = [x.strip() for x in raw.strip("[]()").split(",") if x.strip()]
            if default and isinstance(default[0], int):
                return tuple(int(x) for x in items)
            return tuple(items)
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float) or "float" in str(hint):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {_dotted(name)}: {raw!r}") from exc


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Parse ``key = value`` lines with dotted keys (``#`` comments allowed)."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    values = {}
    for key, raw in parser["experiment"].items():
        if key not in _BY_DOTTED:
            raise ConfigError(f"unknown config key {key!r}")
        name = _BY_DOTTED[key]
        values[name] = _coerce(name, raw)
    values.update({k: v for k, v in overrides.items() if v is not None})
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None, **overrides) -> ExperimentConfig:
    text = ""
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, **overrides)


def format_config(config: ExperimentConfig) -> str:
    lines = []
    for name in _FIELDS:
        value = getattr(config, name)
        if isinstance(value, tuple):
            value = ", ".join(str(v) for v in value)
        lines.append(f"{_dotted(name)} = {value}")
    return "\n".join(lines) + "\n"


# dataset generation -----------------------------------------------------------

def grid_points(config: ExperimentConfig) -> np.ndarray:
    """Latin-hypercube pairing of uniform temperatures and log-uniform light levels.

    Both marginals hit their configured extremes exactly.
    """
    n = config.grid_points
    temps = np.linspace(config.grid_t_min, config.grid_t_max, n)
    lux = np.geomspace(config.grid_l_min, config.grid_l_max, n)
    rng = np.random.default_rng([config.seed, 0])
    return np.column_stack([temps, lux[rng.permutation(n)]])


def simulate_point(config: ExperimentConfig, temperature: float, light: float,
                   cap: ThermoCapacitor | None = None, cell: Photocell | None = None):
    """Noise-free trace for one environment."""
    cap = cap or config.thermo_capacitor()
    cell = cell or config.photocell()
    surface = config.surface()
    load = BridgeLoad(capacitance_at(cap, temperature), resistance_at(cell, light),
                      config.diode_resistance(), config.circuit_amplitude, surface.port_impedance)
    result = transient_solve(DiodeModel(), load, config.stimulus())
    return reflectance_trace(result, surface)


def _point_task(args):
    config, k, temperature, light, cap, cell = args
    try:
        trace = simulate_point(config, temperature, light, cap, cell)
    except MetasenseError as exc:
        raise type(exc)(f"grid point {k} (T={temperature:.3f} C, L={light:.3f} lux): {exc}") from exc
    rows = []
    for r in range(config.grid_repeats):
        rng = np.random.default_rng([config.seed, 1, k, r])
        noisy = trace.values_db + config.noise_sigma_db * rng.standard_normal(len(trace))
        fv = extract_features(dataclasses.replace(trace, values_db=noisy), trace_id=f"p{k:04d}r{r}")
        rows.append((fv.trace_id, fv.values))
    return trace, rows


def generate_dataset(config: ExperimentConfig, trace_dir=None) -> Dataset:
    """Simulate every grid point once, then add seeded noise per repeat.

    Results do not depend on ``config.workers``. When ``trace_dir`` is given,
    the noise-free trace of each grid point is written there as CSV.
    """
    grid = grid_points(config)
    cap, cell = config.thermo_capacitor(), config.photocell()
    tasks = [(config, k, float(T), float(L), cap, cell) for k, (T, L) in enumerate(grid)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_point_task, tasks, chunksize=8))
    else:
        results = [_point_task(t) for t in tasks]
    ids, feats, temps, lux = [], [], [], []
    for (trace, rows), (T, L) in zip(results, grid):
        for tid, values in rows:
            ids.append(tid)
            feats.append(values)
            temps.append(T)
            lux.append(L)
    if trace_dir is not None:
        os.makedirs(trace_dir, exist_ok=True)
        for k, (trace, _) in enumerate(results):
            write_trace_csv(trace, Path(trace_dir) / f"p{k:04d}.csv")
    return Dataset(tuple(ids), np.array(feats), np.array(temps), np.array(lux))


# N_tr sweep -------------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    n_te: int
    n_tr: int
    r2_temperature: float
    r2_light: float
    regressor: str
    seed: int


@dataclass
class SweepResult:
    rows: list = field(default_factory=list)
    # (regressor, target, n_tr) -> (actual, estimated) for the first repeat of each entry
    scatter: dict = field(default_factory=dict)

    def mean_r2(self, regressor: str, n_tr: int, target: str) -> float:
        vals = [getattr(r, f"r2_{target}") for r in self.rows if r.regressor == regressor and r.n_tr == n_tr]
        return float(np.mean(vals))


def split_seed(master: int, entry: int, repeat: int) -> int:
    return int(np.random.SeedSequence([master, 2, entry, repeat]).generate_state(1)[0])


def fit_regressor(kind: str, X, y, config: ExperimentConfig, seed: int, target: str = ""):
    if kind == "forest":
        return train_forest(X, y, config.forest_params(), seed, target)
    return train_ridge(X, y, config.ridge_alpha, target)


def run_ntr_sweep(dataset: Dataset, config: ExperimentConfig) -> SweepResult:
    """Random split, per-target training and test R^2 for every N_tr entry.

    Each (entry, repeat) uses one split shared by all regressors; duplicate
    N_tr entries therefore get distinct seeds.
    """
    n = len(dataset)
    for n_tr in config.sweep_ntr:
        if not 1 <= n_tr < n:
            raise SizeMismatch(f"N_tr={n_tr} must lie in [1, {n - 1}]")
    result = SweepResult()
    for e, n_tr in enumerate(config.sweep_ntr):
        for r in range(config.sweep_repeats):
            seed = split_seed(config.seed, e, r)
            train, test = random_split(dataset, SplitSpec.for_dataset(dataset, n_tr, seed))
            for kind in config.sweep_regressors:
                r2 = {}
                for target in TARGETS:
                    model = fit_regressor(kind, train.features, train.target(target), config, seed, target)
                    est = model.predict(test.features)
                    r2[target] = determination_coefficient(test.target(target), est)
                    key = (kind, target, n_tr)
                    if key not in result.scatter:
                        result.scatter[key] = (test.target(target).copy(), est)
                result.rows.append(SweepRow(len(test), n_tr, r2["temperature"], r2["light"], kind, seed))
    return result


# reports ----------------------------------------------------------------------

SWEEP_HEADER = ("n_te", "n_tr", "r2_temperature", "r2_light", "regressor", "seed")

PLOT_SCRIPT = '''\
"""Plot the N_tr sweep and estimated-vs-actual scatter files in this directory."""
import csv
import glob
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


rows = read(os.path.join(HERE, "sweep.csv"))
fig, axes = plt.subplots(1, 2, figsize=(9, 3.5), sharey=True)
for ax, target in zip(axes, ("temperature", "light")):
    for reg in sorted({r["regressor"] for r in rows}):
        pts = sorted((int(r["n_tr"]), float(r["r2_" + target])) for r in rows if r["regressor"] == reg)
        ax.semilogx([p[0] for p in pts], [p[1] for p in pts], "o-", label=reg)
    ax.set_xlabel("N_tr")
    ax.set_title(target)
axes[0].set_ylabel("R^2")
axes[0].legend()
fig.tight_layout()
fig.savefig(os.path.join(HERE, "sweep.png"), dpi=150)

for path in sorted(glob.glob(os.path.join(HERE, "scatter_*.csv"))):
    pts = read(path)
    fig, ax = plt.subplots(figsize=(3.5, 3.5))
    ax.plot([float(p["actual"]) for p in pts], [float(p["estimated"]) for p in pts], ".", ms=2)
    lo = min(float(p["actual"]) for p in pts)
    hi = max(float(p["actual"]) for p in pts)
    ax.plot([lo, hi], [lo, hi], "k--", lw=0.8)
    ax.set_xlabel("actual")
    ax.set_ylabel("estimated")
    ax.set_title(os.path.basename(path)[:-4])
    fig.tight_layout()
    fig.savefig(path[:-4] + ".png", dpi=150)
'''


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def sweep_csv_text(sweep: SweepResult) -> str:
    return _csv_text(SWEEP_HEADER, [(r.n_te, r.n_tr, repr(r.r2_temperature), repr(r.r2_light),
                                     r.regressor, r.seed) for r in sweep.rows])


def emit_reports(sweep: SweepResult, outdir, regressor: str | None = None) -> list[Path]:
    """Write ``sweep.csv``, ``scatter_<target>_<ntr>.csv`` and ``plot_results.py``.

    Scatter files come from ``regressor`` (default: the first regressor in the
    sweep). Every file body is rendered before anything is written, so a
    failure leaves no partial output.
    """
    if not sweep.rows:
        raise SizeMismatch("empty sweep; nothing to report")
    regressor = regressor or sweep.rows[0].regressor
    files = {"sweep.csv": sweep_csv_text(sweep)}
    for (kind, target, n_tr), (actual, est) in sorted(sweep.scatter.items()):
        if kind != regressor:
            continue
        files[f"scatter_{target}_{n_tr}.csv"] = _csv_text(
            ("actual", "estimated"), [(repr(float(a)), repr(float(e))) for a, e in zip(actual, est)])
    files["plot_results.py"] = PLOT_SCRIPT
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, body in files.items():
        (out / name).write_text(body)
        written.append(out / name)
    return written


def read_sweep_csv(path) -> SweepResult:
    with open(path, newline="") as fh:
        rows = [SweepRow(int(r["n_te"]), int(r["n_tr"]), float(r["r2_temperature"]), float(r["r2_light"]),
                         r["regressor"], int(r["seed"])) for r in csv.DictReader(fh)]
    return SweepResult(rows)


def summarize(sweep: SweepResult) -> list[tuple]:
    """Mean R^2 per (regressor, N_tr) across repeats, sorted by regressor then N_tr."""
    keys = sorted({(r.regressor, r.n_tr) for r in sweep.rows})
    return [(reg, n_tr, sweep.mean_r2(reg, n_tr, "temperature"), sweep.mean_r2(reg, n_tr, "light"))
            for reg, n_tr in keys]
