"""Command-line driver.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .circuit import BridgeLoad, DiodeModel, transient_solve, write_trace_csv as write_state_csv
from .errors import (CalibrationFailure, ConfigError, DegenerateTruth, NonConvergence, SingularSystem,
                     WindowTooLarge)
from .inference import (TARGETS, determination_coefficient, load_model, read_dataset_csv, save_model,
                        write_dataset_csv)
from .scattering import (MODES, frequency_response_surrogate, reflectance_trace, write_frequency_csv,
                         write_trace_csv)
from .sensors import capacitance_at, resistance_at

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _config_help() -> str:
    lines = ["configuration keys (key = value, one per line) and defaults:"]
    for key, default in harness.config_keys():
        if isinstance(default, tuple):
            default = ", ".join(map(str, default))
        lines.append(f"  {key} = {default}")
    return "\n".join(lines)


def _global_flags(default) -> argparse.ArgumentParser:
    g = argparse.ArgumentParser(add_help=False, argument_default=default)
    g.add_argument("--config", help="key/value configuration file")
    g.add_argument("--seed", type=int, help="master seed (overrides config)")
    g.add_argument("--out", help="output directory (overrides output.dir)")
    g.add_argument("--mode", choices=MODES, help="surface mode (overrides surface.mode)")
    return g


def build_parser() -> argparse.ArgumentParser:
    # Global flags are accepted before or after the subcommand; the subcommand
    # copy suppresses its defaults so it never clobbers values parsed earlier.
    common = _global_flags(argparse.SUPPRESS)
    p = argparse.ArgumentParser(prog="metasense", parents=[_global_flags(None)],
                                description="Waveform-selective metasurface sensing benchmark.",
                                epilog=_config_help(), formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", parents=[common], help="simulate one trace")
    s.add_argument("--temperature", type=float, default=23.5)
    s.add_argument("--light", type=float, default=328.0)
    s.add_argument("--capacitance", type=float, help="override C (F)")
    s.add_argument("--resistance", type=float, help="override R_C (ohm)")

    f = sub.add_parser("freq-sweep", parents=[common], help="lumped frequency response")
    f.add_argument("--capacitance", type=float, default=1e-9)
    f.add_argument("--resistance", type=float, default=10e3)
    f.add_argument("--f-min", type=float, default=1e9)
    f.add_argument("--f-max", type=float, default=8e9)
    f.add_argument("--points", type=int, default=701)

    sub.add_parser("gen-dataset", parents=[common], help="generate the labelled dataset CSV")

    t = sub.add_parser("train", parents=[common], help="train one regressor on a dataset CSV")
    t.add_argument("--dataset", required=True)
    t.add_argument("--target", choices=TARGETS, required=True)
    t.add_argument("--regressor", choices=harness.REGRESSORS, default="forest")
    t.add_argument("--model", help="output model path (default <out>/model_<regressor>_<target>.json)")

    e = sub.add_parser("eval", parents=[common], help="evaluate a saved model on a dataset CSV")
    e.add_argument("--model", required=True)
    e.add_argument("--dataset", required=True)

    w = sub.add_parser("sweep-ntr", parents=[common], help="R^2 versus training-set size")
    w.add_argument("--dataset", help="dataset CSV (generated from the config when omitted)")

    r = sub.add_parser("report", parents=[common], help="summarize an existing sweep.csv")
    r.add_argument("--sweep", help="sweep CSV (default <out>/sweep.csv)")
    return p


def _config(args) -> harness.ExperimentConfig:
    return harness.load_config(args.config, seed=args.seed, surface_mode=args.mode, output_dir=args.out)


def _outdir(cfg) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args, cfg):
    out = _outdir(cfg)
    cap, cell = cfg.thermo_capacitor(), cfg.photocell()
    c = args.capacitance or capacitance_at(cap, args.temperature)
    r = args.resistance or resistance_at(cell, args.light)
    surface = cfg.surface()
    load = BridgeLoad(c, r, cfg.diode_resistance(), cfg.circuit_amplitude, surface.port_impedance)
    result = transient_solve(DiodeModel(), load, cfg.stimulus())
    trace = reflectance_trace(result, surface)
    write_state_csv(result, out / "states.csv")
    write_trace_csv(trace, out / "trace.csv")
    print(f"C={c:.4e} F  R_C={r:.4e} ohm  final {trace.quantity} {trace.values_db[-1]:.3f} dB")


def cmd_freq_sweep(args, cfg):
    out = _outdir(cfg)
    surface = cfg.surface()
    load = BridgeLoad(args.capacitance, args.resistance, cfg.diode_resistance(), port_impedance=surface.port_impedance)
    grid = np.linspace(args.f_min, args.f_max, args.points)
    for regime in ("short_pulse", "cw"):
        write_frequency_csv(frequency_response_surrogate(surface, load, grid, regime), out / f"freq_{regime}.csv")
    print(f"resonance {surface.resonant_frequency / 1e9:.4f} GHz")


def cmd_gen_dataset(args, cfg):
    out = _outdir(cfg)
    ds = harness.generate_dataset(cfg)
    write_dataset_csv(ds, out / "dataset.csv")
    print(f"{len(ds)} rows -> {out / 'dataset.csv'}")


def cmd_train(args, cfg):
    ds = read_dataset_csv(args.dataset)
    model = harness.fit_regressor(args.regressor, ds.features, ds.target(args.target), cfg, cfg.seed, args.target)
    path = Path(args.model) if args.model else _outdir(cfg) / f"model_{args.regressor}_{args.target}.json"
    save_model(model, path)
    print(f"model -> {path}")


def cmd_eval(args, cfg):
    model = load_model(args.model)
    ds = read_dataset_csv(args.dataset)
    est = model.predict(ds.features)
    r2 = determination_coefficient(ds.target(model.target), est)
    out = _outdir(cfg)
    with open(out / "predictions.csv", "w") as fh:
        fh.write("trace_id,actual,estimated\n")
        for tid, a, b in zip(ds.trace_ids, ds.target(model.target), est):
            fh.write(f"{tid},{a!r},{float(b)!r}\n")
    print(f"R^2({model.target}) = {r2:.4f}")


def cmd_sweep_ntr(args, cfg):
    ds = read_dataset_csv(args.dataset) if args.dataset else harness.generate_dataset(cfg)
    sweep = harness.run_ntr_sweep(ds, cfg)
    harness.emit_reports(sweep, cfg.output_dir)
    _print_summary(sweep)


def cmd_report(args, cfg):
    path = Path(args.sweep) if args.sweep else Path(cfg.output_dir) / "sweep.csv"
    sweep = harness.read_sweep_csv(path)
    _print_summary(sweep)


def _print_summary(sweep):
    print(f"{'regressor':<10}{'N_tr':>6}{'R2_temp':>10}{'R2_light':>10}")
    for reg, n_tr, rt, rl in harness.summarize(sweep):
        print(f"{reg:<10}{n_tr:>6}{rt:>10.4f}{rl:>10.4f}")


COMMANDS = {
    "simulate": cmd_simulate, "freq-sweep": cmd_freq_sweep, "gen-dataset": cmd_gen_dataset,
    "train": cmd_train, "eval": cmd_eval, "sweep-ntr": cmd_sweep_ntr, "report": cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        COMMANDS[args.command](args, cfg)
    except (NonConvergence, SingularSystem, CalibrationFailure, WindowTooLarge, DegenerateTruth,
            ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
