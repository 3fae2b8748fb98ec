"""Estimating temperature and light from simulated traces.

Generates the default labelled benchmark (458 environments, five noisy
repeats each), then trains a random forest and ridge regression on training
sets of different size and reports R^2 on the held-out rows. The forest wins
with plenty of data; ridge holds up better when only a handful of labelled
traces are available.

Run with ``python demos/03_sensing_benchmark.py`` (a minute or two).
"""
import time

from metasense import harness

config = harness.ExperimentConfig(sweep_ntr=(1000, 458, 100, 30, 11), sweep_repeats=3)

start = time.perf_counter()
dataset = harness.generate_dataset(config)
print(f"generated {len(dataset)} traces with {dataset.features.shape[1]} features "
      f"in {time.perf_counter() - start:.1f} s")

start = time.perf_counter()
sweep = harness.run_ntr_sweep(dataset, config)
print(f"trained {len(sweep.rows)} models in {time.perf_counter() - start:.1f} s\n")

print(f"{'regressor':<10}{'N_tr':>6}{'R2 temperature':>16}{'R2 light':>10}")
for regressor, n_tr, r2_t, r2_l in harness.summarize(sweep):
    print(f"{regressor:<10}{n_tr:>6}{r2_t:>16.4f}{r2_l:>10.4f}")
