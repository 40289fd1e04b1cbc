"""
The benchmark protocol
======================

Repeated runs over reseeded splits, four techniques side by side:
the fast stage alone, the slow stage alone, error-guided routing, and
a random-routing baseline spending the same budget. A second pass
sweeps the histogram resolution while holding the splits fixed.
"""

from cascadekit import ExperimentConfig, SyntheticSpec, run_experiment, sweep_bins

config = ExperimentConfig(
    synthetic=SyntheticSpec(
        counts=(175, 473), dim=4, separation=2.2, ds1_noise=2.0
    ),
    techniques=("ds1", "ds2", "hybrid", "hybrid-rs"),
    repetitions=5,
    base_seed=20,
    fractions=(0.25, 0.25, 0.5),
    fast_C=(0.1, 1.0, 10.0),
    fast_gamma=(0.125, 0.5, 2.0),
    slow_C=(1.0, 10.0, 100.0),
    slow_gamma=(0.125, 0.5, 2.0),
    measure_time=False,
)

report = run_experiment(config)
print(report.render_text())

# every repetition's raw numbers stay in the report; the aggregates can
# always be recomputed from them
recomputed = report.recompute_aggregates()
assert recomputed == report.aggregates
print("aggregates recomputable from raw repetition records")

# does histogram resolution matter? same splits, three bin counts
sweep = sweep_bins(config, bin_values=(10, 20, 30))
print()
print(sweep.render_text())
