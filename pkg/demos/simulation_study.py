"""
Small Monte-Carlo study of both estimators
==========================================

Draws repeated samples from a known parameter point, fits each one by
moments and by maximum likelihood, and summarises mean, bias and MSE per
sample size. The default of 50 replications takes well under a minute; pass a
number on the command line for more.

Run with ``python demos/simulation_study.py [replications] [mpa|wmpa]``.
"""

import sys
import time

from polya_aeppli.simstudy import SimConfig, check_against_reference, run_simulation

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 50
model = sys.argv[2] if len(sys.argv) > 2 else "mpa"

config = SimConfig(model=model, true_params=(0.6, 0.6, 0.3, 0.1), replications=reps, base_seed=2024)
start = time.perf_counter()
report = run_simulation(config)
print(f"{reps} replications per size in {time.perf_counter() - start:.1f} s\n")
print(report.to_text())

# Replication r always uses seed base_seed + r, so this table is reproducible
print("success rates (both fits):")
for m in config.sample_sizes:
    print(f"  m = {m:<4} {report.success_rate('both', m):.3f}")

# How far the run sits from published summaries, in Monte-Carlo standard errors
off = [c for c in check_against_reference(report) if not c.ok()]
print(f"\n{len(off)} summary triples outside 3 standard errors of the reported values")
