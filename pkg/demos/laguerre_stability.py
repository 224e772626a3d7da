"""
Evaluating the PMF far into the tail
====================================

Closed-form probabilities are sums of products of generalized Laguerre
polynomials at negative arguments. Those grow past the double range long
before the probabilities themselves underflow, so evaluation runs on a
mantissa/exponent pair and in log space.

Run with ``python demos/laguerre_stability.py``.
"""

import math

from polya_aeppli import MpaParams, WmpaParams, log_pmf
from polya_aeppli.laguerre import laguerre_direct, laguerre_eval
from polya_aeppli.oracle import brute_force_pmf

# Three-term recurrence against the explicit sum where both are finite
for n, a, x in [(5, 1, -2.0), (20, 3, -7.5), (40, 0, -0.01)]:
    print(f"L_{n}^{a}({x}) = {float(laguerre_eval(n, a, x)):.15e}  (direct sum {laguerre_direct(n, a, x):.15e})")

# Beyond the float range the scaled value still carries a finite logarithm
big = laguerre_eval(3000, 3, -3000.0)
print(f"\nlog L_3000^3(-3000) = {big.log():.6f}  (binary exponent {big.exponent})")

# Closed form against direct summation over the latent Poisson counts
print()
for params, cell in [(MpaParams((0.5, 0.7), 0.3, 0.2), (3, 4)),
                     (WmpaParams((0.4, 0.4), 0.2, 0.15), (2, 2))]:
    closed = math.exp(log_pmf(cell, params))
    brute = brute_force_pmf(cell, params)
    print(f"{params.model.value.upper():<5} f{cell} closed {closed:.15e}  brute {brute:.15e}")

# Very large counts: the log-probability stays finite
p = WmpaParams((2.0, 3.0), 1.5, 0.6)
for cell in [(50, 60), (300, 250), (1000, 0)]:
    print(f"log f{cell} = {log_pmf(cell, p):.6f}")
