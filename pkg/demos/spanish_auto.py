"""
Claims in an automobile insurance portfolio
===========================================

The same workflow on a large, sparse table: two claim types per policy,
80994 policies. Most of the mass sits at (0, 0).

Run with ``python demos/spanish_auto.py``.
"""

from polya_aeppli import embedded_dataset, empirical_gdi, expected_frequencies, mle, mom
from polya_aeppli.model_selection import compare, render_estimates

data = embedded_dataset("spanish_auto")
share = data.get((0, 0)) / data.total
print(f"{data.total:.0f} policies, {share:.1%} without any claim")
print(f"empirical GDI: {empirical_gdi(data):.4f}\n")

fits = [mom(data, "mpa"), mle(data, "mpa"), mom(data, "wmpa"), mle(data, "wmpa")]
print(render_estimates(fits))
print()
print(compare(fits[1::2], "spanish_auto").to_text())

# Zero-claim cell: observed against each fitted model
print()
for f in fits[1::2]:
    cell = expected_frequencies(f.params, bounds=(0, 0), m=data.total).total
    print(f"{f.model.value.upper():<5} expected (0,0): {cell:10.2f}   observed: {data.get((0, 0)):.0f}")
