"""
Doctor consultations and prescribed medications
===============================================

Fits both count models to the embedded health-survey table, ranks them
against other bivariate count models, and lays the expected frequencies
next to the observed ones.

Run with ``python demos/australian_health.py``.
"""

from polya_aeppli import embedded_dataset, empirical_gdi, expected_frequencies, mle, mom
from polya_aeppli.model_selection import compare, render_estimates, render_frequency_table

data = embedded_dataset("australian_health")
print(f"{data.total:.0f} respondents, largest counts {data.dims}")

# A GDI above 1 says the pair is overdispersed relative to independent Poissons
print(f"empirical GDI: {empirical_gdi(data):.4f}\n")

# Moment estimates seed the likelihood fits
fits = []
for model in ("mpa", "wmpa"):
    fits.append(mom(data, model))
    fits.append(mle(data, model))
print(render_estimates(fits))

# Likelihood fits next to reported scores of models not implemented here
print()
print(compare([f for f in fits if f.method.value == "mle"], "australian_health").to_text())

# Expected counts on the observed grid (not renormalised, so totals fall short of m)
expected = {
    f.model.value.upper(): expected_frequencies(f.params, bounds=data.dims, m=data.total)
    for f in fits if f.method.value == "mle"
}
print()
print(render_frequency_table(data, expected))
