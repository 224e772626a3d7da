"""
Dispersion of the two models as one parameter moves
===================================================

Tabulates the model GDI of both families while one parameter sweeps its
range and the rest stay fixed. The CSV printed at the end is what
``polya-aeppli gdi --surface`` emits, ready for any plotting tool.

Run with ``python demos/gdi_surface.py``.
"""

import numpy as np

from polya_aeppli import MpaParams, WmpaParams, gdi_mpa, moments

base = (0.5, 0.5, 0.5, 0.5)
for name, index in [("rho", 3), ("lambda3", 2)]:
    print(f"{name:>8} {'MPA':>8} {'WMPA':>8}")
    for v in np.linspace(0.05, 0.95, 10):
        vec = list(base)
        vec[index] = v
        g_mpa = gdi_mpa(MpaParams.from_vector(vec))
        g_wmpa = moments(WmpaParams.from_vector(vec)).gdi
        print(f"{v:8.2f} {g_mpa:8.4f} {g_wmpa:8.4f}")
    print()

# The weighted family is the more dispersed one across the whole sweep
grid = np.linspace(0.05, 0.95, 19)
gap = [moments(WmpaParams((0.5, 0.5), 0.5, r)).gdi - gdi_mpa(MpaParams((0.5, 0.5), 0.5, r)) for r in grid]
print(f"smallest WMPA - MPA gap over rho: {min(gap):.4f}")
