"""
A tight-frame impostor
======================

psi^ = 1 on the annulus |xi| = q^2 makes the Calderon sum identically 1,
yet the family is not a wavelet: its norm is sqrt(2) and t_1 does not vanish.
"""

import numpy as np

from lfwavelet.cells import dilation_sum
from lfwavelet.checks import calderon_cells, classify, t_function, ts_region
from lfwavelet.families import annulus_control
from lfwavelet.field import FieldParams
from lfwavelet.mra import dimension_map

fam = annulus_control(FieldParams(2))

cells = calderon_cells(fam)
print("Calderon sum on its cover:", np.unique(dilation_sum(fam, cells)))

region = ts_region(fam)
t1 = t_function(fam, 1, region)
for i in np.flatnonzero(np.abs(t1) > 0.5):
    print(f"  t_1 = {t1[i].real:+.3f} at xi = {region.describe(i)['point']}")

report = classify(fam)
print("squared norm:", report.norms[0] ** 2)
print("flags:", report.flags)

# the dimension function counts the overlap: it is 2, not 1
print("dimension function:", np.unique(dimension_map(fam).values))
