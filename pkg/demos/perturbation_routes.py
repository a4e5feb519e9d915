"""
Two routes to the same verdict
==============================

Perturbs the q = 2 Haar wavelet in two ways and classifies each result
along both equivalent routes:

* route A: Calderon sum, t_s vanishing and unit norms
* route B: orthonormality of the system and the norm integral

Unimodular phases on finer cells keep an orthonormal wavelet; amplitude
noise of any size breaks it.  The routes should never disagree.
"""

import numpy as np

from lfwavelet.checks import classify
from lfwavelet.families import haar_family
from lfwavelet.field import FieldParams
from lfwavelet.functions import FREQUENCY, TestFunction, Window, family_from

params = FieldParams(2)
haar = haar_family(params)[1]
rng = np.random.default_rng(7)


def perturb(factor):
    m = haar.members[0]
    fine = np.repeat(m.values, 4) * factor(m.values.size * 4)
    return family_from([TestFunction(params, FREQUENCY, Window(m.window.M, m.window.N + 2), fine)])


rows = []
for _ in range(3):
    rows.append(("phase", perturb(lambda n: np.exp(2j * np.pi * rng.random(n)))))
for level in (1e-3, 1e-2, 1e-1):
    rows.append((f"noise {level:g}", perturb(lambda n: 1 + level * rng.standard_normal(n))))

print(f"{'perturbation':14s} {'route A':8s} {'route B':8s} calderon   orthonormality")
for label, fam in rows:
    rep = classify(fam)
    a, b = rep.routes["calderon_ts_norms"], rep.routes["orthonormality_norm_integral"]
    print(
        f"{label:14s} {str(a):8s} {str(b):8s} {rep.checks['calderon'].max_residual:.2e}   "
        f"{rep.checks['orthonormality'].max_residual:.2e}"
    )
