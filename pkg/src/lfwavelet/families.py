"""Built-in wavelet families: the Haar MRA and the annulus control."""

from __future__ import annotations

import numpy as np

from .characters import chi, u_of
from .field import FieldParams, LaurentElem, laurent_mul
from .functions import FREQUENCY, POINT, TestFunction, Window, WaveletFamily, family_from


def haar_wavelets(params: FieldParams) -> list[TestFunction]:
    """Point-side psi^l = sum_k conj(chi(P u(l) u(k))) 1_{P u(k) + P}, l = 1..q-1, on window (0, 1).

    Cell k of window (0, 1) is exactly ``P u(k) + P``.
    """
    q = params.q
    prime = LaurentElem.monomial(params, 1, 1)
    members = []
    for l in range(1, q):
        pl = laurent_mul(prime, u_of(params, l))
        vals = np.array([chi(laurent_mul(pl, u_of(params, k))).conjugate().value for k in range(q)])
        members.append(TestFunction(params, POINT, Window(0, 1), vals))
    return members


def haar_family(params: FieldParams) -> tuple[TestFunction, WaveletFamily]:
    """Point-side phi = 1_O and the Haar wavelet family (stored on the frequency side)."""
    phi = TestFunction(params, POINT, Window(0, 0), np.ones(1))
    return phi, family_from(haar_wavelets(params), kind="haar")


def annulus_control(params: FieldParams) -> WaveletFamily:
    """Single wavelet with psi^ = 1 on |xi| = q^2: satisfies the Calderon sum but not t_s vanishing."""
    q = params.q
    vals = np.zeros(q**2, dtype=complex)
    # on window (2, 0) the cells with |xi| = q^2 are those with two q-digits
    vals[q:] = 1.0
    psi_hat = TestFunction(params, FREQUENCY, Window(2, 0), vals)
    return family_from([psi_hat], kind="annulus", tight=False)
