"""Affine and quasi-affine systems, dual Gramian entries and frame bounds.

Gramian entries are built from two exact per-cell sums in
:mod:`lfwavelet.cells`: the diagonal is the full Calderon sum at
``xi + u(k)`` and an off-diagonal entry is a ``t_s`` value at
``P^m (xi + u(k))``.  :func:`gramian_entry_direct` evaluates the same
numbers by the literal sum over the quasi-affine generating set with
characters evaluated on Laurent elements; tests compare the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cells import CellSet, dilation_sum, integer_cover, member_values, t_sum
from .characters import chi, d_set, index_of, q_valuation, u_of
from .errors import DomainError, ResolutionError
from .field import LaurentElem, laurent_add, laurent_mul, laurent_neg
from .functions import TestFunction, Window, WaveletFamily, dilate, translate, unify_window

AFFINE = "affine"
QUASI_AFFINE = "quasi-affine"


@dataclass(frozen=True)
class SystemIndex:
    """Element ``psi^l_{j,k}`` of the affine or quasi-affine system (``l`` counts from 1)."""

    l: int
    j: int
    k: int
    flavor: str = AFFINE

    def __post_init__(self) -> None:
        if self.flavor not in (AFFINE, QUASI_AFFINE):
            raise DomainError(f"unknown flavor {self.flavor!r}")
        if self.l < 1 or self.k < 0:
            raise DomainError("member index starts at 1 and translations are natural numbers")


def affine_element(fam: WaveletFamily, idx: SystemIndex) -> TestFunction:
    """Point-side ``delta_j tau_{u(k)} psi^l`` (affine) or ``q^{j/2} tau_{u(k)} delta_j psi^l`` (quasi-affine, j < 0)."""
    if idx.l > fam.size:
        raise DomainError(f"member {idx.l} requested from a family of {fam.size}")
    psi = fam.point_side()[idx.l - 1]
    if idx.j < 0 and psi.window.N < -idx.j:
        # dilating by a negative scale needs constancy below the new cell size
        psi = unify_window(psi, Window(psi.window.M, -idx.j))
    if idx.flavor == QUASI_AFFINE and idx.j < 0:
        return translate(dilate(psi, idx.j), idx.k) * float(fam.q) ** (idx.j / 2)
    return dilate(translate(psi, idx.k), idx.j)


def decompose_pair(params, k: int, k2: int) -> tuple[int, int]:
    """(m, s) with q^m exactly dividing k - k2 and u(s) = P^m (u(k2) - u(k))."""
    if k == k2:
        raise DomainError("decompose_pair needs distinct indices")
    if k < 0 or k2 < 0:
        raise DomainError("indices must be natural numbers")
    m = q_valuation(params.q, k - k2)
    diff = laurent_add(u_of(params, k2), laurent_neg(u_of(params, k)))
    s = index_of(laurent_mul(LaurentElem.monomial(params, m, 1), diff))
    if s % params.q == 0:
        raise AssertionError(f"decompose_pair({k}, {k2}) produced s = {s} in qN0")
    return m, s


# --- dual Gramian ----------------------------------------------------------------------


def gramian_entry(fam: WaveletFamily, cells: CellSet, k: int, k2: int) -> np.ndarray:
    """<G(xi) e_k2, e_k> on every cell of ``cells`` (cells of O)."""
    fam.require_certificate()
    if k == k2:
        return dilation_sum(fam, cells.shift(k)).astype(complex)
    m, s = decompose_pair(fam.params, k, k2)
    return t_sum(fam, cells.shift(k).dilate(-m), s)


def _cell_point(cells: CellSet, i: int) -> LaurentElem:
    return cells.point(i)


def gramian_entry_direct(fam: WaveletFamily, cells: CellSet, k: int, k2: int) -> np.ndarray:
    """Literal sum over the quasi-affine generating set.

    ``sum_{phi} phi^(xi + u(k)) conj(phi^(xi + u(k2)))`` with phi running
    over ``q^j psi^l(P^-j x)`` for j < 0 and ``psi^l_{j,d}``, ``d in D_j``
    for j >= 0.  Characters are evaluated on the cell's grid point, so
    this does not use the character-sum kernel's closed form.
    """
    level = fam.require_certificate()
    M = fam.window.M
    params = fam.params
    out = np.zeros(len(cells), dtype=complex)
    a_cells, b_cells = cells.shift(k), cells.shift(k2)
    e = np.minimum(a_cells.abs_exponent(), b_cells.abs_exponent())
    if np.any(a_cells.contains_origin() | b_cells.contains_origin()):
        raise ResolutionError("literal Gramian sum needs cells away from the origin")
    # psi^(P^j eta) can be nonzero only for 1 - level <= e - j <= M
    j_lo, j_hi = int(np.min(e)) - M, int(np.max(np.maximum(a_cells.abs_exponent(), b_cells.abs_exponent()))) - 1 + level
    for j in range(j_lo, j_hi + 1):
        # P^j eta, i.e. the cell dilated by P^(+j)
        va = member_values(fam, a_cells.dilate(-j))
        vb = member_values(fam, b_cells.dilate(-j))
        prod = np.sum(va * np.conj(vb), axis=0)
        if not np.any(prod):
            continue
        if j < 0:
            out += prod
            continue
        scale = LaurentElem.monomial(params, j, 1)
        for i in np.flatnonzero(prod):
            xi = _cell_point(cells, i)
            eta_a = laurent_add(xi, u_of(params, k))
            eta_b = laurent_add(xi, u_of(params, k2))
            acc = 0j
            for d in d_set(params, j):
                shift = laurent_mul(scale, u_of(params, d))
                acc += chi(laurent_mul(eta_a, shift)).conjugate().value * chi(laurent_mul(eta_b, shift)).value
            out[i] += prod[i] * acc / params.q**j
    return out


@dataclass(frozen=True, eq=False)
class GramianSlice:
    """Truncated dual Gramian ``[<G(xi) e_k2, e_k>]_{k, k2 < q^S}`` on one cell of O."""

    cell: dict
    size: int
    entries: np.ndarray
    truncated: bool = True

    def hermitian_residual(self) -> float:
        return float(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def to_dict(self) -> dict:
        return {
            "cell": self.cell,
            "size": self.size,
            "truncated": self.truncated,
            "entries": [[[float(z.real), float(z.imag)] for z in row] for row in self.entries],
        }


def gramian_stack(fam: WaveletFamily, cells: CellSet, S: int) -> np.ndarray:
    """Gramian slices for every cell at once, shape (ncells, q^S, q^S)."""
    n = fam.q**S
    out = np.zeros((len(cells), n, n), dtype=complex)
    for k in range(n):
        out[:, k, k] = gramian_entry(fam, cells, k, k)
        for k2 in range(k + 1, n):
            val = gramian_entry(fam, cells, k, k2)
            # row index k, column k2 holds <G e_k2, e_k>
            out[:, k, k2] = val
            out[:, k2, k] = np.conj(val)
    return out


def gramian_matrix(fam: WaveletFamily, cells: CellSet, S: int = 3, i: int = 0) -> GramianSlice:
    """The Gramian slice on cell ``i`` of ``cells``."""
    one = cells.subset(np.arange(len(cells)) == i)
    return GramianSlice(cells.describe(i), S, gramian_stack(fam, one, S)[0])


@dataclass(frozen=True)
class FrameBounds:
    lower: float
    upper: float
    lower_cell: dict
    upper_cell: dict
    S: int
    periodicity_residual: float
    truncated: bool = True

    def __iter__(self):
        return iter((self.lower, self.upper))


def frame_bounds_estimate(fam: WaveletFamily, S: int = 3, rel: int | None = None) -> FrameBounds:
    """Extreme eigenvalues of the truncated Gramian over an annular cover of O.

    The cover runs one annulus past the depth where the Gramian starts to
    repeat under dilation; ``periodicity_residual`` compares the last two
    annuli cellwise, which must agree for the cover to stand for all of O.
    """
    cells = integer_cover(fam)
    if rel is not None:
        from .cells import annular_cells, stable_depth

        cells = annular_cells(fam.params, rel, 0, stable_depth(fam) + 1)
    stack = gramian_stack(fam, cells, S)
    eig = np.linalg.eigvalsh(stack)
    lo, hi = eig[:, 0], eig[:, -1]
    i_lo, i_hi = int(np.argmin(lo)), int(np.argmax(hi))
    deep = cells.res == cells.res.max()
    prev = cells.res == cells.res.max() - 1
    period = float(np.max(np.abs(stack[deep] - stack[prev]), initial=0.0)) if np.any(prev) else 0.0
    return FrameBounds(float(lo[i_lo]), float(hi[i_hi]), cells.describe(i_lo), cells.describe(i_hi), S, period)


# --- Bessel ratio (Monte Carlo) -----------------------------------------------------------


def system_elements(fam: WaveletFamily, flavor: str, J: int) -> list[tuple[SystemIndex, TestFunction]]:
    """All elements with |j| <= J and k < q^J, point side."""
    out = []
    for l in range(1, fam.size + 1):
        for j in range(-J, J + 1):
            for k in range(fam.q**J):
                idx = SystemIndex(l, j, k, flavor)
                out.append((idx, affine_element(fam, idx)))
    return out


def _block_average(f: TestFunction, window: Window) -> np.ndarray:
    """Average of ``f`` over each cell of ``window`` (requires f.window to contain it)."""
    q = f.q
    region = q ** (window.M + f.window.N)
    vals = np.zeros(region, dtype=complex)
    n = min(region, f.values.size)
    vals[:n] = f.values[:n]
    return vals.reshape(window.size(q), -1).mean(axis=1)


def bessel_ratio_estimate(
    fam: WaveletFamily,
    flavor: str = AFFINE,
    trials: int = 500,
    J: int = 4,
    test_window: Window = Window(1, 2),
    seed: int = 0,
) -> float:
    """Monte Carlo lower estimate of the Bessel bound of the truncated system.

    Draws ``trials`` random unit-norm point-side functions on ``test_window``
    and returns the largest ``sum |<f, eta>|^2`` over elements with
    ``|j| <= J`` and ``k < q^J``.  This is approximate by design: the true
    bound is a supremum over all of L^2 and an infinite index set.
    """
    if trials <= 0:
        raise DomainError("trials must be positive")
    if not np.any(fam.values):
        return 0.0
    elems = system_elements(fam, flavor, J)
    q = fam.q
    # each element is summarized by its cell averages on the test window
    rows = []
    for _, e in elems:
        w = e.window.join(test_window)
        rows.append(_block_average(unify_window(e, w), test_window))
    E = np.array(rows)
    rng = np.random.default_rng(seed)
    F = rng.standard_normal((trials, test_window.size(q))) + 1j * rng.standard_normal((trials, test_window.size(q)))
    measure = test_window.cell_measure(q)
    F /= np.sqrt(np.sum(np.abs(F) ** 2, axis=1, keepdims=True) * measure)[:, :1]
    coeffs = (F @ E.conj().T) * measure
    return float(np.max(np.sum(np.abs(coeffs) ** 2, axis=1)))


# fields exported for the CLI
__all__ = [
    "AFFINE",
    "QUASI_AFFINE",
    "SystemIndex",
    "affine_element",
    "decompose_pair",
    "gramian_entry",
    "gramian_entry_direct",
    "GramianSlice",
    "gramian_stack",
    "gramian_matrix",
    "FrameBounds",
    "frame_bounds_estimate",
    "system_elements",
    "bessel_ratio_estimate",
]
