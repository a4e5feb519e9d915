"""Cell sets in the frequency domain and exact sums over dilations.

A cell is ``P^res u(index) + P^res O``.  Quantities that sum a family over
all scales (the Calderon sum, the dimension function, dual Gramian
entries) are not constant on a cell that contains the origin, so they are
evaluated on *annular* cells: the annulus ``P^a O*`` is split into cells
of resolution ``a + rel``.  Each sum below checks exactness itself (every
sampled value comes from :func:`~lfwavelet.functions.sample`, which refuses
non-constant cells), so a bad resolution raises instead of returning an
approximation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .characters import digit_add, u_of
from .errors import DomainError, ResolutionError
from .field import FieldParams, LaurentElem, laurent_mul, render_laurent
from .functions import WaveletFamily, sample


def q_digit_count(q: int, idx: np.ndarray) -> np.ndarray:
    """Number of q-ary digits of each index (0 for index 0)."""
    idx = np.asarray(idx, dtype=np.int64).copy()
    count = np.zeros(idx.shape, dtype=np.int64)
    while np.any(idx):
        nz = idx > 0
        count[nz] += 1
        idx //= q
    return count


@dataclass(frozen=True, eq=False)
class CellSet:
    params: FieldParams
    res: np.ndarray
    index: np.ndarray

    def __post_init__(self) -> None:
        index = np.atleast_1d(np.asarray(self.index, dtype=np.int64))
        res = np.broadcast_to(np.asarray(self.res, dtype=np.int64), index.shape).copy()
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "res", res)

    def __len__(self) -> int:
        return self.index.size

    @property
    def q(self) -> int:
        return self.params.q

    def measure(self) -> np.ndarray:
        return np.power(float(self.q), -self.res.astype(float))

    def abs_exponent(self) -> np.ndarray:
        """log_q |xi| on each cell, or a very negative sentinel for cells containing 0."""
        e = q_digit_count(self.q, self.index) - self.res
        return np.where(self.index == 0, np.iinfo(np.int64).min // 4, e)

    def contains_origin(self) -> np.ndarray:
        return self.index == 0

    def dilate(self, j: int | np.ndarray) -> "CellSet":
        """Cells multiplied by P^-j."""
        return CellSet(self.params, self.res - j, self.index)

    def shift(self, k: int) -> "CellSet":
        """Cells translated by u(k); requires nonnegative resolution."""
        if k == 0:
            return self
        if np.any(self.res < 0):
            raise DomainError("translation by u(k) needs cells of resolution >= 0")
        offset = np.int64(k) * np.power(np.int64(self.q), self.res)
        return CellSet(self.params, self.res, digit_add(self.params, self.index, offset))

    def subset(self, mask) -> "CellSet":
        return CellSet(self.params, self.res[mask], self.index[mask])

    def point(self, i: int) -> LaurentElem:
        return laurent_mul(LaurentElem.monomial(self.params, int(self.res[i]), 1), u_of(self.params, int(self.index[i])))

    def describe(self, i: int) -> dict:
        return {"res": int(self.res[i]), "index": int(self.index[i]), "point": render_laurent(self.point(i))}


def uniform_cells(params: FieldParams, res: int, radius: int = 0) -> CellSet:
    """All cells of ``P^-radius O`` at resolution ``res``."""
    return CellSet(params, res, np.arange(params.q ** (res + radius), dtype=np.int64))


def annular_cells(params: FieldParams, rel: int, a_lo: int, a_hi: int) -> CellSet:
    """Cells of the annuli ``P^a O*``, a_lo <= a <= a_hi, each at resolution a + rel."""
    if rel < 1:
        raise ResolutionError("annular cells need relative resolution >= 1")
    q = params.q
    ids = np.arange(q ** (rel - 1), q**rel, dtype=np.int64)
    res = np.concatenate([np.full(ids.size, a + rel, dtype=np.int64) for a in range(a_lo, a_hi + 1)])
    index = np.tile(ids, a_hi - a_lo + 1)
    return CellSet(params, res, index)


def native_rel(fam: WaveletFamily) -> int:
    """Relative resolution at which every dilation sum is exact on annular cells."""
    return max(fam.window.N + fam.window.M, 1)


def stable_depth(fam: WaveletFamily) -> int:
    """Annulus depth beyond which every per-cell quantity repeats under dilation.

    On ``P^a O*`` with ``a`` at least this value, terms involving a nonzero
    translate no longer see ``xi`` at the family's resolution, and the
    translate-free terms depend on ``P^-a xi`` only.
    """
    level = fam.require_certificate()
    M, N = fam.window.M, fam.window.N
    return max(0, level, N + M - 1, M + level - 1)


def integer_cover(fam: WaveletFamily, extra: int = 1) -> CellSet:
    """Annular cells of O from the unit annulus down to ``stable_depth + extra``."""
    return annular_cells(fam.params, native_rel(fam), 0, stable_depth(fam) + extra)


# --- exact sums ------------------------------------------------------------------------


def member_values(fam: WaveletFamily, cells: CellSet) -> np.ndarray:
    """psi^l on each cell, shape (L, ncells)."""
    return np.stack([sample(m, cells.index, cells.res) for m in fam.members])


def dilation_sum(fam: WaveletFamily, cells: CellSet, j_min: int | None = None, j_max: int | None = None) -> np.ndarray:
    """sum_l sum_{j_min <= j <= j_max} |psi^l(P^-j xi)|^2 on each cell.

    Only the band of scales where ``P^-j xi`` meets the support annuli of
    the family contributes; the band is finite for cells away from 0.
    """
    level = fam.require_certificate()
    M = fam.window.M
    e = cells.abs_exponent()
    origin = cells.contains_origin()
    out = np.zeros(len(cells))
    if np.any(origin):
        # P^-j of a cell at 0 stays inside the vanishing region while res - j >= level
        if j_max is None or np.any(j_max > cells.res[origin] - level):
            if np.any(fam.values):
                raise ResolutionError("dilation sum over a cell containing the origin is not constant; use annular cells")
    live = ~origin
    if not np.any(live):
        return out
    lo = 1 - level - e[live]
    hi = M - e[live]
    if j_min is not None:
        lo = np.maximum(lo, j_min)
    if j_max is not None:
        hi = np.minimum(hi, j_max)
    if hi.size == 0 or np.max(hi) < np.min(lo):
        return out
    sub = cells.subset(live)
    acc = np.zeros(int(live.sum()))
    for j in range(int(np.min(lo)), int(np.max(hi)) + 1):
        band = (lo <= j) & (j <= hi)
        if not np.any(band):
            continue
        vals = member_values(fam, sub.subset(band).dilate(j))
        acc[band] += np.sum(np.abs(vals) ** 2, axis=0)
    out[live] = acc
    return out


def t_sum(fam: WaveletFamily, cells: CellSet, s: int) -> np.ndarray:
    """t_s(xi) = sum_l sum_{j >= 0} psi^l(P^-j xi) conj(psi^l(P^-j (xi + u(s)))).

    For s >= 1 both factors can be nonzero only when j <= M - 1, since
    |P^-j u(s)| >= q^(j+1) must not exceed the support radius q^M.
    """
    fam.require_certificate()
    if s <= 0:
        raise DomainError("t_s needs s >= 1")
    moved = cells.shift(s)
    out = np.zeros(len(cells), dtype=complex)
    for j in range(0, fam.window.M):
        a = member_values(fam, cells.dilate(j))
        b = member_values(fam, moved.dilate(j))
        out += np.sum(a * np.conj(b), axis=0)
    return out


def translate_count(fam: WaveletFamily, j_min: int = 1) -> int:
    """Number of translates k with possibly nonzero psi(P^-j (xi + u(k))), xi in O, j >= j_min."""
    return fam.q ** max(fam.window.M - j_min, 0)

