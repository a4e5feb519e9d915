"""Locally constant, compactly supported functions on K and their Fourier transform.

A function on window ``(M, N)`` is supported in ``P^-M O`` and constant on
cosets of ``P^N O``.  Its ``q^(M+N)`` amplitudes are indexed by the grid
points ``x(n) = P^N u(n)``.  In this enumeration the q-ary digit ``i`` of
``n`` is the coefficient of ``P^(N-1-i)``, which makes the basic
operations pure index manipulations:

* multiplying a point by ``P^-j`` keeps its index and lowers its
  resolution exponent by ``j``;
* adding ``u(k)`` to a point at resolution ``R >= 0`` adds ``k q^R`` to its
  index digitwise (carry-free, see :func:`~lfwavelet.characters.digit_add`).

The class is closed under the transform: a window ``(M, N)`` function has
a window ``(N, M)`` transform, computed exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .characters import digit_sub, pairing_table, u_of
from .errors import CertificateError, DomainError, ParameterError, ResolutionError
from .field import FieldParams, LaurentElem, laurent_mul

POINT = "point"
FREQUENCY = "frequency"
_SIDES = (POINT, FREQUENCY)

# Largest index magnitude kept in int64 arithmetic.
_INDEX_LIMIT = 2**62


@dataclass(frozen=True)
class Window:
    """Support radius exponent ``M`` and constancy exponent ``N``."""

    M: int
    N: int

    def __post_init__(self) -> None:
        if self.M < 0 or self.N < 0:
            raise ResolutionError(f"window exponents must be >= 0, got ({self.M}, {self.N})")
        object.__setattr__(self, "M", int(self.M))
        object.__setattr__(self, "N", int(self.N))

    def size(self, q: int) -> int:
        return q ** (self.M + self.N)

    def cell_measure(self, q: int) -> float:
        return float(q) ** (-self.N)

    def swap(self) -> "Window":
        return Window(self.N, self.M)

    def contains(self, other: "Window") -> bool:
        return self.M >= other.M and self.N >= other.N

    def join(self, other: "Window") -> "Window":
        return Window(max(self.M, other.M), max(self.N, other.N))


@dataclass(frozen=True, eq=False)
class TestFunction:
    """``f = sum_n values[n] * 1_{x(n) + P^N O}`` on one side of the transform."""

    __test__ = False  # keep pytest from collecting this class

    params: FieldParams
    side: str
    window: Window
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.side not in _SIDES:
            raise DomainError(f"side must be one of {_SIDES}, got {self.side!r}")
        vals = np.array(self.values, dtype=np.complex128).reshape(-1)
        if vals.size != self.window.size(self.params.q):
            raise ResolutionError(
                f"window {self.window} needs {self.window.size(self.params.q)} values, got {vals.size}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    # -- constructors -----------------------------------------------------------

    @classmethod
    def zeros(cls, params: FieldParams, window: Window, side: str = POINT) -> "TestFunction":
        return cls(params, side, window, np.zeros(window.size(params.q), dtype=complex))

    @classmethod
    def ideal_indicator(cls, params: FieldParams, k: int, side: str = POINT, scale: complex = 1.0) -> "TestFunction":
        """``scale * 1_{P^k O}`` on the smallest window holding it."""
        window = Window(max(-k, 0), max(k, 0))
        vals = np.zeros(window.size(params.q), dtype=complex)
        # cells inside P^k O are those with index < q^(N - k)
        vals[: params.q ** (window.N - k)] = scale
        return cls(params, side, window, vals)

    @classmethod
    def cell_indicator(cls, params: FieldParams, window: Window, n: int, side: str = POINT) -> "TestFunction":
        vals = np.zeros(window.size(params.q), dtype=complex)
        vals[n] = 1.0
        return cls(params, side, window, vals)

    # -- small helpers ----------------------------------------------------------

    @property
    def q(self) -> int:
        return self.params.q

    def with_values(self, values: np.ndarray) -> "TestFunction":
        return TestFunction(self.params, self.side, self.window, values)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.window.cell_measure(self.q)))

    def __add__(self, other: "TestFunction") -> "TestFunction":
        a, b = _common(self, other)
        return a.with_values(a.values + b.values)

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        a, b = _common(self, other)
        return a.with_values(a.values - b.values)

    def __mul__(self, scalar: complex) -> "TestFunction":
        return self.with_values(self.values * scalar)

    __rmul__ = __mul__

    def conj(self) -> "TestFunction":
        return self.with_values(np.conj(self.values))

    def allclose(self, other: "TestFunction", atol: float = 1e-12) -> bool:
        a, b = _common(self, other)
        return bool(np.max(np.abs(a.values - b.values), initial=0.0) <= atol)

    def __repr__(self) -> str:
        return f"TestFunction(q={self.q}, side={self.side}, window=({self.window.M},{self.window.N}))"


def _common(f: TestFunction, g: TestFunction) -> tuple[TestFunction, TestFunction]:
    if f.params != g.params:
        raise ParameterError("functions live over different fields")
    if f.side != g.side:
        raise DomainError(f"cannot combine a {f.side}-side and a {g.side}-side function")
    w = f.window.join(g.window)
    return unify_window(f, w), unify_window(g, w)


def grid_point(params: FieldParams, window: Window, n: int) -> LaurentElem:
    """Coset representative ``P^N u(n)`` of cell ``n``."""
    if not 0 <= n < window.size(params.q):
        raise DomainError(f"cell index {n} out of range for window {window}")
    return laurent_mul(LaurentElem.monomial(params, window.N, 1), u_of(params, n))


def cell_of_point(params: FieldParams, window: Window, x: LaurentElem) -> int | None:
    """Cell index containing ``x``, or ``None`` if ``x`` lies outside the support."""
    q = params.q
    n = 0
    for e, v in x.codes.items():
        if e < -window.M:
            return None
        if e < window.N:
            n += v * q ** (window.N - 1 - e)
    return n


def _pow(q: int, e: np.ndarray) -> np.ndarray:
    return np.power(np.int64(q), e.astype(np.int64))


def sample(f: TestFunction, idx, res) -> np.ndarray:
    """Exact value of ``f`` on each cell ``P^res u(idx) + P^res O``.

    Cells finer than the constancy scale are looked up directly; coarser
    cells are accepted only if ``f`` is constant on them, otherwise a
    :class:`ResolutionError` is raised.  Cells outside the support give 0.
    """
    idx = np.asarray(idx, dtype=np.int64)
    res = np.broadcast_to(np.asarray(res, dtype=np.int64), idx.shape)
    q, M, N = f.q, f.window.M, f.window.N
    size = f.values.size
    out = np.zeros(idx.shape, dtype=complex)
    fine = res >= N
    if np.any(fine):
        r = res[fine]
        if np.max(r - N) * np.log2(q) > 62:
            raise ResolutionError("cell resolution too fine for 64-bit indexing")
        fidx = idx[fine] // _pow(q, r - N)
        vals = np.zeros(fidx.shape, dtype=complex)
        inside = fidx < size
        vals[inside] = f.values[fidx[inside]]
        out[fine] = vals
    coarse = ~fine
    if np.any(coarse):
        cidx, cres = idx[coarse], res[coarse]
        vals = np.zeros(cidx.shape, dtype=complex)
        for r in np.unique(cres):
            sel = cres == r
            ids = cidx[sel]
            if r < -M:
                # one cell swallows the whole support; it is constant only if f == 0
                if np.any(ids == 0) and np.any(f.values):
                    raise ResolutionError(f"cell of resolution {int(r)} around 0 covers a non-constant region")
                continue
            blocks = f.values.reshape(-1, q ** int(N - r))
            inside = ids < blocks.shape[0]
            hit = blocks[ids[inside]]
            if np.any(hit != hit[:, :1]):
                raise ResolutionError(
                    f"function is not constant on cells of resolution {int(r)} (constancy scale {N})"
                )
            v = np.zeros(ids.shape, dtype=complex)
            v[inside] = hit[:, 0]
            vals[sel] = v
        out[coarse] = vals
    return out


def integrate(f: TestFunction) -> complex:
    """Haar integral with |O| = 1."""
    return complex(np.sum(f.values) * f.window.cell_measure(f.q))


def inner_product(f: TestFunction, g: TestFunction) -> complex:
    """<f, g> = integral of f * conj(g)."""
    a, b = _common(f, g)
    return complex(np.sum(a.values * np.conj(b.values)) * a.window.cell_measure(a.q))


def unify_window(f: TestFunction, window: Window) -> TestFunction:
    """Exact re-representation of ``f`` on a wider and finer window."""
    if window == f.window:
        return f
    if not window.contains(f.window):
        # shrinking is allowed only when nothing is lost
        idx = np.arange(window.size(f.q), dtype=np.int64)
        vals = sample(f, idx, window.N)
        back = TestFunction(f.params, f.side, window, vals)
        if not np.array_equal(sample(back, np.arange(f.values.size), f.window.N), f.values):
            raise ResolutionError(f"cannot shrink window {f.window} to {window} without losing information")
        return back
    idx = np.arange(window.size(f.q), dtype=np.int64)
    return TestFunction(f.params, f.side, window, sample(f, idx, window.N))


def _digit_matrix(q: int, L: int, count: int) -> np.ndarray:
    """Row i holds the q-ary digit i of 0..count-1."""
    n = np.arange(count, dtype=np.int64)
    return np.stack([(n // q**i) % q for i in range(L)]) if L else np.zeros((0, count), dtype=np.int64)


def _roots(p: int) -> np.ndarray:
    roots = np.exp(2j * np.pi * np.arange(p) / p)
    roots[0] = 1.0
    if p % 2 == 0:
        roots[p // 2] = -1.0
    return roots


def _naive(f: TestFunction, sign: int, block_rows: int = 256) -> np.ndarray:
    """Literal character sum; the pairing exponent is accumulated exactly in Z_p."""
    params, q, p = f.params, f.q, f.params.p
    L = f.window.M + f.window.N
    size = q**L
    B = pairing_table(params)
    roots = _roots(p)
    dn = _digit_matrix(q, L, size)
    out = np.empty(size, dtype=complex)
    for start in range(0, size, block_rows):
        rows = np.arange(start, min(start + block_rows, size), dtype=np.int64)
        dm = _digit_matrix(q, L, size)[:, rows] if L else np.zeros((0, rows.size), dtype=np.int64)
        expo = np.zeros((rows.size, size), dtype=np.int64)
        for i in range(L):
            expo += B[dm[i][:, None], dn[L - 1 - i][None, :]]
        kernel = roots[(sign * expo) % p]
        out[rows] = kernel @ f.values
    return out * f.window.cell_measure(q)


def _fast(f: TestFunction, sign: int) -> np.ndarray:
    """Transform as cL stages of p-point DFTs followed by a pairing permutation.

    Viewing the grid as GF(p)^(cL), the pairing between digit i of the output
    and digit L-1-i of the input is g^T A h with A[k, k'] the eps_0
    coordinate of eps_k eps_k'.  A full multidimensional p-point DFT gives
    the sums at dual coordinates y, and output g reads the entry at
    y = A^T g.
    """
    params, q, p, c = f.params, f.q, f.params.p, f.params.c
    L = f.window.M + f.window.N
    D = c * L
    roots = _roots(p)
    stage = roots[(sign * np.outer(np.arange(p), np.arange(p))) % p]
    arr = np.array(f.values)
    for _ in range(D):
        # transform the last axis and rotate it to the front
        arr = (arr.reshape(-1, p) @ stage.T).T.reshape(-1)
    perm = _pairing_permutation(params, L)
    return arr[perm] * f.window.cell_measure(q)


_PERM_CACHE: dict[tuple[FieldParams, int], np.ndarray] = {}


def _pairing_permutation(params: FieldParams, L: int) -> np.ndarray:
    key = (params, L)
    if key not in _PERM_CACHE:
        q, p, c = params.q, params.p, params.c
        B = pairing_table(params)
        # A[k, k'] = B(eps_k, eps_k'); image of g under A^T encoded as an integer
        A = np.array([[B[p**k, p**kk] for kk in range(c)] for k in range(c)], dtype=np.int64)
        coords = np.array([[(g // p**k) % p for k in range(c)] for g in range(q)], dtype=np.int64)
        image = ((coords @ A) % p) @ (p ** np.arange(c, dtype=np.int64))
        digits = _digit_matrix(q, L, q**L)
        perm = np.zeros(q**L, dtype=np.int64)
        for i in range(L):
            perm += image[digits[i]] * q ** (L - 1 - i)
        perm.setflags(write=False)
        _PERM_CACHE[key] = perm
    return _PERM_CACHE[key]


def fourier_forward(f: TestFunction) -> TestFunction:
    """f^(xi) = integral f(x) conj(chi(xi x)) dx by direct summation over cells."""
    if f.side != POINT:
        raise DomainError("fourier_forward expects a point-side function")
    return TestFunction(f.params, FREQUENCY, f.window.swap(), _naive(f, -1))


def fourier_inverse(F: TestFunction, fast: bool = False) -> TestFunction:
    """f(x) = integral F(xi) chi(xi x) d xi."""
    if F.side != FREQUENCY:
        raise DomainError("fourier_inverse expects a frequency-side function")
    vals = _fast(F, +1) if fast else _naive(F, +1)
    return TestFunction(F.params, POINT, F.window.swap(), vals)


def fourier_fast(f: TestFunction) -> TestFunction:
    """Same result as :func:`fourier_forward` in O(n p log_p n) operations."""
    if f.side != POINT:
        raise DomainError("fourier_fast expects a point-side function")
    return TestFunction(f.params, FREQUENCY, f.window.swap(), _fast(f, -1))


def transform(f: TestFunction, fast: bool = True) -> TestFunction:
    """Forward transform of point-side input, inverse transform of frequency-side input."""
    if f.side == POINT:
        return fourier_fast(f) if fast else fourier_forward(f)
    return fourier_inverse(f, fast=fast)


def dilate(f: TestFunction, j: int) -> TestFunction:
    """delta_j f(x) = q^(j/2) f(P^-j x).

    The amplitudes keep their indices: window (M, N) becomes (M-j, N+j),
    with M clamped to 0 by zero padding.  A negative constancy exponent
    cannot be represented; refine ``f`` first.
    """
    if j == 0:
        return f
    M, N = f.window.M - j, f.window.N + j
    if N < 0:
        raise ResolutionError(f"dilation by {j} needs constancy exponent >= {-j}; refine the window first")
    vals = f.values * float(f.q) ** (j / 2)
    if M < 0:
        # the support sits inside P^|M| O: its cells are the first q^(M+N) cells of window (0, N)
        padded = np.zeros(f.q**N, dtype=complex)
        padded[: vals.size] = vals
        return TestFunction(f.params, f.side, Window(0, N), padded)
    return TestFunction(f.params, f.side, Window(M, N), vals)


def translate(f: TestFunction, k: int) -> TestFunction:
    """tau_{u(k)} f(x) = f(x - u(k)); the support radius grows to cover u(k)."""
    if k == 0:
        return f
    if k < 0:
        raise DomainError("translation index must be a natural number")
    q = f.q
    ndig = 0
    m = k
    while m:
        m //= q
        ndig += 1
    window = Window(max(f.window.M, ndig), f.window.N)
    idx = np.arange(window.size(q), dtype=np.int64)
    shifted = digit_sub(f.params, idx, np.int64(k) * q**window.N)
    return TestFunction(f.params, f.side, window, sample(f, shifted, window.N))


@dataclass(frozen=True, eq=False)
class WaveletFamily:
    """Frequency-side generators psi^1..psi^L on a common window.

    ``zero_vanish_level`` is the smallest L0 with every member vanishing on
    ``P^L0 O``; it is ``None`` when the cell containing the origin carries a
    nonzero amplitude, in which case dilation sums diverge.
    """

    members: tuple[TestFunction, ...]
    zero_vanish_level: int | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.members:
            raise DomainError("a wavelet family needs at least one member")
        params = self.members[0].params
        converted = []
        for m in self.members:
            if m.params != params:
                raise ParameterError("family members live over different fields")
            converted.append(m if m.side == FREQUENCY else _snap(fourier_fast(m)))
        window = converted[0].window
        for m in converted[1:]:
            window = window.join(m.window)
        unified = tuple(unify_window(m, window) for m in converted)
        object.__setattr__(self, "members", unified)
        level = _vanish_level(unified)
        declared = self.zero_vanish_level
        if declared is not None and (level is None or declared < level):
            raise CertificateError(f"declared zero_vanish_level {declared} is not valid (computed {level})")
        object.__setattr__(self, "zero_vanish_level", level if declared is None else int(declared))

    @property
    def params(self) -> FieldParams:
        return self.members[0].params

    @property
    def q(self) -> int:
        return self.params.q

    @property
    def window(self) -> Window:
        return self.members[0].window

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def values(self) -> np.ndarray:
        return np.stack([m.values for m in self.members])

    def require_certificate(self) -> int:
        if self.zero_vanish_level is None:
            raise CertificateError(
                "family does not vanish on a neighbourhood of 0; dilation sums over all scales diverge"
            )
        return self.zero_vanish_level

    def point_side(self) -> list[TestFunction]:
        return [fourier_inverse(m, fast=True) for m in self.members]

    def scaled(self, alpha: complex) -> "WaveletFamily":
        return WaveletFamily(tuple(m * alpha for m in self.members), metadata=dict(self.metadata))

    def __iter__(self):
        return iter(self.members)

    def __len__(self) -> int:
        return len(self.members)


# relative size below which transform round-off is treated as an exact zero
SNAP_TOL = 1e-13


def _snap(f: TestFunction) -> TestFunction:
    """Replace round-off residue of a transform by exact zeros.

    Sums of p-th roots of unity that cancel exactly in theory leave ~1e-17
    behind; the zero-neighbourhood certificate needs true zeros.
    """
    vals = f.values.copy()
    scale = float(np.max(np.abs(vals), initial=0.0))
    vals.real[np.abs(vals.real) <= SNAP_TOL * scale] = 0.0
    vals.imag[np.abs(vals.imag) <= SNAP_TOL * scale] = 0.0
    return f.with_values(vals)


def _vanish_level(members: Sequence[TestFunction]) -> int | None:
    first = members[0]
    q, M, N = first.q, first.window.M, first.window.N
    stacked = np.stack([m.values for m in members])
    if np.any(stacked[:, 0] != 0):
        return None
    for level in range(-M, N + 1):
        if not np.any(stacked[:, : q ** (N - level)]):
            return level
    return N


def family_from(functions: Iterable[TestFunction], **metadata) -> WaveletFamily:
    return WaveletFamily(tuple(functions), metadata=dict(metadata))
