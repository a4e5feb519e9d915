"""Translation lattice u(n), the index sets D_j and the canonical character.

``u(n)`` places the q-ary digits of ``n`` on the negative powers of the
prime element: digit ``b_i`` becomes the coefficient of ``P^-(i+1)``.
Because addition in GF(q) is digitwise addition mod p on the integer
codes, sums and negatives of lattice points are computed on the indices
directly by carry-free base-p arithmetic (:func:`digit_add`,
:func:`digit_neg`).
"""

from __future__ import annotations

import cmath
from functools import lru_cache
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, ParameterError
from .field import FieldParams, LaurentElem, field_tables, laurent_add, laurent_mul, laurent_neg


@dataclass(frozen=True)
class DigitDecomposition:
    """q-ary digits of ``n`` (least significant first) and their base-p sub-digits."""

    n: int
    q_digits: tuple[int, ...]
    p_digits: tuple[tuple[int, ...], ...]


def digits(params: FieldParams, n: int) -> DigitDecomposition:
    if n < 0:
        raise DomainError(f"digit decomposition needs n >= 0, got {n}")
    q, p = params.q, params.p
    qd = []
    m = n
    while m:
        qd.append(m % q)
        m //= q
    pd = tuple(tuple((b // p**k) % p for k in range(params.c)) for b in qd)
    return DigitDecomposition(n, tuple(qd), pd)


def num_q_digits(q: int, n: int) -> int:
    """Number of q-ary digits of n (0 for n = 0)."""
    count = 0
    while n:
        n //= q
        count += 1
    return count


@dataclass(frozen=True)
class UnitComplex:
    """The p-th root of unity exp(2 pi i t / p), stored by its exact index t."""

    p: int
    t: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "t", int(self.t) % self.p)

    @property
    def value(self) -> complex:
        if self.t == 0:
            return 1 + 0j
        if 2 * self.t == self.p:
            return -1 + 0j
        return cmath.exp(2j * cmath.pi * self.t / self.p)

    def __mul__(self, other: "UnitComplex") -> "UnitComplex":
        if self.p != other.p:
            raise ParameterError("roots of unity of different order")
        return UnitComplex(self.p, self.t + other.t)

    def conjugate(self) -> "UnitComplex":
        return UnitComplex(self.p, -self.t)

    def __pow__(self, k: int) -> "UnitComplex":
        return UnitComplex(self.p, self.t * k)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, UnitComplex):
            return self.p == other.p and self.t == other.t
        if isinstance(other, (int, float, complex)):
            return abs(self.value - other) < 1e-15
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.p, self.t))

    def __complex__(self) -> complex:
        return self.value


@lru_cache(maxsize=1 << 16)
def u_of(params: FieldParams, n: int) -> LaurentElem:
    """Lattice point u(n): q-ary digit b_i of n at exponent -(i+1)."""
    if n < 0:
        raise DomainError(f"u(n) needs n >= 0, got {n}")
    return LaurentElem(params, {-(i + 1): b for i, b in enumerate(digits(params, n).q_digits)})


def index_of(x: LaurentElem) -> int:
    """Inverse of :func:`u_of`; rejects anything with a term at exponent >= 0."""
    codes = x.codes
    if any(e >= 0 for e in codes):
        raise DomainError(f"{x!r} is not a lattice point u(n): it has terms at nonnegative exponents")
    q = x.params.q
    return sum(v * q ** (-e - 1) for e, v in codes.items())


def d_set(params: FieldParams, j: int) -> list[int]:
    """D_j = {0, ..., q^j - 1} for j >= 0 and {0} for j < 0."""
    return list(range(params.q**j)) if j >= 0 else [0]


def chi(x: LaurentElem) -> UnitComplex:
    """Canonical character: eps_0-coordinate of the P^-1 coefficient, as a p-th root index.

    The eps_0-coordinate of a code is its lowest base-p digit.
    """
    p = x.params.p
    return UnitComplex(p, x.codes.get(-1, 0) % p)


def chi_n(n: int, x: LaurentElem) -> UnitComplex:
    """chi_n(x) = chi(u(n) x)."""
    return chi(laurent_mul(u_of(x.params, n), x))


def character_sum_kernel(params: FieldParams, pidx: int, kidx: int, j: int) -> float:
    """q^-j sum_{t in D_j} chi((u(pidx) - u(kidx)) P^j u(t)), by literal summation.

    The root indices are tallied exactly; the complex value is formed once
    at the end.
    """
    if j < 0:
        raise DomainError("character_sum_kernel needs j >= 0")
    diff = laurent_add(u_of(params, pidx), laurent_neg(u_of(params, kidx)))
    scaled = laurent_mul(diff, LaurentElem.monomial(params, j, 1))
    counts = [0] * params.p
    for t in d_set(params, j):
        counts[chi(laurent_mul(scaled, u_of(params, t))).t] += 1
    total = sum(cnt * UnitComplex(params.p, t).value for t, cnt in enumerate(counts))
    return float((total / params.q**j).real)


def kernel_indicator(params: FieldParams, pidx: int, kidx: int, j: int) -> int:
    """Closed form of :func:`character_sum_kernel`: 1 iff q^j divides pidx - kidx."""
    return int((pidx - kidx) % params.q**j == 0)


# --- carry-free index arithmetic -------------------------------------------------


def _p_digit_count(params: FieldParams, *values) -> int:
    top = max(int(np.max(v)) if np.size(v) else 0 for v in values)
    count = 0
    while top:
        top //= params.p
        count += 1
    return count


def digit_add(params: FieldParams, a, b):
    """Index of u(a) + u(b): digitwise addition of base-p digits mod p.

    Works on Python ints and on integer numpy arrays (broadcasting).  The
    same map gives the grid index of a sum of two points expressed at a
    common resolution.
    """
    p = params.p
    if isinstance(a, (int, np.integer)) and isinstance(b, (int, np.integer)):
        a, b = int(a), int(b)
        if p == 2:
            return a ^ b
        out, w = 0, 1
        while a or b:
            out += ((a % p + b % p) % p) * w
            a //= p
            b //= p
            w *= p
        return out
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if p == 2:
        return np.bitwise_xor(a, b)
    out = np.zeros(np.broadcast(a, b).shape, dtype=np.int64)
    w = 1
    for _ in range(_p_digit_count(params, a, b)):
        out += ((a % p + b % p) % p) * w
        a = a // p
        b = b // p
        w *= p
    return out


def digit_neg(params: FieldParams, a):
    """Index of -u(a): every base-p digit d becomes (-d) mod p."""
    p = params.p
    if p == 2:
        return a
    if isinstance(a, (int, np.integer)):
        a = int(a)
        out, w = 0, 1
        while a:
            out += ((-(a % p)) % p) * w
            a //= p
            w *= p
        return out
    a = np.asarray(a, dtype=np.int64)
    out = np.zeros_like(a)
    w = 1
    for _ in range(_p_digit_count(params, a)):
        out += ((-(a % p)) % p) * w
        a = a // p
        w *= p
    return out


def digit_sub(params: FieldParams, a, b):
    return digit_add(params, a, digit_neg(params, b))


def pairing_table(params: FieldParams) -> np.ndarray:
    """B[g, h] = eps_0-coordinate of g*h in GF(q), the bilinear form behind chi."""
    return field_tables(params)[1] % params.p


def q_valuation(q: int, n: int) -> int:
    """Largest m with q^m dividing n (n != 0)."""
    n = abs(n)
    m = 0
    while n % q == 0:
        n //= q
        m += 1
    return m


def lattice_abs(params: FieldParams, n: int) -> Fraction:
    """|u(n)| computed from the Laurent element."""
    return u_of(params, n).abs_value()
