"""Exact arithmetic in GF(p^c) and in finite Laurent series over it.

The local field K of characteristic p is modelled as Laurent series in a
prime element ``P`` with coefficients in GF(q), q = p^c.  Only finite sums
ever occur, so every element is a Laurent polynomial and all arithmetic is
exact.

GF(q) is realised as Z_p[x]/(r(x)).  The basis vector eps_mu is the class
of x^mu, and an element is encoded as the integer ``sum_mu a_mu p^mu`` of
its coordinates.  That encoding coincides with the base-p digit embedding
used by the translation map ``u``, so the integer code of a coefficient is
also the q-ary digit it stands for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Mapping

import numpy as np

from .errors import ParameterError

MAX_P = 7
MAX_C = 3


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    return all(n % d for d in range(2, math.isqrt(n) + 1))


def _poly_divides(divisor: tuple[int, ...], poly: tuple[int, ...], p: int) -> bool:
    """True if ``divisor`` divides ``poly`` over Z_p (coefficients low to high)."""
    rem = list(poly)
    d = len(divisor) - 1
    inv_lead = pow(divisor[-1], -1, p)
    for shift in range(len(rem) - 1 - d, -1, -1):
        coef = rem[shift + d] * inv_lead % p
        if coef:
            for i, a in enumerate(divisor):
                rem[shift + i] = (rem[shift + i] - coef * a) % p
    return not any(rem)


def is_irreducible(reduction: Iterable[int], p: int) -> bool:
    """Exhaustive irreducibility test by trial division with every monic divisor."""
    poly = tuple(int(a) % p for a in reduction)
    degree = len(poly) - 1
    if degree < 1 or poly[-1] == 0:
        return False
    for d in range(1, degree // 2 + 1):
        for low in product(range(p), repeat=d):
            if _poly_divides(low + (1,), poly, p):
                return False
    return True


def default_reduction(p: int, c: int) -> tuple[int, ...]:
    """Smallest monic irreducible of degree ``c`` over Z_p.

    Candidates are ordered by the integer ``sum_i r_i p^i``, i.e.
    lexicographically from the highest non-leading coefficient downwards.
    For ``c = 1`` this is the polynomial ``x``.
    """
    for code in range(p**c):
        low = tuple((code // p**i) % p for i in range(c))
        poly = low + (1,)
        if is_irreducible(poly, p):
            return poly
    raise ParameterError(f"no irreducible polynomial of degree {c} over Z_{p}")


@dataclass(frozen=True)
class FieldParams:
    """Parameters ``p``, ``c`` and the reduction polynomial of GF(p^c).

    ``reduction`` lists the coefficients r_0..r_c of a monic irreducible
    polynomial; ``None`` selects :func:`default_reduction`.
    """

    p: int
    c: int = 1
    reduction: tuple[int, ...] | None = field(default=None)

    def __post_init__(self) -> None:
        if not isinstance(self.p, (int, np.integer)) or not _is_prime(int(self.p)):
            raise ParameterError(f"p={self.p!r} is not a prime")
        if not isinstance(self.c, (int, np.integer)) or self.c < 1:
            raise ParameterError(f"c={self.c!r} must be a positive integer")
        if self.p > MAX_P or self.c > MAX_C:
            raise ParameterError(
                f"unsupported field size p={self.p}, c={self.c} (need p <= {MAX_P}, c <= {MAX_C})"
            )
        object.__setattr__(self, "p", int(self.p))
        object.__setattr__(self, "c", int(self.c))
        if self.reduction is None:
            object.__setattr__(self, "reduction", default_reduction(self.p, self.c))
        else:
            red = tuple(int(a) for a in self.reduction)
            if len(red) != self.c + 1:
                raise ParameterError(f"reduction must have {self.c + 1} coefficients, got {len(red)}")
            if any(not 0 <= a < self.p for a in red):
                raise ParameterError(f"reduction coefficients must lie in [0, {self.p})")
            if red[-1] != 1:
                raise ParameterError("reduction polynomial must be monic")
            if not is_irreducible(red, self.p):
                raise ParameterError(f"reduction {list(red)} is reducible over Z_{self.p}")
            object.__setattr__(self, "reduction", red)

    @property
    def q(self) -> int:
        return self.p**self.c

    def to_dict(self) -> dict:
        return {"p": self.p, "c": self.c, "reduction": list(self.reduction)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "FieldParams":
        return cls(int(data["p"]), int(data["c"]), tuple(data["reduction"]) if data.get("reduction") is not None else None)


def _check_same(a: FieldParams, b: FieldParams) -> None:
    if a is not b and a != b:
        raise ParameterError(f"mismatched field parameters: {a} vs {b}")


@lru_cache(maxsize=None)
def field_tables(params: FieldParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Addition, multiplication and negation tables on integer codes.

    The multiplication table is built by literal polynomial multiplication
    followed by reduction modulo ``params.reduction``.
    """
    p, c, q = params.p, params.c, params.q
    coords = np.array([[(v // p**k) % p for k in range(c)] for v in range(q)], dtype=np.int64)
    weights = p ** np.arange(c, dtype=np.int64)

    add = ((coords[:, None, :] + coords[None, :, :]) % p) @ weights
    neg = ((-coords) % p) @ weights

    red = params.reduction
    mul = np.zeros((q, q), dtype=np.int64)
    for a in range(q):
        for b in range(a, q):
            prod = [0] * (2 * c - 1)
            for i in range(c):
                if coords[a, i]:
                    for j in range(c):
                        prod[i + j] += int(coords[a, i] * coords[b, j])
            prod = [x % p for x in prod]
            # x^c = -(r_0 + ... + r_{c-1} x^{c-1})
            for top in range(2 * c - 2, c - 1, -1):
                coef = prod[top]
                if coef:
                    prod[top] = 0
                    for i in range(c):
                        prod[top - c + i] = (prod[top - c + i] - coef * red[i]) % p
            code = sum(prod[k] * p**k for k in range(c))
            mul[a, b] = mul[b, a] = code
    for table in (add, neg, mul):
        table.setflags(write=False)
    return add, mul, neg


@lru_cache(maxsize=None)
def _list_tables(params: FieldParams) -> tuple[list, list, list]:
    # plain-list copies: scalar lookups in lists are much cheaper than in arrays
    add, mul, neg = field_tables(params)
    return add.tolist(), mul.tolist(), neg.tolist()


@dataclass(frozen=True)
class GFqElem:
    """Element of GF(q), stored by its integer code ``sum_mu coeffs[mu] p^mu``."""

    params: FieldParams
    value: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.params.q:
            raise ParameterError(f"GF({self.params.q}) code {self.value} out of range")
        object.__setattr__(self, "value", int(self.value))

    @classmethod
    def from_coeffs(cls, params: FieldParams, coeffs: Iterable[int]) -> "GFqElem":
        coeffs = [int(a) for a in coeffs]
        if len(coeffs) != params.c or any(not 0 <= a < params.p for a in coeffs):
            raise ParameterError(f"need {params.c} coordinates in [0, {params.p}), got {coeffs}")
        return cls(params, sum(a * params.p**k for k, a in enumerate(coeffs)))

    @classmethod
    def basis(cls, params: FieldParams, mu: int) -> "GFqElem":
        """The basis vector eps_mu (class of x^mu); eps_0 is the identity."""
        return cls(params, params.p**mu)

    @property
    def coeffs(self) -> tuple[int, ...]:
        p = self.params.p
        return tuple((self.value // p**k) % p for k in range(self.params.c))

    def __add__(self, other: "GFqElem") -> "GFqElem":
        return gfq_add(self, other)

    def __mul__(self, other: "GFqElem") -> "GFqElem":
        return gfq_mul(self, other)

    def __neg__(self) -> "GFqElem":
        return gfq_neg(self)

    def __sub__(self, other: "GFqElem") -> "GFqElem":
        return gfq_add(self, gfq_neg(other))

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"GFqElem({list(self.coeffs)})"


def gfq_add(a: GFqElem, b: GFqElem) -> GFqElem:
    _check_same(a.params, b.params)
    return GFqElem(a.params, int(field_tables(a.params)[0][a.value, b.value]))


def gfq_mul(a: GFqElem, b: GFqElem) -> GFqElem:
    _check_same(a.params, b.params)
    return GFqElem(a.params, int(field_tables(a.params)[1][a.value, b.value]))


def gfq_neg(a: GFqElem) -> GFqElem:
    return GFqElem(a.params, int(field_tables(a.params)[2][a.value]))


class LaurentElem:
    """Finite Laurent polynomial ``sum_j a_j P^j`` with coefficients in GF(q).

    Only nonzero coefficients are stored, so the representation is
    canonical and equality is structural.
    """

    __slots__ = ("params", "_terms", "_hash")

    def __init__(self, params: FieldParams, terms: Mapping[int, GFqElem | int] | None = None):
        self.params = params
        clean: dict[int, int] = {}
        for exp, coef in (terms or {}).items():
            if isinstance(coef, GFqElem):
                _check_same(params, coef.params)
                code = coef.value
            else:
                code = int(coef)
                if not 0 <= code < params.q:
                    raise ParameterError(f"coefficient code {code} out of range for GF({params.q})")
            if code:
                clean[int(exp)] = code
        self._terms = tuple(sorted(clean.items()))
        self._hash = None

    @classmethod
    def _trusted(cls, params: FieldParams, out: Mapping[int, int]) -> "LaurentElem":
        """Build from codes already known to be in range (results of table arithmetic)."""
        self = object.__new__(cls)
        self.params = params
        self._terms = tuple(sorted((e, v) for e, v in out.items() if v))
        self._hash = None
        return self

    @classmethod
    def zero(cls, params: FieldParams) -> "LaurentElem":
        return cls(params)

    @classmethod
    def monomial(cls, params: FieldParams, exponent: int, coef: GFqElem | int = 1) -> "LaurentElem":
        return cls(params, {exponent: coef})

    @classmethod
    def from_codes(cls, params: FieldParams, codes: Mapping[int, int]) -> "LaurentElem":
        return cls(params, codes)

    @property
    def codes(self) -> dict[int, int]:
        """Exponent -> integer code of the coefficient (nonzero entries only)."""
        return dict(self._terms)

    @property
    def terms(self) -> dict[int, GFqElem]:
        return {e: GFqElem(self.params, v) for e, v in self._terms}

    def coefficient(self, exponent: int) -> GFqElem:
        return GFqElem(self.params, dict(self._terms).get(exponent, 0))

    def is_zero(self) -> bool:
        return not self._terms

    def valuation(self) -> float | int:
        return valuation(self)

    def abs_value(self) -> Fraction:
        return abs_value(self)

    def __add__(self, other: "LaurentElem") -> "LaurentElem":
        return laurent_add(self, other)

    def __sub__(self, other: "LaurentElem") -> "LaurentElem":
        return laurent_add(self, laurent_neg(other))

    def __neg__(self) -> "LaurentElem":
        return laurent_neg(self)

    def __mul__(self, other: "LaurentElem") -> "LaurentElem":
        return laurent_mul(self, other)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LaurentElem):
            return NotImplemented
        return self._terms == other._terms and self.params == other.params

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.params, self._terms))
        return self._hash

    def __repr__(self) -> str:
        return f"LaurentElem({render_laurent(self)})"

    def to_list(self) -> list:
        """Serialized form: sorted ``[exponent, [coeff_0..coeff_{c-1}]]`` pairs."""
        return [[e, list(GFqElem(self.params, v).coeffs)] for e, v in self._terms]

    @classmethod
    def from_list(cls, params: FieldParams, data: Iterable) -> "LaurentElem":
        terms = {}
        for exp, coeffs in data:
            terms[int(exp)] = GFqElem.from_coeffs(params, coeffs)
        return cls(params, terms)


def render_laurent(x: LaurentElem) -> str:
    """Human-readable rendering, lowest exponent first, e.g. ``P^-2 + P^-1 + 1`` or ``[1,1]P^3``."""
    if x.is_zero():
        return "0"
    parts = []
    for e, v in sorted(x.codes.items()):
        coef = f"{v}" if x.params.c == 1 else "[" + ",".join(map(str, GFqElem(x.params, v).coeffs)) + "]"
        if e == 0:
            parts.append(coef)
        else:
            parts.append(("" if v == 1 else coef) + f"P^{e}")
    return " + ".join(parts)


def prime_element(params: FieldParams) -> LaurentElem:
    """The prime element P (single term eps_0 at exponent 1), |P| = 1/q."""
    return LaurentElem.monomial(params, 1, 1)


def laurent_add(x: LaurentElem, y: LaurentElem) -> LaurentElem:
    _check_same(x.params, y.params)
    add = _list_tables(x.params)[0]
    out = dict(x._terms)
    for e, v in y._terms:
        out[e] = add[out.get(e, 0)][v]
    return LaurentElem._trusted(x.params, out)


def laurent_neg(x: LaurentElem) -> LaurentElem:
    neg = _list_tables(x.params)[2]
    return LaurentElem._trusted(x.params, {e: neg[v] for e, v in x._terms})


def laurent_mul(x: LaurentElem, y: LaurentElem) -> LaurentElem:
    """Cauchy product of two Laurent polynomials."""
    _check_same(x.params, y.params)
    add, mul, _ = _list_tables(x.params)
    out: dict[int, int] = {}
    for e1, v1 in x._terms:
        row = mul[v1]
        for e2, v2 in y._terms:
            e = e1 + e2
            out[e] = add[out.get(e, 0)][row[v2]]
    return LaurentElem._trusted(x.params, out)


def valuation(x: LaurentElem) -> float | int:
    """Smallest exponent with a nonzero coefficient; ``math.inf`` for zero."""
    return x._terms[0][0] if x._terms else math.inf


def abs_value(x: LaurentElem) -> Fraction:
    """|x| = q^(-v(x)) as an exact rational, with |0| = 0."""
    if x.is_zero():
        return Fraction(0)
    return Fraction(x.params.q) ** (-valuation(x))


def in_ideal(x: LaurentElem, k: int) -> bool:
    """Membership in the fractional ideal P^k O = {|x| <= q^-k}."""
    return valuation(x) >= k
