"""Exact arithmetic in real fields generated by square roots of integers.

A :class:`RadicalNumber` is a finite sum ``sum_r q_r * sqrt(r)`` with rational
coefficients ``q_r`` and distinct square-free radicands ``r``.  Square roots of
distinct square-free integers are linearly independent over the rationals, so
the canonical sparse form is unique and the zero test is exact.
"""
from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

import mpmath

__all__ = [
    "RadicalNumber",
    "RadicalCapacityError",
    "radical_sqrt_int",
    "radical_mul",
    "radical_is_zero",
    "radical_to_float",
    "radical_det",
    "squarefree_split",
]

# bit-length guard for numerators/denominators; far beyond desk-scale needs
MAX_COEFF_BITS = 1 << 20


class RadicalCapacityError(ArithmeticError):
    """Coefficient growth exceeded :data:`MAX_COEFF_BITS`."""


@lru_cache(maxsize=65536)
def squarefree_split(m: int) -> tuple[int, int]:
    """Return ``(g, r)`` with ``m = g**2 * r`` and ``r`` square-free."""
    if m < 1:
        raise ValueError(f"expected a positive integer, got {m}")
    g, r = 1, 1
    rest = m
    f = 2
    while f * f <= rest:
        e = 0
        while rest % f == 0:
            rest //= f
            e += 1
        if e:
            g *= f ** (e // 2)
            if e % 2:
                r *= f
        f += 1 if f == 2 else 2
    r *= rest
    return g, r


def _norm_coeff(q):
    if isinstance(q, Fraction):
        if q.denominator == 1:
            q = q.numerator
        elif max(q.numerator.bit_length(), q.denominator.bit_length()) > MAX_COEFF_BITS:
            raise RadicalCapacityError("rational coefficient exceeds capacity")
        return q
    if isinstance(q, int):
        if q.bit_length() > MAX_COEFF_BITS:
            raise RadicalCapacityError("integer coefficient exceeds capacity")
        return q
    if isinstance(q, Rational):
        return _norm_coeff(Fraction(q.numerator, q.denominator))
    raise TypeError(f"coefficients must be rational, got {type(q).__name__}")


class RadicalNumber:
    """Immutable element of ``Q(sqrt(r1), sqrt(r2), ...)``.

    Parameters
    ----------
    terms : mapping, optional
        ``{radicand: coefficient}``.  Radicands need not be square-free; they
        are canonicalized on construction.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms=None):
        canon: dict[int, int | Fraction] = {}
        if terms:
            for r, q in terms.items():
                if r < 1:
                    raise ValueError(f"radicand must be positive, got {r}")
                q = _norm_coeff(q)
                if q == 0:
                    continue
                g, s = squarefree_split(int(r))
                canon[s] = canon.get(s, 0) + q * g
        self._terms = {r: q for r, q in canon.items() if q != 0}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> RadicalNumber:
        # trusted constructor: radicands already square-free, no zeros
        obj = cls.__new__(cls)
        obj._terms = terms
        obj._hash = None
        return obj

    @classmethod
    def rational(cls, q) -> RadicalNumber:
        return cls({1: q}) if q else cls()

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def is_rational(self) -> bool:
        return all(r == 1 for r in self._terms)

    def rational_part(self):
        return self._terms.get(1, 0)

    # arithmetic ---------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, RadicalNumber):
            return other
        if isinstance(other, (int, Fraction)) or isinstance(other, Rational):
            return RadicalNumber.rational(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for r, q in other._terms.items():
            s = out.get(r, 0) + q
            if s:
                out[r] = _norm_coeff(s)
            else:
                out.pop(r, None)
        return RadicalNumber._raw(out)

    __radd__ = __add__

    def __neg__(self):
        return RadicalNumber._raw({r: -q for r, q in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[int, int | Fraction] = {}
        for r, q in self._terms.items():
            for s, w in other._terms.items():
                if r == 1:
                    t, c = s, q * w
                elif s == 1:
                    t, c = r, q * w
                else:
                    g = math.gcd(r, s)
                    t, c = (r // g) * (s // g), q * w * g
                out[t] = out.get(t, 0) + c
        return RadicalNumber._raw({t: _norm_coeff(c) for t, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return (self.inverse()) ** (-k)
        result = RadicalNumber.rational(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate_at(self, prime: int) -> RadicalNumber:
        """Galois conjugate flipping the sign of ``sqrt(prime)``."""
        return RadicalNumber._raw(
            {r: (-q if r % prime == 0 else q) for r, q in self._terms.items()})

    def inverse(self) -> RadicalNumber:
        if not self._terms:
            raise ZeroDivisionError("inverse of zero RadicalNumber")
        num = RadicalNumber.rational(1)
        den = self
        while not den.is_rational():
            prime = _smallest_prime_factor(max(den._terms))
            conj = den.conjugate_at(prime)
            num = num * conj
            den = den * conj
        return num * (Fraction(1) / den.rational_part())

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if other.is_rational():
            q = other.rational_part()
            if q == 0:
                raise ZeroDivisionError("division by zero RadicalNumber")
            return self * (Fraction(1) / q)
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    # comparison ---------------------------------------------------------
    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self._terms == other._terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def sign(self) -> int:
        """Exact sign: zero by the canonical form, otherwise by adaptive precision."""
        if not self._terms:
            return 0
        v = self.to_mpf()
        return 1 if v > 0 else -1

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    # evaluation ---------------------------------------------------------
    def to_mpf(self, dps: int = 30):
        """High-precision value; precision grows until the value is resolved."""
        if not self._terms:
            return mpmath.mpf(0)
        prec_dps = dps
        while True:
            with mpmath.workdps(prec_dps):
                vals = [mpmath.mpf(q.numerator) / q.denominator * mpmath.sqrt(r)
                        for r, q in self._terms.items()]
                v = mpmath.fsum(vals)
                scale = max(abs(x) for x in vals)
                # accept once cancellation leaves >= 20 significant digits
                if v != 0 and abs(v) > scale * mpmath.mpf(10) ** (20 - prec_dps):
                    return +v
            prec_dps *= 2
            if prec_dps > 100000:
                raise RadicalCapacityError("could not resolve value to working precision")

    def __float__(self):
        if not self._terms:
            return 0.0
        if len(self._terms) == 1:
            (r, q), = self._terms.items()
            return float(q) * math.sqrt(r) if r != 1 else float(q)
        return float(self.to_mpf())

    # text ---------------------------------------------------------------
    def __str__(self):
        if not self._terms:
            return "0"
        parts = []
        for r in sorted(self._terms):
            q = self._terms[r]
            qs = str(q)
            parts.append(qs if r == 1 else f"{qs}*sqrt({r})")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"RadicalNumber({self})"

    _TERM = re.compile(r"^\s*([+-]?\s*[0-9]+(?:/[0-9]+)?)\s*(?:\*\s*sqrt\(\s*([0-9]+)\s*\))?\s*$")

    @classmethod
    def parse(cls, text: str) -> RadicalNumber:
        """Inverse of ``str()``: ``"q1 + q2*sqrt(r2) - ..."``."""
        text = text.strip()
        if text == "0":
            return cls()
        # split on top-level +/- keeping the sign
        pieces = re.split(r"\s(?=[+-]\s)", text)
        terms: dict[int, Fraction] = {}
        for piece in pieces:
            m = cls._TERM.match(piece.replace("+ ", "+").replace("- ", "-"))
            if m is None:
                raise ValueError(f"cannot parse radical term {piece!r}")
            q = Fraction(m.group(1).replace(" ", ""))
            r = int(m.group(2)) if m.group(2) else 1
            terms[r] = terms.get(r, 0) + q
        return cls(terms)


@lru_cache(maxsize=4096)
def _smallest_prime_factor(r: int) -> int:
    if r % 2 == 0:
        return 2
    f = 3
    while f * f <= r:
        if r % f == 0:
            return f
        f += 2
    return r


def radical_sqrt_int(m: int) -> RadicalNumber:
    """``sqrt(m)`` in canonical form ``g*sqrt(r)`` with ``m = g^2 r``."""
    if int(m) != m or m < 1:
        raise ValueError(f"radical_sqrt_int needs a positive integer, got {m}")
    g, r = squarefree_split(int(m))
    return RadicalNumber._raw({r: g})


def radical_mul(x: RadicalNumber, y: RadicalNumber) -> RadicalNumber:
    return x * y


def radical_is_zero(x: RadicalNumber) -> bool:
    return x.is_zero()


def radical_to_float(x: RadicalNumber) -> float:
    return float(x)


def radical_det(matrix) -> RadicalNumber:
    """Determinant by fraction-free (Bareiss) elimination over the radical field.

    The divisions in the Bareiss recurrence are exact in the field, so the
    intermediate entries stay polynomial in the input entries.
    """
    a = [[e if isinstance(e, RadicalNumber) else RadicalNumber.rational(e) for e in row]
         for row in matrix]
    n = len(a)
    if n == 0:
        return RadicalNumber.rational(1)
    if any(len(row) != n for row in a):
        raise ValueError("radical_det needs a square matrix")
    sign = 1
    prev = RadicalNumber.rational(1)
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return RadicalNumber()
        pivot = a[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * pivot - a[i][k] * a[k][j]) / prev
        prev = pivot
    det = a[n - 1][n - 1]
    return det if sign > 0 else -det
