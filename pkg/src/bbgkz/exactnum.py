"""Exact cyclotomic numbers and truncated Laurent series in one variable.

``Cyclotomic`` stores an element of Q(zeta_n) on the power basis
1, zeta_n, ..., zeta_n^(phi(n)-1). Mixed arithmetic with ints and Fractions
is supported, and elements of different orders are promoted to the lcm.

``EpsSeries`` is a Laurent series in eps known modulo eps^prec. Its
coefficients may be Fractions or Cyclotomics.
"""
from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import factorial, gcd
from numbers import Rational

from .errors import PoleRemains, ZeroLeadingCoefficient


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _pmul(a, b):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _pdivmod(a, b):
    """Polynomial division over Q, coefficient lists low -> high."""
    a = list(a)
    b = _trim(list(b))
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    lead = Fraction(b[-1])
    while len(_trim(a)) >= len(b):
        shift = len(a) - len(b)
        f = a[-1] / lead
        q[shift] = f
        for i, y in enumerate(b):
            a[i + shift] -= f * y
        a.pop()
    return _trim(q), a


@lru_cache(maxsize=None)
def cyclotomic_polynomial(n: int) -> tuple[int, ...]:
    """Integer coefficients (low -> high) of the n-th cyclotomic polynomial."""
    p = [-1] + [0] * (n - 1) + [1]
    for d in range(1, n):
        if n % d == 0:
            q, r = _pdivmod(p, cyclotomic_polynomial(d))
            assert not _trim(r)
            p = q
    return tuple(int(x) for x in p)


@lru_cache(maxsize=None)
def totient(n: int) -> int:
    return len(cyclotomic_polynomial(n)) - 1


@lru_cache(maxsize=4096)
def _reduce_power(n: int, k: int) -> tuple[Fraction, ...]:
    """zeta_n^k on the power basis."""
    k %= n
    phi = totient(n)
    if k < phi:
        v = [Fraction(0)] * phi
        v[k] = Fraction(1)
        return tuple(v)
    poly = [0] * k + [1]
    _, r = _pdivmod(poly, cyclotomic_polynomial(n))
    r = list(r) + [0] * (phi - len(r))
    return tuple(Fraction(x) for x in r[:phi])


def _reduce(n: int, poly) -> tuple[Fraction, ...]:
    phi = totient(n)
    out = [Fraction(0)] * phi
    for k, c in enumerate(poly):
        if c:
            if k < phi:
                out[k] += c
            else:
                for j, x in enumerate(_reduce_power(n, k)):
                    if x:
                        out[j] += c * x
    return tuple(out)


class Cyclotomic:
    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs):
        if order < 1:
            raise ValueError("order must be positive")
        self.order = order
        self.coeffs = _reduce(order, [Fraction(c) for c in coeffs])

    @classmethod
    def rational(cls, q) -> "Cyclotomic":
        return cls(1, [Fraction(q)])

    @classmethod
    def _raw(cls, order, coeffs):
        obj = cls.__new__(cls)
        obj.order = order
        obj.coeffs = tuple(coeffs)
        return obj

    def promote(self, n: int) -> "Cyclotomic":
        """Image under Q(zeta_m) -> Q(zeta_n), zeta_m -> zeta_n^(n/m)."""
        if n == self.order:
            return self
        if n % self.order:
            raise ValueError(f"cannot embed order {self.order} into order {n}")
        step = n // self.order
        poly = [Fraction(0)] * (step * len(self.coeffs))
        for k, c in enumerate(self.coeffs):
            poly[k * step] = c
        return Cyclotomic._raw(n, _reduce(n, poly))

    def _coerce(self, other):
        if isinstance(other, Cyclotomic):
            n = self.order * other.order // gcd(self.order, other.order)
            return self.promote(n), other.promote(n)
        if isinstance(other, (int, Rational)):
            return self, Cyclotomic._raw(self.order, (Fraction(other),) + (Fraction(0),) * (totient(self.order) - 1))
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Cyclotomic._raw(a.order, tuple(x + y for x, y in zip(a.coeffs, b.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return Cyclotomic._raw(self.order, tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Cyclotomic._raw(a.order, tuple(x - y for x, y in zip(a.coeffs, b.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Rational)):
            f = Fraction(other)
            return Cyclotomic._raw(self.order, tuple(x * f for x in self.coeffs))
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        if b.is_rational():
            return a * b.coeffs[0]
        if a.is_rational():
            return b * a.coeffs[0]
        return Cyclotomic._raw(a.order, _reduce(a.order, _pmul(a.coeffs, b.coeffs)))

    __rmul__ = __mul__

    def inverse(self) -> "Cyclotomic":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        if self.is_rational():
            return Cyclotomic.rational(1 / self.coeffs[0]).promote(self.order)
        # extended Euclid: s*a + t*phi = 1
        phi = [Fraction(x) for x in cyclotomic_polynomial(self.order)]
        r0, r1 = phi, _trim(list(self.coeffs))
        s0, s1 = [], [Fraction(1)]
        while _trim(list(r1)):
            q, r = _pdivmod(r0, r1)
            r0, r1 = r1, _trim(r)
            qs = _pmul(q, s1)
            n = max(len(s0), len(qs))
            s0, s1 = s1, _trim([(s0[i] if i < len(s0) else 0) - (qs[i] if i < len(qs) else 0)
                                for i in range(n)])
        # r0 is a nonzero constant
        c = r0[0]
        return Cyclotomic(self.order, [x / c for x in s0])

    def __truediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self * (1 / Fraction(other))
        if isinstance(other, Cyclotomic):
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if isinstance(other, (int, Rational)):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Cyclotomic.rational(1).promote(self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return a.coeffs == b.coeffs

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    __hash__ = None

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self):
        return not self.is_zero()

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def to_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError(f"{self} is not rational")
        return self.coeffs[0]

    def complex_value(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.order)
        return complex(sum(float(c) * z ** k for k, c in enumerate(self.coeffs) if c))

    def __complex__(self):
        return self.complex_value()

    def __repr__(self):
        if self.is_rational():
            return f"Cyclotomic({self.coeffs[0]})"
        terms = [f"{c}*z{self.order}^{k}" for k, c in enumerate(self.coeffs) if c]
        return "Cyclotomic(" + " + ".join(terms) + ")"

    def to_json(self):
        if self.is_rational():
            return str(self.coeffs[0])
        return {"order": self.order, "coeffs": [str(c) for c in self.coeffs]}


def root_of_unity(num: int, den: int) -> Cyclotomic:
    """zeta_den ** num, reduced in Q(zeta_den)."""
    if den < 1:
        raise ValueError("den must be positive")
    return Cyclotomic._raw(den, _reduce_power(den, num))


def phase(q: Fraction) -> Cyclotomic:
    """exp(2 pi i q) for rational q."""
    q = Fraction(q)
    return root_of_unity(q.numerator, q.denominator)


def _is_zero(c) -> bool:
    return c == 0


class EpsSeries:
    """Laurent series sum_k coeffs[k - low] eps^k, known modulo eps^prec."""

    __slots__ = ("low", "coeffs", "prec")

    def __init__(self, coeffs, low: int = 0, prec: int | None = None):
        coeffs = [Fraction(c) if isinstance(c, int) else c for c in coeffs]
        if prec is None:
            prec = low + len(coeffs)
        n = max(prec - low, 0)
        coeffs = coeffs[:n] + [Fraction(0)] * (n - len(coeffs))
        self.low = low
        self.coeffs = tuple(coeffs)
        self.prec = prec

    @property
    def lowest_exponent(self) -> int:
        return self.low

    @property
    def truncation_order(self) -> int:
        return self.prec

    def __getitem__(self, k: int):
        if k >= self.prec:
            raise IndexError(f"coefficient of eps^{k} is beyond the truncation order")
        if k < self.low:
            return Fraction(0)
        return self.coeffs[k - self.low]

    @classmethod
    def constant(cls, c, prec: int) -> "EpsSeries":
        return cls([c], 0, prec)

    def normalized(self) -> "EpsSeries":
        """Drop vanishing leading coefficients."""
        k = 0
        while k < len(self.coeffs) and _is_zero(self.coeffs[k]):
            k += 1
        return EpsSeries(self.coeffs[k:], self.low + k, self.prec)

    def __add__(self, other):
        if not isinstance(other, EpsSeries):
            other = EpsSeries([other], 0, self.prec)
        low = min(self.low, other.low)
        prec = min(self.prec, other.prec)
        return EpsSeries([self[k] + other[k] for k in range(low, prec)], low, prec)

    __radd__ = __add__

    def __neg__(self):
        return EpsSeries([-c for c in self.coeffs], self.low, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, EpsSeries):
            return EpsSeries([c * other for c in self.coeffs], self.low, self.prec)
        low = self.low + other.low
        prec = min(self.low + other.prec, other.low + self.prec)
        n = max(prec - low, 0)
        out = [Fraction(0)] * n
        for i, a in enumerate(self.coeffs[:n]):
            if _is_zero(a):
                continue
            for j, b in enumerate(other.coeffs[:n - i]):
                if not _is_zero(b):
                    out[i + j] = out[i + j] + a * b
        return EpsSeries(out, low, prec)

    __rmul__ = __mul__

    def shift(self, k: int) -> "EpsSeries":
        """Multiply by eps^k."""
        return EpsSeries(self.coeffs, self.low + k, self.prec + k)

    def invert(self) -> "EpsSeries":
        s = self.normalized()
        if not s.coeffs:
            raise ZeroLeadingCoefficient("series has no nonzero coefficient below its truncation order")
        a = s.coeffs
        n = len(a)
        inv0 = 1 / a[0]
        b = [inv0]
        for k in range(1, n):
            acc = Fraction(0)
            for j in range(1, k + 1):
                if not _is_zero(a[j]):
                    acc = acc + a[j] * b[k - j]
            b.append(-(acc * inv0))
        return EpsSeries(b, -s.low, -s.low + n)

    def __truediv__(self, other):
        if isinstance(other, EpsSeries):
            return self * other.invert()
        return self * (1 / other)

    def constant_term_at_zero(self):
        if self.prec <= 0:
            raise PoleRemains("series is not known up to eps^0")
        for k in range(self.low, 0):
            if not _is_zero(self[k]):
                raise PoleRemains(f"coefficient of eps^{k} does not vanish")
        return self[0]

    def __repr__(self):
        terms = [f"({c})e^{self.low + k}" for k, c in enumerate(self.coeffs) if not _is_zero(c)]
        return "EpsSeries(" + (" + ".join(terms) or "0") + f" + O(e^{self.prec}))"


def exp_series(a, order: int) -> EpsSeries:
    """exp(a*eps) truncated after eps^order."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    a = Fraction(a)
    return EpsSeries([a ** k / factorial(k) for k in range(order + 1)], 0, order + 1)


def invert(s: EpsSeries) -> EpsSeries:
    return s.invert()


def constant_term_at_zero(s: EpsSeries):
    return s.constant_term_at_zero()
