"""Truncated power series with exact rational coefficients."""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence


class RationalSeries:
    """c_0 + c_1 x + ... + c_order x^order, arithmetic closed at a fixed order."""

    __slots__ = ("order", "coefficients")

    def __init__(self, coefficients: Iterable, order: int | None = None):
        cs = [Fraction(c) for c in coefficients]
        if order is None:
            order = len(cs) - 1
        if order < 0:
            raise ValueError("order must be >= 0")
        cs = (cs + [Fraction(0)] * (order + 1))[: order + 1]
        self.order = order
        self.coefficients: tuple[Fraction, ...] = tuple(cs)

    @classmethod
    def constant(cls, c, order: int) -> "RationalSeries":
        return cls([c], order)

    @classmethod
    def variable(cls, order: int) -> "RationalSeries":
        return cls([0, 1], order)

    def __getitem__(self, n: int) -> Fraction:
        return self.coefficients[n] if 0 <= n <= self.order else Fraction(0)

    def __repr__(self):
        return f"RationalSeries({[str(c) for c in self.coefficients]})"

    def __eq__(self, other):
        if isinstance(other, RationalSeries):
            return self.order == other.order and self.coefficients == other.coefficients
        return NotImplemented

    def __hash__(self):
        return hash((self.order, self.coefficients))

    def _coerce(self, other) -> "RationalSeries":
        if isinstance(other, RationalSeries):
            if other.order != self.order:
                n = min(self.order, other.order)
                raise ValueError(f"order mismatch ({self.order} vs {other.order}); truncate to {n} first")
            return other
        return RationalSeries.constant(other, self.order)

    def truncate(self, order: int) -> "RationalSeries":
        return RationalSeries(self.coefficients[: order + 1], order)

    def __add__(self, other):
        o = self._coerce(other)
        return RationalSeries([a + b for a, b in zip(self.coefficients, o.coefficients)], self.order)

    __radd__ = __add__

    def __neg__(self):
        return RationalSeries([-a for a in self.coefficients], self.order)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, RationalSeries):
            c = Fraction(other)
            return RationalSeries([a * c for a in self.coefficients], self.order)
        o = self._coerce(other)
        n = self.order
        a, b = self.coefficients, o.coefficients
        out = [Fraction(0)] * (n + 1)
        for i in range(n + 1):
            if a[i]:
                ai = a[i]
                for j in range(n + 1 - i):
                    if b[j]:
                        out[i + j] += ai * b[j]
        return RationalSeries(out, n)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, RationalSeries):
            return self * (1 / Fraction(other))
        return self * self._coerce(other).reciprocal()

    def __pow__(self, k: int):
        if k < 0:
            return self.reciprocal() ** (-k)
        result = RationalSeries.constant(1, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def reciprocal(self) -> "RationalSeries":
        a = self.coefficients
        if a[0] == 0:
            raise ZeroDivisionError("reciprocal needs a nonzero constant term")
        inv0 = 1 / a[0]
        b = [inv0]
        for n in range(1, self.order + 1):
            s = sum((a[k] * b[n - k] for k in range(1, n + 1)), Fraction(0))
            b.append(-s * inv0)
        return RationalSeries(b, self.order)

    def derivative(self) -> "RationalSeries":
        """Derivative; the top coefficient is lost, so the result has order - 1."""
        cs = [n * self.coefficients[n] for n in range(1, self.order + 1)]
        return RationalSeries(cs or [0], max(self.order - 1, 0))

    def integral(self, constant=0) -> "RationalSeries":
        """Antiderivative truncated back to the same order."""
        cs = [Fraction(constant)] + [self.coefficients[n] / (n + 1) for n in range(self.order)]
        return RationalSeries(cs, self.order)

    def compose(self, inner: "RationalSeries") -> "RationalSeries":
        """self(inner(x)); the inner series must have zero constant term."""
        inner = self._coerce(inner)
        if inner[0] != 0:
            raise ValueError("compose needs an inner series with zero constant term")
        result = RationalSeries.constant(self.coefficients[-1], self.order)
        for c in reversed(self.coefficients[:-1]):
            result = result * inner + c
        return result

    def __call__(self, inner: "RationalSeries") -> "RationalSeries":
        return self.compose(inner)

    def log(self) -> "RationalSeries":
        """log of a series with constant term 1."""
        if self.coefficients[0] != 1:
            raise ValueError("log needs constant term 1 to stay rational")
        a = self.coefficients
        # b' = a'/a solved term by term: n b_n = n a_n - sum_{k=1}^{n-1} k b_k a_{n-k}
        b = [Fraction(0)] * (self.order + 1)
        for n in range(1, self.order + 1):
            s = n * a[n] - sum((k * b[k] * a[n - k] for k in range(1, n)), Fraction(0))
            b[n] = s / n
        return RationalSeries(b, self.order)

    def exp(self) -> "RationalSeries":
        """exp of a series with zero constant term."""
        if self.coefficients[0] != 0:
            raise ValueError("exp needs zero constant term to stay rational")
        a = self.coefficients
        b = [Fraction(1)] + [Fraction(0)] * self.order
        for n in range(1, self.order + 1):
            b[n] = sum((k * a[k] * b[n - k] for k in range(1, n + 1)), Fraction(0)) / n
        return RationalSeries(b, self.order)

    def egf_coefficients(self) -> list[Fraction]:
        """n! c_n for n = 0..order (exponential generating function read-out)."""
        return [math.factorial(n) * c for n, c in enumerate(self.coefficients)]

    def evaluate(self, x: float) -> float:
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * x + float(c)
        return acc


def exp_series(order: int, scale=1) -> RationalSeries:
    """exp(scale * x) truncated at ``order``."""
    s = Fraction(scale)
    return RationalSeries([s**n / math.factorial(n) for n in range(order + 1)], order)


def from_coefficients(cs: Sequence, order: int) -> RationalSeries:
    return RationalSeries(cs, order)
