"""Exact combinatorics of covering an interval by l-mers.

Everything here is exact rational arithmetic.  The distribution of the
number of deposits ``N`` at congestion comes from the splitting recurrence

    G_L(z) = z/(L+l-1) * sum_{k=1}^{L+l-1} G_{k-l}(z) G_{L-k}(z),
    G_j = 1 for j <= 0,

which holds because the first deposit splits the interval into two parts
that are subsequently filled independently.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

ORACLE_MAX_POSITIONS = 14


def _check(L: int, ell: int, L_min: int = 1) -> None:
    if ell < 2:
        raise ValueError("ell must be >= 2")
    if L < L_min:
        raise ValueError(f"L must be >= {L_min}")


@dataclass(frozen=True)
class RationalPoly:
    """Polynomial in z = e^lambda with exact rational coefficients; index = power."""

    coefficients: tuple[Fraction, ...]

    def __getitem__(self, n: int) -> Fraction:
        if 0 <= n < len(self.coefficients):
            return self.coefficients[n]
        return Fraction(0)

    def __len__(self):
        return len(self.coefficients)

    @property
    def degree(self) -> int:
        for n in range(len(self.coefficients) - 1, -1, -1):
            if self.coefficients[n]:
                return n
        return 0

    def support(self) -> list[int]:
        return [n for n, c in enumerate(self.coefficients) if c]

    def total(self) -> Fraction:
        return sum(self.coefficients, Fraction(0))

    def mean(self) -> Fraction:
        return sum((n * c for n, c in enumerate(self.coefficients)), Fraction(0))

    def moment(self, r: int) -> Fraction:
        return sum((n**r * c for n, c in enumerate(self.coefficients)), Fraction(0))

    def cumulants(self, order: int) -> list[Fraction]:
        """Cumulants kappa_1..kappa_order from the raw moments."""
        mu = [Fraction(1)] + [self.moment(r) for r in range(1, order + 1)]
        kappa = [Fraction(0)] * (order + 1)
        for n in range(1, order + 1):
            kappa[n] = mu[n] - sum(
                (math.comb(n - 1, m - 1) * kappa[m] * mu[n - m] for m in range(1, n)), Fraction(0)
            )
        return kappa[1:]

    def as_dict(self) -> dict[int, Fraction]:
        return {n: c for n, c in enumerate(self.coefficients) if c}


@dataclass(frozen=True)
class OracleResult:
    distribution: dict[int, Fraction]
    p_left: Fraction
    q_both: Fraction
    distinct_configs: int


def mean_deposits(L: int, ell: int) -> Fraction:
    """<N> = (2L + l - 1)/(l + 1) for an interval of L sites."""
    _check(L, ell)
    return Fraction(2 * L + ell - 1, ell + 1)


# Scaled integer polynomials: H_L = f(L) G_L with f(L) = (L+l-1)!/(l-1)! for L >= 1
# and f(L) = 1 otherwise.  f(a) f(b) divides f(L-1) whenever a + b = L - l, so the
# recurrence stays in the integers.


class _ScaledTable:
    def __init__(self, ell: int):
        self.ell = ell
        self.lock = threading.Lock()
        # H[j] for j = 0..; negative indices handled by _h
        self.H: list[list[int]] = [[1]]
        self.f: list[int] = [1]

    def _scale(self, j: int) -> int:
        return 1 if j <= 0 else self.f[j]

    def _h(self, j: int) -> list[int]:
        return [1] if j <= 0 else self.H[j]

    def extend(self, L: int) -> None:
        with self.lock:
            ell = self.ell
            while len(self.H) <= L:
                n = len(self.H)
                self.f.append(self.f[-1] * (n + ell - 1))
                f_prev = self.f[n - 1]
                acc = [0] * (n + 1)
                m = n + ell - 1
                for k in range(1, m + 1):
                    a, b = k - ell, n - k
                    k_mirror = m + 1 - k
                    if k_mirror < k:
                        break
                    weight = f_prev // (self._scale(a) * self._scale(b))
                    if k_mirror != k:
                        weight *= 2
                    ha, hb = self._h(a), self._h(b)
                    for i, x in enumerate(ha):
                        if x:
                            wx = weight * x
                            for j, y in enumerate(hb):
                                if y:
                                    acc[i + j + 1] += wx * y
                self.H.append(acc)

    def poly(self, L: int) -> RationalPoly:
        self.extend(L)
        if L <= 0:
            return RationalPoly((Fraction(1),))
        scale = self.f[L]
        return RationalPoly(tuple(Fraction(h, scale) for h in self.H[L]))


@lru_cache(maxsize=None)
def _table(ell: int) -> _ScaledTable:
    return _ScaledTable(ell)


def count_distribution(L: int, ell: int) -> RationalPoly:
    """Exact distribution of N at congestion as a polynomial sum_N P(N, L) z^N."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    if L < 0:
        raise ValueError("L must be >= 0")
    return _table(ell).poly(L)


def _footprint_mask(k: int, L: int, ell: int) -> int:
    lo, hi = max(1, k - ell + 1), min(k, L)
    return ((1 << (hi - lo + 1)) - 1) << (lo - 1)


def enumerate_oracle(L: int, ell: int, max_positions: int = ORACLE_MAX_POSITIONS) -> OracleResult:
    """Brute-force the covering tree of an interval, weighting each branch by 1/|acceptable|.

    States are sets of deposited positions (a bitmask); probability mass is
    pushed forward layer by layer, one deposit per layer.
    """
    _check(L, ell)
    n_pos = L + ell - 1
    if n_pos > max_positions:
        raise ValueError(f"oracle size limit exceeded: {n_pos} positions > {max_positions}")
    full = (1 << L) - 1
    masks = [_footprint_mask(k, L, ell) for k in range(1, n_pos + 1)]
    layer: dict[int, Fraction] = {0: Fraction(1)}
    cover_of: dict[int, int] = {0: 0}
    finals: dict[int, Fraction] = {}
    while layer:
        nxt: dict[int, Fraction] = {}
        for state, prob in layer.items():
            cov = cover_of[state]
            if cov == full:
                finals[state] = finals.get(state, Fraction(0)) + prob
                continue
            acc = [i for i in range(n_pos) if masks[i] & ~cov]
            share = prob / len(acc)
            for i in acc:
                child = state | (1 << i)
                if child not in cover_of:
                    cover_of[child] = cov | masks[i]
                nxt[child] = nxt.get(child, Fraction(0)) + share
        layer = nxt
    dist: dict[int, Fraction] = {}
    left_ok = right_ok = both_ok = Fraction(0)
    low = (1 << (ell - 1)) - 1  # positions 1..l-1 overhang on the left
    high = ((1 << n_pos) - 1) & ~((1 << L) - 1)  # positions L+1..L+l-1 overhang on the right
    for state, prob in finals.items():
        n = bin(state).count("1")
        dist[n] = dist.get(n, Fraction(0)) + prob
        if not state & low:
            left_ok += prob
            if not state & high:
                both_ok += prob
    return OracleResult(
        distribution=dict(sorted(dist.items())),
        p_left=left_ok,
        q_both=both_ok,
        distinct_configs=len(finals),
    )


def overhang_probs(L: int) -> tuple[Fraction, Fraction]:
    """(p_L, q_L) for dimers: no left overhang, and no overhang at either end."""
    _check(L, 2)
    p = [Fraction(0)] * (L + 1)
    for n in range(1, L + 1):
        p[n] = (1 + sum((p[k - 1] for k in range(2, n + 1)), Fraction(0))) / (n + 1)
    if L == 1:
        q = Fraction(0)  # the single dimer always overhangs
    elif L == 2:
        q = Fraction(1, 3)  # only the centred first dimer avoids both overhangs
    else:
        q = (2 * p[L - 2] + sum((p[k - 1] * p[L - k - 1] for k in range(2, L - 1)), Fraction(0))) / (L + 1)
    return p[L], q


def config_count(L: int) -> int:
    """Number of distinct congested position-sets for dimers: C_L = C_{L-1} + C_{L-2}."""
    _check(L, 2)
    a, b = 2, 4
    if L == 1:
        return a
    for _ in range(L - 2):
        a, b = b, a + b
    return b


def fibonacci(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def ring_mean(L: int, ell: int = 2) -> Fraction:
    """Mean number of deposits to congest a ring: one deposit, then an interval of L-l sites."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    if L < ell + 1:
        raise ValueError(f"ring_mean needs L >= {ell + 1}")
    return 1 + mean_deposits(L - ell, ell)


def min_cover_probs(ell: int, n_max: int) -> list[Fraction]:
    """m_0..m_{n_max}: probability that an interval of n*l sites is covered by exactly n l-mers."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    m = [Fraction(1)]
    for n in range(1, n_max + 1):
        s = sum((m[k] * m[n - k - 1] for k in range(n)), Fraction(0))
        m.append(s / (ell * n + ell - 1))
    return m


def max_cover_prob(L: int, ell: int) -> Fraction:
    """M_L = 2^(L-1) l! / (L+l-1)!: every deposit covers exactly one new site.

    While n >= 2 sites remain uncovered only the two edge positions out of
    n + l - 1 acceptable ones qualify; the last site is covered by any of its
    l positions.  For dimers this is 2^L / (L+1)!.
    """
    _check(L, ell)
    return Fraction(2 ** (L - 1) * math.factorial(ell), math.factorial(L + ell - 1))


def extremal_probs(L: int, ell: int) -> tuple[Fraction, Fraction]:
    """(m_n, M_L) for an interval of L = n*l sites."""
    _check(L, ell)
    if L % ell:
        raise ValueError(f"L={L} is not a multiple of ell={ell}")
    return min_cover_probs(ell, L // ell)[-1], max_cover_prob(L, ell)


def support_bounds(L: int, ell: int) -> tuple[int, int]:
    return (L + ell - 1) // ell, L


def fraction_str(x: Fraction | int) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def fractions_to_json(xs: Iterable[Fraction]) -> list[str]:
    return [fraction_str(x) for x in xs]
