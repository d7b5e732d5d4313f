"""Full counting statistics of dimer coverings and extremal tail exponents.

For dimers the pole of the generating function sits at

    y(lambda) = e^{-lambda} * arctan(sqrt(w)) / sqrt(w),   w = e^{-lambda} - 1,

and U(lambda) = -ln y(lambda) is the scaled cumulant generating function of N.
arctan(sqrt(w))/sqrt(w) = sum_n (-1)^n w^n / (2n+1) is a power series in w, so
the cumulants come out of exact rational series arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .exact import min_cover_probs
from .series import RationalSeries, exp_series
from .special import bessel_j

CUMULANT_ORDER_LIMIT = 24
J0_FIRST_ZERO = 2.40482555769577


def _pole_series(order: int) -> RationalSeries:
    """y(lambda) as a rational series in lambda."""
    w = exp_series(order, scale=-1) - 1
    f = RationalSeries([Fraction((-1) ** n, 2 * n + 1) for n in range(order + 1)], order)
    return exp_series(order, scale=-1) * f.compose(w)


def cumulant_series(order: int) -> list[Fraction]:
    """U_1..U_order with <N^n>_c / L -> U_n for dimer coverings of a long interval."""
    if not 1 <= order <= CUMULANT_ORDER_LIMIT:
        raise ValueError(f"order must be in 1..{CUMULANT_ORDER_LIMIT}")
    U = -_pole_series(order).log()
    return U.egf_coefficients()[1:]


def fano_factors(order: int) -> list[Fraction]:
    """<N^n>_c / <N> for n = 2..order."""
    U = cumulant_series(order)
    return [u / U[0] for u in U[1:]]


def mandel_q() -> Fraction:
    U = cumulant_series(2)
    return U[1] / U[0] - 1


def cumulant_gen(lam: float) -> float:
    """U(lambda) = -ln y(lambda) for real lambda, evaluated without complex arithmetic."""
    lam = float(lam)
    if math.isnan(lam):
        raise ValueError("lambda is NaN")
    if abs(lam) < 1e-4:
        # U_1 lam + U_2 lam^2/2 + U_3 lam^3/6 + U_4 lam^4/24; the next term is below 1e-22
        return lam * (2 / 3 + lam * (1 / 45 + lam * (1 / 2835 - lam * 11 / 56700)))
    if lam < 0:
        # w = e^{-lam} - 1 > 0; ln w = -lam + ln(1 - e^{lam})
        log_w = -lam + math.log1p(-math.exp(lam))
        sqrt_w_inv = math.exp(-0.5 * log_w)
        if sqrt_w_inv < 1.0:
            atan = math.pi / 2 - math.atan(sqrt_w_inv)
        else:
            atan = math.atan(1.0 / sqrt_w_inv)
        log_ratio = math.log(atan) - 0.5 * log_w
    else:
        # w in (-1, 0): arctan(i v)/(i v) = artanh(v)/v with v = sqrt(1 - e^{-lam})
        v = math.sqrt(-math.expm1(-lam))
        if v < 1e-8:
            log_ratio = math.log1p(v * v / 3)
        else:
            # artanh(v) = (lam + 2 ln(1+v)) / 2 since 1 - v^2 = e^{-lam}
            artanh = 0.5 * (lam + 2.0 * math.log1p(v))
            log_ratio = math.log(artanh) - math.log(v)
    return lam - log_ratio


def min_cover_series(ell: int, n_max: int) -> list[Fraction]:
    """m_0..m_{n_max}; for dimers the values are checked against tan(sqrt x)/sqrt x."""
    m = min_cover_probs(ell, n_max)
    if ell == 2 and n_max >= 1:
        ref = tan_sqrt_series(n_max)
        if list(ref.coefficients) != m:
            raise ArithmeticError("dimer minimal-cover recurrence disagrees with tan(sqrt x)/sqrt x")
    return m


def tan_sqrt_series(order: int) -> RationalSeries:
    """tan(sqrt x)/sqrt x = [sin(sqrt x)/sqrt x] / cos(sqrt x) as a series in x."""
    sin_part = RationalSeries([Fraction((-1) ** n, math.factorial(2 * n + 1)) for n in range(order + 1)], order)
    cos_part = RationalSeries([Fraction((-1) ** n, math.factorial(2 * n)) for n in range(order + 1)], order)
    return sin_part / cos_part


def _first_zero(nu: float, x_max: float = 6.0, step: float = 0.1, xtol: float = 1e-12) -> float:
    x_prev = step
    f_prev = bessel_j(nu, x_prev).value
    x = x_prev
    while x < x_max + 1e-12:
        x = x_prev + step
        f = bessel_j(nu, x).value
        if f == 0.0:
            return x
        if (f > 0) != (f_prev > 0):
            break
        x_prev, f_prev = x, f
    else:
        raise ArithmeticError(f"no sign change of J_{nu} in (0, {x_max}]")
    lo, hi, f_lo = x_prev, x, f_prev
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        f_mid = bessel_j(nu, mid).value
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pole_location(ell: float) -> float:
    """y(l): radius of convergence of the minimal-cover generating function."""
    if ell < 2:
        raise ValueError("ell must be >= 2")
    z1 = _first_zero(-1.0 / ell)
    return (ell * z1 / 2) ** 2 / (ell - 1)


def u_of_ell(ell: float) -> float:
    """u(l) = y(l)^(1/l): P(N_min, L) decays as u^-L."""
    return pole_location(ell) ** (1.0 / ell)


def u_large_ell(ell: float) -> float:
    """Large-l form [a_1 l / (2 sqrt(l-1))]^(2/l) with a_1 the first zero of J_0."""
    return (J0_FIRST_ZERO / 2 * ell / math.sqrt(ell - 1)) ** (2.0 / ell)


def dimer_min_cover_asymptotic(n: int) -> float:
    """2 (2/pi)^(2n+2), the large-n form of m_n for dimers."""
    return 2.0 * (2.0 / math.pi) ** (2 * n + 2)


def finite_cumulants(L: int, ell: int, order: int) -> list[Fraction]:
    """Exact cumulants kappa_1..kappa_order of N for a finite interval.

    Runs the splitting recurrence on truncated series in lambda instead of on
    full polynomials, so long intervals stay cheap.
    """
    if L < 1 or ell < 2 or order < 1:
        raise ValueError("need L >= 1, ell >= 2, order >= 1")
    one = RationalSeries.constant(1, order)
    e_lam = exp_series(order)
    F: list[RationalSeries] = [one]
    for n in range(1, L + 1):
        m = n + ell - 1
        acc = RationalSeries.constant(0, order)
        for k in range(1, m + 1):
            k_mirror = m + 1 - k
            if k_mirror < k:
                break
            a, b = k - ell, n - k
            term = (F[a] if a > 0 else one) * (F[b] if b > 0 else one)
            acc = acc + (term * 2 if k_mirror != k else term)
        F.append(e_lam * acc / m)
    return F[L].log().egf_coefficients()[1:]
