"""Special functions evaluated from their series or integral definitions.

Each evaluator returns a :class:`SpecialValue` carrying an absolute error
bound; asking for a tolerance the method cannot reach raises
:class:`ToleranceError`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

EULER_GAMMA = 0.57721566490153286061
SERIES_SWITCH = 1e-3  # below this the integrand (1 - e^-u)/u is evaluated from its Taylor series


class ToleranceError(ArithmeticError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved bound {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class SpecialValue:
    value: float
    abs_error_bound: float

    def __float__(self):
        return self.value


def adaptive_simpson(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, max_depth: int = 50
) -> tuple[float, float]:
    """Integrate ``f`` on [a, b]; returns (value, error estimate)."""
    if a == b:
        return 0.0, 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4 * fm + fb) / 6
    total, err = 0.0, 0.0
    # explicit stack keeps deep refinements off the Python call stack
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) * (flo + 4 * flm + fmid) / 6
        right = (hi - mid) * (fmid + 4 * frm + fhi) / 6
        delta = left + right - s
        if abs(delta) <= 15 * eps or depth >= max_depth:
            total += left + right + delta / 15
            err += abs(delta) / 15
        else:
            stack.append((lo, mid, flo, flm, fmid, left, eps / 2, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, eps / 2, depth + 1))
    return total, err


def bessel_j(nu: float, x: float, tol: float = 1e-12) -> SpecialValue:
    """J_nu(x) for x >= 0 from the ascending series sum (-1)^m (x/2)^(2m+nu) / (m! Gamma(m+nu+1))."""
    if x < 0:
        raise ValueError("bessel_j needs x >= 0")
    if x == 0:
        if nu == 0:
            return SpecialValue(1.0, 0.0)
        if nu > 0 or float(nu).is_integer():
            return SpecialValue(0.0, 0.0)
        raise ValueError("J_nu(0) diverges for negative non-integer nu")
    half = 0.5 * x
    q = -half * half
    # start from the first m with m + nu + 1 > 0 (earlier terms vanish for integer nu)
    m0 = 0
    if nu < 0 and float(nu).is_integer():
        m0 = int(-nu)
    term = half ** (2 * m0 + nu) * (-1) ** m0 / (math.factorial(m0) * math.gamma(m0 + nu + 1))
    total = 0.0
    abs_sum = 0.0
    m = m0
    while True:
        total += term
        abs_sum += abs(term)
        nxt = term * q / ((m + 1) * (m + 1 + nu))
        # terms alternate and shrink once m + 1 > half; the first omitted term bounds the tail
        if m + 1 > half and abs(nxt) < 1e-17 * max(abs_sum, 1e-300):
            tail = abs(nxt)
            break
        term = nxt
        m += 1
        if m > 10_000:
            raise ToleranceError("Bessel series did not converge", abs(term))
    bound = tail + 8 * 2.3e-16 * abs_sum
    if bound > max(tol, tol * abs(total)):
        raise ToleranceError(f"J_{nu}({x}) tolerance {tol} not met", bound)
    return SpecialValue(total, bound)


def erfi(z: float, tol: float = 1e-13) -> SpecialValue:
    """Imaginary error function (2/sqrt(pi)) sum z^(2n+1) / (n! (2n+1)), z >= 0."""
    if z < 0:
        raise ValueError("erfi needs z >= 0")
    if z == 0:
        return SpecialValue(0.0, 0.0)
    z2 = z * z
    power = z  # z^(2n+1) / n!
    total = 0.0
    n = 0
    while True:
        term = power / (2 * n + 1)
        total += term
        n += 1
        power *= z2 / n
        if n > 2 * z2 and power / (2 * n + 1) <= 1e-17 * total:
            break
    value = 2.0 / math.sqrt(math.pi) * total
    # positive terms: rounding only, plus the geometric tail from the first omitted term
    bound = value * (4e-16 * math.sqrt(n)) + 2.0 / math.sqrt(math.pi) * power / (2 * n + 1) * 2
    if bound > max(tol, tol * value):
        raise ToleranceError(f"erfi({z}) tolerance {tol} not met", bound)
    return SpecialValue(value, bound)


def _ein_integrand(u: float) -> float:
    if u < SERIES_SWITCH:
        return 1.0 - u / 2 + u * u / 6 - u * u * u / 24
    return -math.expm1(-u) / u


EIN_LARGE = 40.0  # beyond this E_1(z) < e^-z / z is below double precision relative to ln z
_EIN_PANELS: list[tuple[float, float]] = [(0.0, 0.0)]


def _ein_at_integer(n: int) -> tuple[float, float]:
    """Ein(n) for integer n, accumulated panel by panel from 0."""
    while len(_EIN_PANELS) <= n:
        k = len(_EIN_PANELS)
        prev, prev_err = _EIN_PANELS[-1]
        val, err = adaptive_simpson(_ein_integrand, k - 1.0, float(k), tol=1e-13)
        _EIN_PANELS.append((prev + val, prev_err + err))
    return _EIN_PANELS[n]


def ein(z: float, tol: float = 1e-10) -> SpecialValue:
    """Ein(z) = integral_0^z (1 - e^-u)/u du.

    Quadrature below ``EIN_LARGE``; above it Ein(z) = ln z + gamma + E_1(z) with
    0 < E_1(z) < e^-z / z, so the logarithm alone is exact to rounding.
    """
    if z < 0:
        raise ValueError("ein needs z >= 0")
    if z >= EIN_LARGE:
        value = math.log(z) + EULER_GAMMA
        return SpecialValue(value, math.exp(-z) / z + 4e-16 * value)
    n = int(math.floor(z))
    base, base_err = _ein_at_integer(n)
    rest, rest_err = adaptive_simpson(_ein_integrand, float(n), z, tol=1e-13)
    value, bound = base + rest, base_err + rest_err + 1e-15 * (n + 1)
    if bound > tol:
        raise ToleranceError(f"Ein({z}) tolerance {tol} not met", bound)
    return SpecialValue(value, bound)


def script_E(t: float, tol: float = 1e-10) -> SpecialValue:
    """exp[-2 * integral_0^{2t} (1 - e^-u)/u du]: uncovered fraction of the line in model B."""
    if t < 0:
        raise ValueError("script_E needs t >= 0")
    e = ein(2 * t)
    value = math.exp(-2 * e.value)
    bound = value * 2 * e.abs_error_bound * 1.0000001
    if bound > tol:
        raise ToleranceError(f"script_E({t}) tolerance {tol} not met", bound)
    return SpecialValue(value, bound)


def script_E_tail_constant() -> float:
    """C = 1/(4 e^(2 gamma)), the amplitude of script_E(t) ~ C / t^2."""
    return 1.0 / (4.0 * math.exp(2 * EULER_GAMMA))


def Pi_p(p: int, t: float) -> SpecialValue:
    """2 sum_{q=1}^{p-1} (-1)^q C(p-1, q) (1 - e^-t)^q / q."""
    if p < 1:
        raise ValueError("Pi_p needs p >= 1")
    s = -math.expm1(-t)
    total = 0.0
    abs_sum = 0.0
    for q in range(1, p):
        term = (-1) ** q * math.comb(p - 1, q) * s**q / q
        total += term
        abs_sum += abs(term)
    return SpecialValue(2 * total, 2 * abs_sum * 4e-16 * p)
