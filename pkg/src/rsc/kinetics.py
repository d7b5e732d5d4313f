"""Continuous-time covering of the one-dimensional lattice, with analytic reference curves.

A ring of L sites stands in for Z.  Every candidate position attempts at rate
1; rejected attempts change nothing, so the simulation only tracks acceptable
positions: the waiting time is exponential with rate |acceptable| and the
accepted position is uniform among them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from numba import njit

from .cover import CENTRAL, RING, ProcessSpec
from .mc import kernel_seed, mean_se, run_trials
from .special import Pi_p, adaptive_simpson, erfi

MIN_RING = 1000
DEFAULT_M_MAX = 10


def default_t_grid() -> np.ndarray:
    return np.geomspace(0.01, 10.0, 31)


class NoClosedForm(LookupError):
    """No closed form is available for the requested (l, model, observable)."""


# ----------------------------------------------------------------------------
# simulation kernel


@njit(cache=True, nogil=True)
def _accepts(cov, L, ell, half, model_b, central, p):
    if model_b and central:
        # central site p - (l-1)//2 for odd l; sites p - l//2 and p - l//2 + 1 for even l
        c = p - half if ell % 2 == 0 else p - (ell - 1) // 2
        if c < 0:
            c += L
        if cov[c] == 0:
            return True
        if ell % 2 == 0:
            c += 1
            if c >= L:
                c -= L
            return cov[c] == 0
        return False
    covered = 0
    s = p
    for _ in range(ell):
        if cov[s] > 0:
            covered += 1
        s -= 1
        if s < 0:
            s += L
    if model_b:
        return covered <= half
    return covered < ell


@njit(cache=True, nogil=True)
def _sample(cov, hist, L, m_max, pi_row, E_row, V_row):
    for k in range(hist.size):
        pi_row[k] = hist[k] / L
    start = -1
    for i in range(L):
        if cov[i] > 0:
            start = i
            break
    if start < 0:
        for m in range(m_max):
            E_row[m] = 1.0
            V_row[m] = 0.0
        return
    for m in range(m_max):
        E_row[m] = 0.0
        V_row[m] = 0.0
    run = 0
    for step in range(1, L + 1):
        i = start + step
        if i >= L:
            i -= L
        if cov[i] == 0:
            run += 1
        elif run > 0:
            top = run if run < m_max else m_max
            for m in range(1, top + 1):
                E_row[m - 1] += run - m + 1
            if run <= m_max:
                V_row[run - 1] += 1.0
            run = 0
    for m in range(m_max):
        E_row[m] /= L
        V_row[m] /= L


@njit(cache=True, nogil=True)
def _lattice_trial(L, ell, model_b, central, t_grid, m_max, seed):
    np.random.seed(seed)
    nt = t_grid.size
    pi = np.zeros((nt, ell + 1))
    E = np.zeros((nt, m_max))
    V = np.zeros((nt, m_max))
    cov = np.zeros(L, np.int32)
    hist = np.zeros(ell + 1, np.int64)
    hist[0] = L
    acc = np.arange(L)
    where = np.arange(L)
    n_acc = L
    half = ell // 2
    t = 0.0
    g = 0
    n_dep = 0
    max_mult = 0
    jam_time = np.inf
    while True:
        if n_acc == 0:
            jam_time = t
            while g < nt:
                _sample(cov, hist, L, m_max, pi[g], E[g], V[g])
                g += 1
            break
        t_next = t + np.random.exponential(1.0 / n_acc)
        while g < nt and t_grid[g] < t_next:
            _sample(cov, hist, L, m_max, pi[g], E[g], V[g])
            g += 1
        if g == nt:
            break
        t = t_next
        k = acc[np.random.randint(0, n_acc)]
        s = k
        for _ in range(ell):
            c = cov[s]
            hist[c] -= 1
            cov[s] = c + 1
            hist[c + 1] += 1
            if c + 1 > max_mult:
                max_mult = c + 1
            s -= 1
            if s < 0:
                s += L
        n_dep += 1
        for d in range(-(ell - 1), ell):
            p = k + d
            if p < 0:
                p += L
            elif p >= L:
                p -= L
            ok = _accepts(cov, L, ell, half, model_b, central, p)
            if ok and where[p] < 0:
                acc[n_acc] = p
                where[p] = n_acc
                n_acc += 1
            elif not ok and where[p] >= 0:
                i = where[p]
                last = acc[n_acc - 1]
                acc[i] = last
                where[last] = i
                where[p] = -1
                n_acc -= 1
    return pi, E, V, jam_time, n_dep, max_mult


# ----------------------------------------------------------------------------
# runs and aggregation


@dataclass
class KineticsRun:
    spec: ProcessSpec
    t_grid: np.ndarray
    n_trials: int
    seed: int
    pi_trials: np.ndarray  # (trials, times, l+1)
    E_trials: np.ndarray  # (trials, times, m_max), column m-1 holds E_m
    V_trials: np.ndarray
    jam_times: np.ndarray
    n_deposits: np.ndarray
    max_multiplicity: int
    conjectural: tuple[str, ...] = field(default=())

    @cached_property
    def M_trials(self) -> np.ndarray:
        k = np.arange(self.pi_trials.shape[-1])
        return (self.pi_trials[..., 1:] * (k[1:] - 1)).sum(axis=-1)

    def _agg(self, arr):
        return mean_se(arr, axis=0)

    @property
    def pi_mean(self):
        return self._agg(self.pi_trials)[0]

    @property
    def pi_se(self):
        return self._agg(self.pi_trials)[1]

    @property
    def E_mean(self):
        return self._agg(self.E_trials)[0]

    @property
    def E_se(self):
        return self._agg(self.E_trials)[1]

    @property
    def V_mean(self):
        return self._agg(self.V_trials)[0]

    @property
    def V_se(self):
        return self._agg(self.V_trials)[1]

    @property
    def M_mean(self):
        return self._agg(self.M_trials)[0]

    @property
    def M_se(self):
        return self._agg(self.M_trials)[1]

    def time_index(self, t: float) -> int:
        idx = np.flatnonzero(np.isclose(self.t_grid, t, rtol=1e-12, atol=0.0) | (self.t_grid == t))
        if idx.size == 0:
            raise KeyError(f"t={t} is not on the sampling grid")
        return int(idx[0])


def _lattice_spec(spec: ProcessSpec) -> None:
    if spec.substrate != RING:
        raise ValueError("kinetics runs on a ring")
    if spec.L < MIN_RING:
        raise ValueError(f"kinetics needs a ring with L >= {MIN_RING}")


def simulate_kinetics(
    spec: ProcessSpec,
    t_grid=None,
    n_trials: int = 20,
    seed: int = 0,
    m_max: int = DEFAULT_M_MAX,
    jobs: int | None = 1,
) -> KineticsRun:
    """Average observables over independent trials; ``inf`` in ``t_grid`` samples the jammed state."""
    _lattice_spec(spec)
    grid = default_t_grid() if t_grid is None else np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or np.any(grid < 0):
        raise ValueError("t_grid must be non-negative and strictly increasing")
    model_b = spec.model == "B"
    central = spec.b_rule == CENTRAL

    def one(i):
        return _lattice_trial(spec.L, spec.ell, model_b, central, grid, m_max, kernel_seed(seed, i))

    out = run_trials(one, n_trials, jobs)
    conj = ("pi_1", "pi_2", "pi_3") if (spec.ell == 3 and spec.model == "A") else ()
    return KineticsRun(
        spec=spec,
        t_grid=grid,
        n_trials=n_trials,
        seed=seed,
        pi_trials=np.stack([o[0] for o in out]),
        E_trials=np.stack([o[1] for o in out]),
        V_trials=np.stack([o[2] for o in out]),
        jam_times=np.array([o[3] for o in out]),
        n_deposits=np.array([o[4] for o in out]),
        max_multiplicity=int(max(o[5] for o in out)),
        conjectural=conj,
    )


# ----------------------------------------------------------------------------
# analytic references


@dataclass(frozen=True)
class PiReference:
    ell: int
    model: str
    t: float
    pi0: float
    covered: float  # sum_{k>=1} pi_k
    M: float | None
    pi: tuple[float, ...] | None  # pi_0..pi_kmax when known
    conjectural: tuple[str, ...] = ()

    def component(self, k: int) -> float:
        if k == 0:
            return self.pi0
        if self.pi is None or k >= len(self.pi):
            raise NoClosedForm(f"no closed form for pi_{k} with l={self.ell}, model {self.model}")
        return self.pi[k]


def _ex(x):
    return math.exp(-x) if math.isfinite(x) else 0.0


def _model_a(ell: int, t: float) -> PiReference:
    e = lambda a: _ex(a * t)  # noqa: E731
    pi0 = e(ell)
    M = (ell - 1) / (ell + 1) - (ell - 1) * e(ell) + ell * (ell - 1) / (ell + 1) * e(ell + 1)
    pi = None
    conj: tuple[str, ...] = ()
    if ell == 2:
        pi = (pi0, 2 / 3 - 2 / 3 * e(3), 1 / 3 - e(2) + 2 / 3 * e(3))
    elif ell == 3:
        pi = (
            pi0,
            2 / 3 - e(2) + 7 / 3 * e(3) - 2 * e(4),
            1 / 6 + 2 * e(2) - 14 / 3 * e(3) + 5 / 2 * e(4),
            1 / 6 - e(2) + 4 / 3 * e(3) - 1 / 2 * e(4),
        )
        conj = ("pi_1", "pi_2", "pi_3")
    return PiReference(ell, "A", t, pi0, 1 - pi0, M, pi, conj)


def _b_phi_exponent_odd(ell: int, t: float) -> float:
    s = _ex(t)
    if ell == 3:
        return 2 * s - 2
    if ell == 5:
        return s * s + 2 * s - 3
    raise NoClosedForm(f"no closed form for odd l={ell} in model B")


def _model_b_even_pi2(p: int, t: float) -> float:
    """Integrate the double-coverage rate for l = 2p voids V_k = Phi e^{-(k+1)t}."""

    def rate(u):
        s = math.exp(-u)
        one_minus = -math.expm1(-u)
        phi = one_minus**2 * math.exp(Pi_p(p, u).value)
        total = 0.0
        for k in range(1, p - 1):
            total += (k + 1) * (2 * p - k) * phi * s ** (k + 1)
        # sum_{k >= p-1} e^{-(k+1)u} = e^{-pu}/(1 - e^{-u}); Phi/(1-e^{-u}) stays finite at u=0
        total += p * (p + 1) * one_minus * math.exp(Pi_p(p, u).value) * s**p
        return total

    upper = t if math.isfinite(t) else 80.0
    # unit panels so the first Simpson estimate cannot miss the early peak
    edges = [float(x) for x in range(int(upper) + 1)] + ([upper] if upper % 1 else [])
    return sum(adaptive_simpson(rate, a, b, tol=1e-13)[0] for a, b in zip(edges, edges[1:]))


def _model_b(ell: int, t: float, general_even: bool = False) -> PiReference:
    s = _ex(t)
    if ell == 2:
        ref = _model_a(2, t)
        return PiReference(2, "B", t, ref.pi0, ref.covered, ref.M, ref.pi)
    if ell % 2 == 0 and (general_even or ell != 4):
        p = ell // 2
        pi0 = s * s * math.exp(Pi_p(p, t).value)
        pi2 = _model_b_even_pi2(p, t)
    elif ell == 4:
        g = math.exp(2 * s - 2)
        pi0 = s * s * g
        pi2 = 3 * (1 - s) ** 2 * g
    elif ell == 3:
        g = math.exp(2 * s - 2)
        pi0 = s * g
        pi2 = (1 - (3 - 2 * s) * g) / 2
    elif ell == 5:
        g = math.exp(s * s + 2 * s - 3)
        pi0 = s * g
        pi2 = -1 + s * g + 5 * math.sqrt(math.pi) / (2 * math.e**4) * (erfi(2.0).value - erfi(1 + s).value)
    else:
        raise NoClosedForm(f"no closed form for l={ell} in model B")
    pi1 = 1 - pi0 - pi2
    return PiReference(ell, "B", t, pi0, 1 - pi0, pi2, (pi0, pi1, pi2))


def analytic_pi(ell: int, model: str, t: float, general_even: bool = False) -> PiReference:
    """Closed-form coverage fractions on Z at time ``t`` (``inf`` gives the jammed state).

    ``general_even`` forces model B with even l through the generic l = 2p route.
    """
    if ell < 2:
        raise ValueError("ell must be >= 2")
    if t < 0:
        raise ValueError("t must be >= 0")
    if model == "A":
        return _model_a(ell, t)
    if model == "B":
        return _model_b(ell, t, general_even)
    raise ValueError(f"unknown model {model!r}")


def _b_log_phi_reduced(ell: int, t: float) -> float:
    """ln[Phi(t) / (1 - e^-t)^2] for model B."""
    if ell % 2 == 0:
        return Pi_p(ell // 2, t).value
    return _b_phi_exponent_odd(ell, t)


def analytic_empty_strings(ell: int, model: str, m: int, t: float) -> float:
    """E_m(t): probability that m fixed consecutive sites are empty."""
    if model == "A" or ell == 2:
        return _ex((m + ell - 1) * t)
    # model B: E_m = sum_{n>=m} (n-m+1) V_n, a geometric sum over the void ansatz
    shift = m + 1 if ell % 2 == 0 else m
    return math.exp(_b_log_phi_reduced(ell, t)) * _ex(shift * t)


def analytic_voids(ell: int, model: str, m: int, t: float) -> float:
    """V_m(t): density of maximal empty runs of exactly m sites."""
    s = _ex(t)
    if model == "A" or ell == 2:
        return _ex((m + ell - 1) * t) * (1 - s) ** 2
    return (1 - s) ** 2 * analytic_empty_strings(ell, model, m, t)


def analytic_M(ell: int, t: float) -> float:
    """Model A excess coverage sum_k (k-1) pi_k for any l."""
    return _model_a(ell, t).M


def pi1_maximum_time(ell: int, model: str = "B", lo: float = 0.05, hi: float = 6.0) -> float:
    """Location of the maximum of pi_1(t) by golden-section search."""
    f = lambda t: -analytic_pi(ell, model, t).component(1)  # noqa: E731
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    while b - a > 1e-10:
        if f(c) < f(d):
            b, d = d, c
            c = b - g * (b - a)
        else:
            a, c = c, d
            d = a + g * (b - a)
    return 0.5 * (a + b)


# ----------------------------------------------------------------------------
# small-time amplitudes


@dataclass(frozen=True)
class SmallTAmplitudes:
    window: tuple[float, float]
    amplitudes: tuple[float, ...]  # A_1..A_l
    stderr: tuple[float, ...]
    n_points: int


def small_t_check(run: KineticsRun, ell: int = 3, t_max: float = 0.05) -> SmallTAmplitudes:
    """Fit pi_k(t) = A_k t^k + B_k t^(k+1) on 0 < t <= t_max for k = 1..l."""
    if run.spec.ell != ell:
        raise ValueError(f"run has l={run.spec.ell}, expected {ell}")
    mask = (run.t_grid > 0) & (run.t_grid <= t_max)
    if mask.sum() < 3:
        raise ValueError("small-t window too coarse: need at least 3 sample times <= t_max")
    t = run.t_grid[mask]
    mean, se = run.pi_mean[mask], run.pi_se[mask]
    floor = 1.0 / (run.spec.L * math.sqrt(run.n_trials))
    A, dA = [], []
    for k in range(1, ell + 1):
        sig = np.maximum(se[:, k], floor)
        X = np.column_stack([t**k, t ** (k + 1)]) / sig[:, None]
        y = mean[:, k] / sig
        coef, *_ = np.linalg.lstsq(X, y, rcond=None)
        cov = np.linalg.inv(X.T @ X)
        A.append(float(coef[0]))
        dA.append(float(math.sqrt(cov[0, 0])))
    return SmallTAmplitudes((float(t.min()), float(t.max())), tuple(A), tuple(dA), int(mask.sum()))
