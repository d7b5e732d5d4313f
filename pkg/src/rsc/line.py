"""Covering a ring of circumference Lambda by unit sticks.

Covered runs always have length >= 1, so a stick that touches an uncovered
gap cannot reach any other gap.  The state is therefore a list of gaps, each
carrying an acceptance weight: x + 1 in model A (centres within 1/2 of the
gap) and x in model B (centres inside the gap).  A Fenwick tree over the
weights gives O(log n) sampling.  Stick centres are kept for the
multiplicity sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .mc import kernel_seed, mean_se, run_trials
from .special import adaptive_simpson, script_E, script_E_tail_constant

MIN_LAMBDA = 1000.0
K_MAX = 12
GAP_EPS = 1e-12
RECOMPUTE_EVERY = 10_000
DEFAULT_X_EDGES = np.linspace(0.0, 3.0, 16)


class LineInvariantError(AssertionError):
    pass


# ----------------------------------------------------------------------------
# Fenwick tree over float weights


@njit(cache=True, nogil=True)
def _fw_add(tree, i, delta):
    n = tree.size - 1
    i += 1
    while i <= n:
        tree[i] += delta
        i += i & (-i)


@njit(cache=True, nogil=True)
def _fw_find(tree, target):
    """Smallest slot whose prefix sum exceeds target."""
    n = tree.size - 1
    pos = 0
    step = 1
    while step * 2 <= n:
        step *= 2
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= target:
            pos = nxt
            target -= tree[nxt]
        step //= 2
    return pos


@njit(cache=True, nogil=True)
def _fw_build(tree, w):
    tree[:] = 0.0
    n = w.size
    for i in range(n):
        j = i + 1
        tree[j] += w[i]
        k = j + (j & (-j))
        if k <= n:
            tree[k] += tree[j]


# ----------------------------------------------------------------------------
# kernel


@njit(cache=True, nogil=True)
def _sweep(centres, n_sticks, Lam, k_max, out):
    """Measure of the ring covered exactly k times; k > k_max goes to out[k_max + 1]."""
    m = 0
    pos = np.empty(4 * n_sticks + 2)
    dlt = np.empty(4 * n_sticks + 2, np.int64)
    for j in range(n_sticks):
        c = centres[j]
        lo, hi = c - 0.5, c + 0.5
        if lo < 0.0:
            pos[m], dlt[m] = lo + Lam, 1
            pos[m + 1], dlt[m + 1] = Lam, -1
            pos[m + 2], dlt[m + 2] = 0.0, 1
            pos[m + 3], dlt[m + 3] = hi, -1
            m += 4
        elif hi > Lam:
            pos[m], dlt[m] = lo, 1
            pos[m + 1], dlt[m + 1] = Lam, -1
            pos[m + 2], dlt[m + 2] = 0.0, 1
            pos[m + 3], dlt[m + 3] = hi - Lam, -1
            m += 4
        else:
            pos[m], dlt[m] = lo, 1
            pos[m + 1], dlt[m + 1] = hi, -1
            m += 2
    order = np.argsort(pos[:m], kind="mergesort")
    out[:] = 0.0
    count = 0
    prev = 0.0
    top = 0
    for idx in order:
        x = pos[idx]
        b = count if count <= k_max else k_max + 1
        out[b] += x - prev
        prev = x
        count += dlt[idx]
        if count > top:
            top = count
    out[0] += Lam - prev
    for k in range(out.size):
        out[k] /= Lam
    return top


@njit(cache=True, nogil=True)
def _line_trial(Lam, model_b, t_grid, k_max, x_edges, seed):
    np.random.seed(seed)
    nt = t_grid.size
    nb = x_edges.size - 1
    pi = np.zeros((nt, k_max + 2))
    vhist = np.zeros((nt, nb))
    n_at = np.zeros(nt, np.int64)
    gap_total = np.zeros(nt)
    cap = int(Lam) + 8
    left = np.zeros(cap)
    length = np.zeros(cap)
    w = np.zeros(cap)
    tree = np.zeros(cap + 1)
    free = np.arange(cap - 1, -1, -1)
    n_free = cap
    n_gaps = 0
    centres = np.empty(max(16, int(4 * Lam)))
    n_sticks = 0
    extra = 0.0 if model_b else 1.0
    top = 0
    max_drift = 0.0

    t = np.random.exponential(1.0 / Lam)
    g = 0
    while g < nt and t_grid[g] < t:
        pi[g, 0] = 1.0
        gap_total[g] = Lam
        g += 1
    if g < nt:
        # the first stick fixes the origin of the ring coordinate
        centres[0] = 0.5
        n_sticks = 1
        n_free -= 1
        s = free[n_free]
        left[s] = 1.0
        length[s] = Lam - 1.0
        w[s] = length[s] + extra
        _fw_add(tree, s, w[s])
        n_gaps = 1
    total = Lam - 1.0 + extra
    events = 0
    while g < nt:
        if n_gaps == 0:
            jammed = True
            t_next = np.inf
        else:
            jammed = False
            t_next = t + np.random.exponential(1.0 / total)
        while g < nt and (jammed or t_grid[g] < t_next):
            mtop = _sweep(centres, n_sticks, Lam, k_max, pi[g])
            if mtop > top:
                top = mtop
            n_at[g] = n_sticks
            acc = 0.0
            for s in range(cap):
                if length[s] > 0.0:
                    acc += length[s]
                    for b in range(nb):
                        if x_edges[b] <= length[s] < x_edges[b + 1]:
                            vhist[g, b] += 1.0
                            break
            gap_total[g] = acc
            g += 1
        if jammed or g == nt:
            break
        t = t_next
        u = np.random.random() * total
        s = _fw_find(tree, u)
        if s >= cap or w[s] <= 0.0:
            # rounding pushed the target past the last positive slot
            s = cap - 1
            while w[s] <= 0.0:
                s -= 1
        a = left[s]
        x = length[s]
        d = np.random.random() * (x + extra) - 0.5 * extra
        c = a + d
        if c >= Lam:
            c -= Lam
        elif c < 0.0:
            c += Lam
        if n_sticks == centres.size:
            grown = np.empty(2 * centres.size)
            grown[:n_sticks] = centres[:n_sticks]
            centres = grown
        centres[n_sticks] = c
        n_sticks += 1
        lpiece = d - 0.5
        rpiece = x - d - 0.5
        old = w[s]
        if lpiece > GAP_EPS:
            length[s] = lpiece
            w[s] = lpiece + extra
            _fw_add(tree, s, w[s] - old)
            total += w[s] - old
        else:
            length[s] = 0.0
            w[s] = 0.0
            _fw_add(tree, s, -old)
            total -= old
            free[n_free] = s
            n_free += 1
            n_gaps -= 1
        if rpiece > GAP_EPS:
            n_free -= 1
            r = free[n_free]
            lr = a + d + 0.5
            if lr >= Lam:
                lr -= Lam
            left[r] = lr
            length[r] = rpiece
            w[r] = rpiece + extra
            _fw_add(tree, r, w[r])
            total += w[r]
            n_gaps += 1
        events += 1
        if events % RECOMPUTE_EVERY == 0:
            exact = 0.0
            for j in range(cap):
                exact += w[j]
            drift = abs(exact - total)
            if drift > max_drift:
                max_drift = drift
            total = exact
            _fw_build(tree, w)
    for g2 in range(nt):
        for b in range(nb):
            vhist[g2, b] /= Lam * (x_edges[b + 1] - x_edges[b])
    return pi, vhist, n_at, gap_total, top, max_drift, t


# ----------------------------------------------------------------------------
# runs


@dataclass
class LineRun:
    model: str
    Lam: float
    t_grid: np.ndarray
    n_trials: int
    seed: int
    pi_trials: np.ndarray  # (trials, times, k_max + 2); last column collects k > k_max
    V_trials: np.ndarray  # gap-length density per bin
    x_edges: np.ndarray
    n_sticks: np.ndarray  # (trials, times)
    gap_measure: np.ndarray  # (trials, times) uncovered length from the gap list
    max_multiplicity: int
    max_drift: float
    last_event_time: np.ndarray

    @property
    def M_trials(self) -> np.ndarray:
        """sum_k (k-1) pi_k, read off exactly as total stick length minus covered length."""
        return self.n_sticks / self.Lam - (1.0 - self.pi_trials[..., 0])

    @property
    def pi_mean(self):
        return mean_se(self.pi_trials, axis=0)[0]

    @property
    def pi_se(self):
        return mean_se(self.pi_trials, axis=0)[1]

    @property
    def M_mean(self):
        return mean_se(self.M_trials, axis=0)[0]

    @property
    def M_se(self):
        return mean_se(self.M_trials, axis=0)[1]

    @property
    def V_mean(self):
        return mean_se(self.V_trials, axis=0)[0]

    @property
    def V_se(self):
        return mean_se(self.V_trials, axis=0)[1]


def simulate_line(
    model: str,
    Lam: float,
    t_grid,
    n_trials: int = 20,
    seed: int = 0,
    k_max: int = K_MAX,
    x_edges=None,
    jobs: int | None = 1,
) -> LineRun:
    """Run independent trials; ``inf`` in ``t_grid`` (model A only) samples the jammed ring."""
    if model not in ("A", "B"):
        raise ValueError(f"unknown model {model!r}")
    if Lam < MIN_LAMBDA:
        raise ValueError(f"circumference must be >= {MIN_LAMBDA}")
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0) or np.any(grid < 0):
        raise ValueError("t_grid must be non-negative and strictly increasing")
    if model == "B" and np.isinf(grid[-1]):
        raise ValueError("model B never jams; sample at a large finite time instead")
    edges = DEFAULT_X_EDGES if x_edges is None else np.asarray(x_edges, dtype=float)
    model_b = model == "B"

    def one(i):
        return _line_trial(float(Lam), model_b, grid, k_max, edges, kernel_seed(seed, i))

    out = run_trials(one, n_trials, jobs)
    run = LineRun(
        model=model,
        Lam=float(Lam),
        t_grid=grid,
        n_trials=n_trials,
        seed=seed,
        pi_trials=np.stack([o[0] for o in out]),
        V_trials=np.stack([o[1] for o in out]),
        x_edges=edges,
        n_sticks=np.stack([o[2] for o in out]),
        gap_measure=np.stack([o[3] for o in out]),
        max_multiplicity=int(max(o[4] for o in out)),
        max_drift=float(max(o[5] for o in out)),
        last_event_time=np.array([o[6] for o in out]),
    )
    if run.max_drift > 1e-9 * Lam:
        raise LineInvariantError(f"acceptable-measure drift {run.max_drift:.3g} exceeds 1e-9 * Lambda")
    if model_b and run.max_multiplicity > 2:
        raise LineInvariantError("model B produced triple coverage")
    swept = run.pi_trials[..., 0] * Lam
    if np.any(np.abs(swept - run.gap_measure) > 1e-6 * Lam):
        raise LineInvariantError("gap list and multiplicity sweep disagree on the uncovered measure")
    return run


# ----------------------------------------------------------------------------
# analytic references


def _bracket(tau: float) -> float:
    """1 - 2 (1 - e^{-tau/2}) / tau."""
    if tau < 1e-4:
        return tau / 4 - tau * tau / 24
    return 1.0 + 2.0 * math.expm1(-tau / 2) / tau


# Two uncovered-fraction curves for model B.  STATED is script_E(t) =
# exp[-2 Ein(2t)].  REDERIVED integrates the void-amplitude equation
# Phi'/Phi = -(1 - e^{-t/2})/t directly, which gives Phi^2 = exp[-2 Ein(t/2)]
# = script_E(t/4).  The simulation follows the second one.
STATED = "stated"
REDERIVED = "rederived"
_TIME_SCALE = {STATED: 1.0, REDERIVED: 0.25}


def _check_variant(variant: str) -> float:
    if variant not in _TIME_SCALE:
        raise ValueError(f"unknown variant {variant!r}")
    return _TIME_SCALE[variant]


def line_pi0_B(t: float, variant: str = STATED) -> float:
    scale = _check_variant(variant)
    if math.isinf(t):
        return 0.0
    return script_E(scale * t).value


def line_tail_constant_B(variant: str = STATED) -> float:
    """C in pi_0 ~ C / t^2."""
    return script_E_tail_constant() / _check_variant(variant) ** 2


_P2_PANELS: dict[str, list[float]] = {STATED: [0.0], REDERIVED: [0.0]}
P2_TAIL_FROM = 2000


def _p2_rate(tau: float, variant: str) -> float:
    return line_pi0_B(tau, variant) * _bracket(tau)


def _p2_at_integer(n: int, variant: str) -> float:
    panels = _P2_PANELS[variant]
    while len(panels) <= n:
        k = len(panels)
        val, _ = adaptive_simpson(lambda u: _p2_rate(u, variant), k - 1.0, float(k), tol=1e-13)
        panels.append(panels[-1] + val)
    return panels[n]


def line_pi2_B(t: float, variant: str = STATED) -> float:
    """Model B double-covered fraction by quadrature of its rate; t = inf adds the C/t^2 tail."""
    _check_variant(variant)
    if t < 0:
        raise ValueError("t must be >= 0")
    if math.isinf(t):
        T = P2_TAIL_FROM
        C = line_tail_constant_B(variant)
        return _p2_at_integer(T, variant) + C * (1.0 / T - 1.0 / T**2)
    n = int(math.floor(t))
    rest, _ = adaptive_simpson(lambda u: _p2_rate(u, variant), float(n), t, tol=1e-13)
    return _p2_at_integer(n, variant) + rest


@dataclass(frozen=True)
class LineReference:
    model: str
    t: float
    pi0: float
    pi1: float | None
    pi2: float | None
    M: float
    variant: str = STATED


def analytic_line(model: str, t: float, variant: str = STATED) -> LineReference:
    """Reference fractions on the line; model B takes the ``stated`` or ``rederived`` uncovered curve."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if model == "A":
        e = math.exp(-t) if math.isfinite(t) else 0.0
        M = 2.0 - 2.0 * (1.0 + t) * e if math.isfinite(t) else 2.0
        return LineReference("A", t, e, None, None, M)
    if model == "B":
        pi0 = line_pi0_B(t, variant)
        pi2 = line_pi2_B(t, variant)
        return LineReference("B", t, pi0, 1.0 - pi0 - pi2, pi2, pi2, variant)
    raise ValueError(f"unknown model {model!r}")


def line_voids_A(x: float, t: float) -> float:
    """Model A gap-length density t^2 e^{-(x+1)t}."""
    return t * t * math.exp(-(x + 1) * t)


def line_voids_A_bin(x_lo: float, x_hi: float, t: float) -> float:
    """Average of the model A gap density over [x_lo, x_hi)."""
    return t * (math.exp(-(x_lo + 1) * t) - math.exp(-(x_hi + 1) * t)) / (x_hi - x_lo)


def line_asymptotes_B(t: float, variant: str = STATED) -> dict[str, float]:
    """Large-t forms: pi_0 ~ C/t^2 and |pi_i(t) - pi_i(inf)| ~ C/t."""
    C = line_tail_constant_B(variant)
    return {"C": C, "pi0": C / t**2, "pi_deficit": C / t}


# ----------------------------------------------------------------------------
# jammed model A distribution


@dataclass(frozen=True)
class JammedLine:
    Lam: float
    n_trials: int
    pi_mean: np.ndarray  # k = 0..k_max, then the overflow bin
    pi_se: np.ndarray
    sum_pi: np.ndarray  # per trial, sum over all bins
    excess_mean: float  # sum (k-1) pi_k
    excess_se: float
    geometric_guess: np.ndarray  # 2^{k-1}/3^k for k = 1..k_max
    deviation: np.ndarray  # measured minus guess, k = 1..k_max


def geometric_guess(k_max: int = K_MAX) -> np.ndarray:
    k = np.arange(1, k_max + 1)
    return 2.0 ** (k - 1) / 3.0**k


def jammed_line_distribution(
    Lam: float = 1e4, n_trials: int = 20, seed: int = 0, k_max: int = K_MAX, jobs: int | None = 1
) -> JammedLine:
    run = simulate_line("A", Lam, [math.inf], n_trials=n_trials, seed=seed, k_max=k_max, jobs=jobs)
    pis = run.pi_trials[:, 0, :]
    mean, se = mean_se(pis, axis=0)
    excess, excess_se = mean_se(run.M_trials[:, 0], axis=0)
    guess = geometric_guess(k_max)
    return JammedLine(
        Lam=float(Lam),
        n_trials=n_trials,
        pi_mean=mean,
        pi_se=se,
        sum_pi=pis.sum(axis=1),
        excess_mean=float(excess),
        excess_se=float(excess_se),
        geometric_guess=guess,
        deviation=mean[1 : k_max + 1] - guess,
    )
