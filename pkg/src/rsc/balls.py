"""Covering a d-dimensional torus by balls, with decay-law fits for the uncovered fraction.

Uncovered space is tracked on a grid of points with spacing ``h``.  The grid
is laid out as (n0, n1, n2) with the unused leading axes of size 1, so the
innermost axis is always a real one.

Model B tests an attempt exactly: the centre must lie farther than the radius
from every deposited centre.  The deposited centres are then pairwise more than
one radius apart, so a cell list with cell diagonal below the radius holds at
most one centre per cell.

Model A accepts an attempt iff some uncovered grid point lies within the
radius.  A point stays uncovered exactly until an attempt lands within the
radius of it, so on the grid pi_0 = e^{-V_d t} holds point by point.

On the torus the law of the process is translation invariant, so every grid
point has the same uncovered probability as any point of space.  The grid
fraction is therefore unbiased.  The reported grid-bias bound is the fraction
of grid cells straddling an interface, which bounds the discretisation error
of a single realisation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .mc import kernel_seed, mean_se, run_trials

MIN_SIDE = 8.0
BLOCK = 8  # grid points per block along the innermost axis
FLOOR_COUNT = 10


class StatisticalFloorError(ValueError):
    """The fit window reaches uncovered fractions too small for the grid to resolve."""


def ball_volume(d: int, radius: float = 1.0) -> float:
    """V_d r^d with V_d = pi^(d/2) / Gamma(1 + d/2)."""
    return math.pi ** (d / 2) / math.gamma(1 + d / 2) * radius**d


@dataclass(frozen=True)
class TorusSpec:
    d: int = 2
    side: float = 100.0
    h: float = 1 / 32  # grid spacing
    model: str = "B"
    radius: float = 1.0

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ValueError("d must be 1, 2 or 3")
        if self.model not in ("A", "B"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.side < MIN_SIDE:
            raise ValueError(f"side must be >= {MIN_SIDE}")
        if self.radius <= 0 or self.radius > self.side / 4:
            raise ValueError("radius must be positive and at most a quarter of the side")
        n = self.side / self.h
        if self.h <= 0 or abs(n - round(n)) > 1e-9 * n:
            raise ValueError("side must be an integer multiple of h")

    @property
    def n(self) -> int:
        return int(round(self.side / self.h))

    @property
    def shape(self) -> tuple[int, int, int]:
        n = self.n
        return ((1,) * (3 - self.d) + (n,) * self.d)  # type: ignore[return-value]

    @property
    def n_points(self) -> int:
        return self.n**self.d

    @property
    def volume(self) -> float:
        return self.side**self.d


# ----------------------------------------------------------------------------
# kernel


@njit(cache=True, nogil=True)
def _scan(cov, counts, c, h, r, mark):
    """mark=False: 1 if an uncovered grid point lies within r of c, else 0.

    mark=True: cover every grid point within r of c and return how many were
    newly covered.
    """
    n0, n1, n2 = cov.shape
    r2 = r * r
    newly = 0
    lo0, hi0 = (0, 0) if n0 == 1 else (int(math.ceil((c[0] - r) / h)), int(math.floor((c[0] + r) / h)))
    lo1, hi1 = (0, 0) if n1 == 1 else (int(math.ceil((c[1] - r) / h)), int(math.floor((c[1] + r) / h)))
    for u0 in range(lo0, hi0 + 1):
        d0 = 0.0 if n0 == 1 else u0 * h - c[0]
        rem0 = r2 - d0 * d0
        if rem0 < 0:
            continue
        i0 = u0 % n0
        for u1 in range(lo1, hi1 + 1):
            d1 = 0.0 if n1 == 1 else u1 * h - c[1]
            rem1 = rem0 - d1 * d1
            if rem1 < 0:
                continue
            i1 = u1 % n1
            w = math.sqrt(rem1)
            lo2 = int(math.ceil((c[2] - w) / h))
            hi2 = int(math.floor((c[2] + w) / h))
            u2 = lo2
            while u2 <= hi2:
                i2 = u2 % n2
                b = i2 // BLOCK
                if counts[i0, i1, b] == 0:
                    step = BLOCK - i2 % BLOCK
                    if i2 + step > n2:
                        step = n2 - i2
                    u2 += step
                    continue
                if cov[i0, i1, i2] == 0:
                    if not mark:
                        return 1
                    cov[i0, i1, i2] = 1
                    counts[i0, i1, b] -= 1
                    newly += 1
                u2 += 1
    return newly


@njit(cache=True, nogil=True)
def _centre_free(cells, centres, c, side, r, nc, cs, d):
    """True iff no deposited centre lies within distance r of c on the torus."""
    k = int(math.ceil(r / cs))
    base = np.zeros(3, np.int64)
    span = np.zeros(3, np.int64)
    for a in range(3):
        if a >= 3 - d:
            base[a] = int(c[a] / cs) % nc
            span[a] = k
    r2 = r * r
    for o0 in range(-span[0], span[0] + 1):
        j0 = (base[0] + o0) % nc if span[0] > 0 else 0
        for o1 in range(-span[1], span[1] + 1):
            j1 = (base[1] + o1) % nc if span[1] > 0 else 0
            for o2 in range(-span[2], span[2] + 1):
                j2 = (base[2] + o2) % nc
                idx = cells[j0, j1, j2]
                if idx < 0:
                    continue
                dist2 = 0.0
                for a in range(3 - d, 3):
                    dx = abs(centres[idx, a] - c[a])
                    if dx > side - dx:
                        dx = side - dx
                    dist2 += dx * dx
                if dist2 <= r2:
                    return False
    return True


@njit(cache=True, nogil=True)
def _boundary_fraction(cov, d):
    n0, n1, n2 = cov.shape
    total = 0
    for i0 in range(n0):
        for i1 in range(n1):
            for i2 in range(n2):
                v = cov[i0, i1, i2]
                edge = v != cov[i0, i1, (i2 + 1) % n2]
                if not edge and n1 > 1:
                    edge = v != cov[i0, (i1 + 1) % n1, i2]
                if not edge and n0 > 1:
                    edge = v != cov[(i0 + 1) % n0, i1, i2]
                if edge:
                    total += 1
    return total / (n0 * n1 * n2)


@njit(cache=True, nogil=True)
def _balls_trial(d, side, h, r, model_b, n0, n1, n2, t_grid, seed):
    np.random.seed(seed)
    nt = t_grid.size
    cov = np.zeros((n0, n1, n2), np.uint8)
    nb = (n2 + BLOCK - 1) // BLOCK
    counts = np.zeros((n0, n1, nb), np.int64)
    for b in range(nb):
        width = min(BLOCK, n2 - b * BLOCK)
        counts[:, :, b] = width
    uncovered = n0 * n1 * n2
    total_points = uncovered
    rate = side**d
    pi0 = np.ones(nt)
    bias = np.zeros(nt)
    n_balls = np.zeros(nt, np.int64)
    # cell list for the exact model B test; side of a cell below r / sqrt(d)
    nc = int(math.floor(side * math.sqrt(d) / r)) + 1
    cs = side / nc
    if model_b:
        cells = -np.ones((nc if d == 3 else 1, nc if d >= 2 else 1, nc), np.int64)
    else:
        cells = -np.ones((1, 1, 1), np.int64)
    centres = np.zeros((64, 3))
    nballs = 0
    c = np.zeros(3)
    t = 0.0
    g = 0
    attempts = 0
    while g < nt:
        t += np.random.exponential(1.0 / rate)
        while g < nt and t_grid[g] < t:
            pi0[g] = uncovered / total_points
            bias[g] = _boundary_fraction(cov, d)
            n_balls[g] = nballs
            g += 1
        if g == nt:
            break
        for a in range(3):
            c[a] = np.random.random() * side if a >= 3 - d else 0.0
        attempts += 1
        if model_b:
            if not _centre_free(cells, centres, c, side, r, nc, cs, d):
                continue
        elif _scan(cov, counts, c, h, r, False) == 0:
            continue
        if nballs == centres.shape[0]:
            grown = np.zeros((2 * nballs, 3))
            grown[:nballs] = centres[:nballs]
            centres = grown
        centres[nballs] = c
        if model_b:
            j0 = int(c[0] / cs) % nc if d == 3 else 0
            j1 = int(c[1] / cs) % nc if d >= 2 else 0
            j2 = int(c[2] / cs) % nc
            if cells[j0, j1, j2] >= 0:
                raise RuntimeError("cell list bucket overflow")
            cells[j0, j1, j2] = nballs
        nballs += 1
        uncovered -= _scan(cov, counts, c, h, r, True)
    return pi0, bias, n_balls, attempts


# ----------------------------------------------------------------------------
# runs


def default_ball_times(t_max: float, n: int = 40) -> np.ndarray:
    return np.geomspace(min(0.05, t_max / 10), t_max, n)


@dataclass
class BallsRun:
    spec: TorusSpec
    t_grid: np.ndarray
    n_trials: int
    seed: int
    pi0_trials: np.ndarray  # (trials, times)
    bias_trials: np.ndarray  # fraction of grid cells on an interface
    n_balls: np.ndarray
    attempts: np.ndarray

    @property
    def pi0_mean(self):
        return mean_se(self.pi0_trials, axis=0)[0]

    @property
    def pi0_se(self):
        return mean_se(self.pi0_trials, axis=0)[1]

    @property
    def grid_bias_bound(self) -> np.ndarray:
        return self.bias_trials.max(axis=0)

    @property
    def n_points(self) -> int:
        return self.spec.n_points


def simulate_balls(
    spec: TorusSpec, t_max: float = 100.0, seed: int = 0, t_grid=None, n_trials: int = 1, jobs: int | None = 1
) -> BallsRun:
    """Sample pi_0 on ``t_grid`` (geometric up to ``t_max`` by default) for independent trials."""
    grid = default_ball_times(t_max) if t_grid is None else np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or np.any(np.diff(grid) <= 0) or np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise ValueError("t_grid must be finite, non-negative and strictly increasing")
    n0, n1, n2 = spec.shape
    model_b = spec.model == "B"

    def one(i):
        return _balls_trial(spec.d, spec.side, spec.h, spec.radius, model_b, n0, n1, n2, grid, kernel_seed(seed, i))

    out = run_trials(one, n_trials, jobs)
    return BallsRun(
        spec=spec,
        t_grid=grid,
        n_trials=n_trials,
        seed=seed,
        pi0_trials=np.stack([o[0] for o in out]),
        bias_trials=np.stack([o[1] for o in out]),
        n_balls=np.stack([o[2] for o in out]),
        attempts=np.array([o[3] for o in out]),
    )


# ----------------------------------------------------------------------------
# fits


POWER = "power"
EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class DecayFit:
    law: str
    window: tuple[float, float]
    value: float  # exponent (power law) or decay rate (exponential)
    stderr: float
    n_points: int
    residual_rms: float
    max_abs_residual: float


def fit_decay(series, window, law: str = POWER, n_cells: int | None = None) -> DecayFit:
    """Least-squares fit of log pi_0 against log t (power) or t (exponential).

    ``series`` is a :class:`BallsRun` or a tuple ``(t, pi0)`` / ``(t, pi0, se)``.
    With standard errors the fit is weighted by ``pi0 / se``.  Points at or
    below ``FLOOR_COUNT / n_cells`` make the window unusable.
    """
    if isinstance(series, BallsRun):
        t, y, se = series.t_grid, series.pi0_mean, series.pi0_se
        n_cells = series.n_points if n_cells is None else n_cells
    else:
        t, y = np.asarray(series[0], float), np.asarray(series[1], float)
        se = np.asarray(series[2], float) if len(series) > 2 else None
    if law not in (POWER, EXPONENTIAL):
        raise ValueError(f"unknown law {law!r}")
    lo, hi = window
    if lo >= hi or lo < t.min() - 1e-12 or hi > t.max() + 1e-12:
        raise ValueError("window must lie inside the sampled range")
    mask = (t >= lo) & (t <= hi)
    if mask.sum() < 3:
        raise ValueError("need at least 3 samples in the window")
    tw, yw = t[mask], y[mask]
    floor = FLOOR_COUNT / n_cells if n_cells else 0.0
    if np.any(yw <= floor):
        raise StatisticalFloorError(f"pi_0 falls to {yw.min():.3g} <= floor {floor:.3g} inside the window")
    x = np.log(tw) if law == POWER else tw
    ly = np.log(yw)
    if se is not None and np.all(se[mask] > 0):
        wts = yw / se[mask]
    else:
        wts = np.ones_like(yw)
    X = np.column_stack([np.ones_like(x), x])
    coef, *_ = np.linalg.lstsq(X * wts[:, None], ly * wts, rcond=None)
    resid = ly - X @ coef
    dof = max(len(x) - 2, 1)
    chi2 = float(np.sum((resid * wts) ** 2)) / dof
    cov = np.linalg.inv((X * wts[:, None]).T @ (X * wts[:, None])) * chi2
    slope = float(coef[1])
    value = slope if law == POWER else -slope
    return DecayFit(
        law=law,
        window=(float(lo), float(hi)),
        value=value,
        stderr=float(math.sqrt(cov[1, 1])),
        n_points=int(mask.sum()),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        max_abs_residual=float(np.max(np.abs(resid))),
    )
