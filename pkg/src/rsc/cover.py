"""Covering of finite lattice substrates (intervals and rings) by l-mers.

An l-mer is indexed by its rightmost site ``k``.  Sites are numbered 1..L.
On an interval the candidate positions are ``k = 1..L+l-1`` and the footprint
``[k-l+1, k]`` is clipped to ``[1, L]``; on a ring the positions are ``k = 1..L``
and the footprint wraps around.

Model A accepts a deposit iff its footprint holds at least one uncovered site.
Model B comes in two variants.  The default ``overlap`` rule additionally
requires that at most ``l // 2`` footprint sites are already covered; on an
interval only in-lattice sites count towards the overlap (overhang cells are
ignored).  The ``central`` rule instead requires the central site (odd l) or
one of the two central sites (even l) to be uncovered.  The two rules agree
on long voids and differ on voids shorter than the l-mer, where the overlap
rule can leave sites uncovered forever.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

INTERVAL = "interval"
RING = "ring"
SUBSTRATES = (INTERVAL, RING)
MODELS = ("A", "B")
OVERLAP = "overlap"
CENTRAL = "central"
B_RULES = (OVERLAP, CENTRAL)


class RejectedDeposit(ValueError):
    """Raised when depositing at a position the acceptance rule forbids."""


@dataclass(frozen=True)
class ProcessSpec:
    ell: int
    L: int
    substrate: str = INTERVAL
    model: str = "A"
    b_rule: str = OVERLAP

    def __post_init__(self):
        if self.b_rule not in B_RULES:
            raise ValueError(f"unknown model B rule {self.b_rule!r}")
        if self.substrate not in SUBSTRATES:
            raise ValueError(f"unknown substrate {self.substrate!r}")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if self.ell < 2:
            raise ValueError("ell must be >= 2")
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.substrate == RING and self.L < self.ell:
            raise ValueError("a ring needs L >= ell")

    @property
    def n_positions(self) -> int:
        return self.L + self.ell - 1 if self.substrate == INTERVAL else self.L

    def positions(self) -> range:
        return range(1, self.n_positions + 1)

    def footprint(self, k: int) -> list[int]:
        """In-lattice sites covered by the l-mer at position ``k``."""
        if self.substrate == INTERVAL:
            return list(range(max(1, k - self.ell + 1), min(k, self.L) + 1))
        return [(k - j - 1) % self.L + 1 for j in range(self.ell - 1, -1, -1)]

    def central_sites(self, k: int) -> list[int]:
        """Central site(s) of the l-mer at ``k`` that lie on the substrate."""
        ell = self.ell
        offsets = [(ell - 1) // 2] if ell % 2 else [ell // 2, ell // 2 - 1]
        sites = [k - o for o in offsets]
        if self.substrate == INTERVAL:
            return [s for s in sites if 1 <= s <= self.L]
        return [(s - 1) % self.L + 1 for s in sites]

    def neighbours(self, k: int) -> list[int]:
        """Positions whose footprint can intersect the footprint of ``k``."""
        if self.substrate == INTERVAL:
            lo = max(1, k - self.ell + 1)
            hi = min(self.n_positions, k + self.ell - 1)
            return list(range(lo, hi + 1))
        span = range(k - self.ell + 1, k + self.ell)
        return sorted({(j - 1) % self.L + 1 for j in span})


class _IndexedSet:
    """Set with O(1) insert, remove and uniform choice; iteration order is deterministic."""

    __slots__ = ("items", "index")

    def __init__(self, items=()):
        self.items: list[int] = []
        self.index: dict[int, int] = {}
        for x in items:
            self.add(x)

    def add(self, x: int) -> None:
        if x not in self.index:
            self.index[x] = len(self.items)
            self.items.append(x)

    def discard(self, x: int) -> None:
        i = self.index.pop(x, None)
        if i is None:
            return
        last = self.items.pop()
        if i < len(self.items):
            self.items[i] = last
            self.index[last] = i

    def __contains__(self, x) -> bool:
        return x in self.index

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def choice(self, rng: random.Random) -> int:
        return self.items[rng.randrange(len(self.items))]


@dataclass
class CoverState:
    coverage: list[int]
    uncovered_count: int
    acceptable: _IndexedSet
    deposited: set[int] = field(default_factory=set)

    def multiplicity(self, site: int) -> int:
        return self.coverage[site - 1]

    def acceptable_set(self) -> set[int]:
        return set(self.acceptable)


@dataclass(frozen=True)
class CongestionRecord:
    n_deposits: int
    positions: tuple[int, ...]
    left_overhang: bool
    right_overhang: bool
    coverage_histogram: tuple[int, ...]
    stalled: bool = False
    clipped_model_b: bool = False


def new_state(spec: ProcessSpec) -> CoverState:
    coverage = [0] * spec.L
    # under the central rule an overhanging l-mer whose centre is off the interval is never acceptable
    return CoverState(
        coverage=coverage,
        uncovered_count=spec.L,
        acceptable=_IndexedSet(k for k in spec.positions() if _accepts(coverage, spec, k)),
    )


def _accepts(coverage: list[int], spec: ProcessSpec, k: int) -> bool:
    sites = spec.footprint(k)
    covered = sum(1 for s in sites if coverage[s - 1] > 0)
    if covered == len(sites):
        return False
    if spec.model == "B":
        if spec.b_rule == CENTRAL:
            return any(coverage[s - 1] == 0 for s in spec.central_sites(k))
        return covered <= spec.ell // 2
    return True


def is_acceptable(state: CoverState, spec: ProcessSpec, pos: int) -> bool:
    if not 1 <= pos <= spec.n_positions:
        raise ValueError(f"position {pos} is not a candidate position")
    return _accepts(state.coverage, spec, pos)


def recompute_acceptable(state: CoverState, spec: ProcessSpec) -> set[int]:
    """Acceptable set rebuilt from the coverage alone (reference for the incremental one)."""
    return {k for k in spec.positions() if _accepts(state.coverage, spec, k)}


def deposit(state: CoverState, spec: ProcessSpec, pos: int) -> CoverState:
    """Deposit an l-mer at ``pos`` in place and return the state."""
    if not is_acceptable(state, spec, pos):
        raise RejectedDeposit(f"deposit at {pos} is not acceptable under model {spec.model}")
    for s in spec.footprint(pos):
        if state.coverage[s - 1] == 0:
            state.uncovered_count -= 1
        state.coverage[s - 1] += 1
    state.deposited.add(pos)
    for k in spec.neighbours(pos):
        if _accepts(state.coverage, spec, k):
            state.acceptable.add(k)
        else:
            state.acceptable.discard(k)
    return state


def run_to_congestion(spec: ProcessSpec, seed: int) -> CongestionRecord:
    """Deposit uniformly among acceptable positions until every site is covered.

    Choosing uniformly from the acceptable set has the same law over accepted
    sequences as uniform attempts with rejection.
    """
    rng = random.Random(int(seed))
    state = new_state(spec)
    positions: list[int] = []
    while state.uncovered_count > 0 and len(state.acceptable) > 0:
        k = state.acceptable.choice(rng)
        deposit(state, spec, k)
        positions.append(k)
    hist = [0] * (spec.ell + 1)
    for c in state.coverage:
        hist[c] += 1
    interval = spec.substrate == INTERVAL
    return CongestionRecord(
        n_deposits=len(positions),
        positions=tuple(positions),
        left_overhang=interval and any(k < spec.ell for k in positions),
        right_overhang=interval and any(k > spec.L for k in positions),
        coverage_histogram=tuple(hist),
        stalled=state.uncovered_count > 0,
        clipped_model_b=interval and spec.model == "B",
    )


def count_bounds(spec: ProcessSpec) -> tuple[int, int]:
    """Deterministic lower and upper bounds on the number of deposits at congestion."""
    L, ell = spec.L, spec.ell
    if spec.substrate == INTERVAL:
        return (L + ell - 1) // ell, L
    return -(-L // ell), L - ell + 1


def run_unconditional_ring(L: int, ell: int, n_attempts: int, seed: int) -> float:
    """Covered fraction of a ring after ``n_attempts`` placements that are all accepted."""
    if L < ell:
        raise ValueError("a ring needs L >= ell")
    rng = random.Random(int(seed))
    covered = [False] * L
    for _ in range(n_attempts):
        k = rng.randrange(L)
        for j in range(ell):
            covered[(k - j) % L] = True
    return sum(covered) / L


def unconditional_ring_expected(L: int, ell: int, n_attempts: int) -> Fraction:
    """Exact mean covered fraction 1 - ((L - l)/L)^n for unconditional placement."""
    return 1 - Fraction(L - ell, L) ** n_attempts
