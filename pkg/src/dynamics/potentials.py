"""
Locally constant potentials on an SFT.

A one-sided potential of depth ``d`` reads coordinates ``0..d-1``; a two-sided
potential of radius ``m`` reads the window ``-m..m``. Both keep a dense numpy
table indexed by the base-``n`` code of the window, NaN on inadmissible words,
so that Birkhoff averages over many periodic orbits vectorize.

The reference scheme picks, for every symbol ``t``, a periodic sequence
through ``t``. It defines the splice map ``rho`` and the coboundary ``u`` that
turns a two-sided potential into a one-sided one with the same cycle averages.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, NamedTuple, Optional, Sequence

import networkx as nx
import numpy as np

from src.dynamics.sft import (
    BiSequence,
    Tail,
    TransitionStructure,
    Word,
    admissible,
    admissible_words,
    cycle_windows,
)
from src.errors import InputError, SpliceInadmissible

logger = logging.getLogger(__name__)

# Dense tables above this many cells are refused.
MAX_TABLE_CELLS = 1 << 24


class _LocallyConstant:
    """Shared table machinery. ``offset`` is the first coordinate read, ``width`` the window length."""

    kind: str = ""

    def __init__(self, ts: TransitionStructure, width: int, offset: int, table: Mapping[Sequence[int], float]):
        if width < 1:
            raise InputError("window width must be >= 1")
        cells = ts.n ** width
        if cells > MAX_TABLE_CELLS:
            raise InputError(f"table over {ts.n}**{width} windows is too large")
        self.ts = ts
        self.width = width
        self.offset = offset
        self._powers = ts.n ** np.arange(width - 1, -1, -1, dtype=np.int64)

        values = np.full(cells, np.nan)
        words = admissible_words(ts, width)
        given = {tuple(int(s) for s in k): float(v) for k, v in table.items()}
        missing = [w for w in words if w not in given]
        if missing:
            raise InputError(f"table misses admissible word {missing[0]}", missing=len(missing))
        if len(given) != len(words):
            extra = next(k for k in given if k not in set(words))
            raise InputError(f"table has entry for inadmissible or mis-sized word {extra}")
        for w in words:
            v = given[w]
            if not math.isfinite(v):
                raise InputError(f"non-finite table value at {w}")
            values[self._code(w)] = v
        values.setflags(write=False)
        self._values = values
        self._words = tuple(words)

    # -- construction helpers --------------------------------------------

    def _code(self, w: Sequence[int]) -> int:
        return int(np.dot(np.asarray(w, dtype=np.int64), self._powers))

    def _like(self, values: Mapping[Word, float]):
        raise NotImplementedError

    # -- evaluation --------------------------------------------------------

    @property
    def words(self) -> tuple[Word, ...]:
        return self._words

    @property
    def dense(self) -> np.ndarray:
        return self._values

    def value(self, w: Sequence[int]) -> float:
        """Table value of an admissible window."""
        w = tuple(w)
        if len(w) != self.width:
            raise InputError(f"window {w} has length {len(w)}, expected {self.width}")
        if any(not 0 <= s < self.ts.n for s in w):
            raise InputError(f"window {w} has a symbol out of range")
        v = self._values[self._code(w)]
        if math.isnan(v):
            raise InputError(f"window {w} is not admissible")
        return float(v)

    def __call__(self, x: BiSequence) -> float:
        return self.value(x.window(self.offset, self.offset + self.width - 1))

    def items(self) -> list[tuple[Word, float]]:
        return [(w, float(self._values[self._code(w)])) for w in self._words]

    def table(self) -> dict[Word, float]:
        return dict(self.items())

    def min(self) -> float:
        return float(np.nanmin(self._values))

    def max(self) -> float:
        return float(np.nanmax(self._values))

    def cycle_average(self, word: Sequence[int]) -> float:
        """Birkhoff average along the periodic orbit of ``word``."""
        if not admissible(self.ts, word, cyclic=True):
            raise InputError(f"cycle {tuple(word)} is not admissible")
        wins = cycle_windows(word, self.offset, self.width)
        vals = self._values[wins @ self._powers]
        if np.isnan(vals).any():
            raise InputError(f"cycle {tuple(word)} is not admissible")
        return math.fsum(vals) / len(word)

    def cycle_sums(self, words: np.ndarray) -> np.ndarray:
        """Cycle sums for an ``(N, p)`` array of words sharing the period ``p``."""
        words = np.asarray(words, dtype=np.int64)
        p = words.shape[1]
        if not self.ts.R[words, np.roll(words, -1, axis=1)].all():
            raise InputError("cycle_sums got an inadmissible cycle")
        idx = (np.arange(p)[:, None] + self.offset + np.arange(self.width)[None, :]) % p
        codes = words[:, idx] @ self._powers
        return self._values[codes].sum(axis=1)

    # -- arithmetic ----------------------------------------------------------

    def map_values(self, fn: Callable[[float], float]):
        return self._like({w: fn(v) for w, v in self.items()})

    def __add__(self, other):
        if isinstance(other, (int, float)):
            return self.map_values(lambda v: v + other)
        a, b = _common(self, other)
        return a._like({w: a.value(w) + b.value(w) for w in a.words})

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (int, float)):
            return self.map_values(lambda v: v - other)
        return self + (-1.0) * other

    def __mul__(self, c: float):
        return self.map_values(lambda v: c * v)

    __rmul__ = __mul__

    def __neg__(self):
        return -1.0 * self

    def allclose(self, other, tol: float = 1e-12) -> bool:
        a, b = _common(self, other)
        return all(abs(a.value(w) - b.value(w)) <= tol for w in a.words)

    def __eq__(self, other: object) -> bool:
        if type(other) is not type(self):
            return NotImplemented
        return (self.ts == other.ts and self.width == other.width
                and self.items() == other.items())

    __hash__ = None  # type: ignore[assignment]


class OneSidedPotential(_LocallyConstant):
    """Potential reading coordinates ``0..depth-1``."""

    kind = "one_sided"

    def __init__(self, ts: TransitionStructure, depth: int, table: Mapping[Sequence[int], float]):
        super().__init__(ts, depth, 0, table)

    @property
    def depth(self) -> int:
        return self.width

    @property
    def size(self) -> int:
        return self.width

    def _like(self, values):
        return OneSidedPotential(self.ts, self.depth, values)

    def lift(self, depth: int) -> "OneSidedPotential":
        """Same function tabulated on longer words (extra coordinates ignored)."""
        if depth < self.depth:
            raise InputError(f"cannot lift depth {self.depth} to {depth}")
        if depth == self.depth:
            return self
        d = self.depth
        return OneSidedPotential(self.ts, depth, {w: self.value(w[:d]) for w in admissible_words(self.ts, depth)})

    @classmethod
    def from_function(cls, ts, depth: int, fn: Callable[[Word], float]) -> "OneSidedPotential":
        return cls(ts, depth, {w: float(fn(w)) for w in admissible_words(ts, depth)})

    @classmethod
    def constant(cls, ts, c: float) -> "OneSidedPotential":
        return cls.from_function(ts, 1, lambda w: c)

    @classmethod
    def indicator(cls, ts, symbol: int) -> "OneSidedPotential":
        if not 0 <= symbol < ts.n:
            raise InputError(f"symbol {symbol} out of range")
        return cls.from_function(ts, 1, lambda w: 1.0 if w[0] == symbol else 0.0)

    @classmethod
    def random(cls, ts, depth: int, rng: np.random.Generator,
               low: float = -1.0, high: float = 1.0) -> "OneSidedPotential":
        words = admissible_words(ts, depth)
        vals = rng.uniform(low, high, size=len(words))
        return cls(ts, depth, dict(zip(words, vals)))

    def __repr__(self) -> str:
        return f"OneSidedPotential(n={self.ts.n}, depth={self.depth})"


class TwoSidedPotential(_LocallyConstant):
    """Potential reading the window ``-radius..radius``."""

    kind = "two_sided"

    def __init__(self, ts: TransitionStructure, radius: int, table: Mapping[Sequence[int], float]):
        if radius < 0:
            raise InputError("radius must be >= 0")
        super().__init__(ts, 2 * radius + 1, -radius, table)
        self.radius = radius

    @property
    def size(self) -> int:
        return self.radius

    def _like(self, values):
        return TwoSidedPotential(self.ts, self.radius, values)

    def lift(self, radius: int) -> "TwoSidedPotential":
        if radius < self.radius:
            raise InputError(f"cannot lift radius {self.radius} to {radius}")
        if radius == self.radius:
            return self
        cut = radius - self.radius
        return TwoSidedPotential(
            self.ts, radius,
            {w: self.value(w[cut:len(w) - cut]) for w in admissible_words(self.ts, 2 * radius + 1)},
        )

    @classmethod
    def from_one_sided(cls, psi: OneSidedPotential) -> "TwoSidedPotential":
        """The one-sided ``psi`` as a function of the window ``-(d-1)..d-1``."""
        r = psi.depth - 1
        return cls(psi.ts, r, {w: psi.value(w[r:r + psi.depth]) for w in admissible_words(psi.ts, 2 * r + 1)})

    @classmethod
    def random(cls, ts, radius: int, rng: np.random.Generator,
               low: float = -1.0, high: float = 1.0) -> "TwoSidedPotential":
        words = admissible_words(ts, 2 * radius + 1)
        vals = rng.uniform(low, high, size=len(words))
        return cls(ts, radius, dict(zip(words, vals)))

    def __repr__(self) -> str:
        return f"TwoSidedPotential(n={self.ts.n}, radius={self.radius})"


def _common(a: _LocallyConstant, b: _LocallyConstant):
    if type(a) is not type(b):
        raise InputError(f"cannot combine {a.kind} with {b.kind} potentials")
    if a.ts != b.ts:
        raise InputError("potentials live on different SFTs")
    size = max(a.size, b.size)
    return a.lift(size), b.lift(size)


def var_k(phi: TwoSidedPotential, k: int) -> float:
    """Largest table difference between windows agreeing on ``|i| <= k``."""
    if k < 0:
        raise InputError("k must be >= 0")
    m = phi.radius
    if k >= m:
        return 0.0
    spread: dict[Word, tuple[float, float]] = {}
    for w, v in phi.items():
        key = w[m - k:m + k + 1]
        lo, hi = spread.get(key, (v, v))
        spread[key] = (min(lo, v), max(hi, v))
    return max(hi - lo for lo, hi in spread.values())


# ---------------------------------------------------------------------------
# Reference scheme
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceScheme:
    """For each symbol ``t`` a cycle with ``a[k, t] = cycles[t][k % len]`` and ``a[0, t] = t``."""
    ts: TransitionStructure
    cycles: tuple[Word, ...]

    def __post_init__(self):
        if len(self.cycles) != self.ts.n:
            raise InputError("reference scheme needs one cycle per symbol")
        for t, c in enumerate(self.cycles):
            if not c or c[0] != t:
                raise InputError(f"reference cycle for {t} must start at {t}")
            for a, b in zip(c, c[1:] + c[:1]):
                if not self.ts.allowed(a, b):
                    raise InputError(f"reference cycle {c} is not admissible")

    @classmethod
    def shortest_cycles(cls, ts: TransitionStructure) -> "ReferenceScheme":
        """Shortest cycle through each symbol, lexicographically least among ties."""
        reverse = ts.graph.reverse(copy=False)
        cycles = []
        for t in range(ts.n):
            dist = nx.single_source_shortest_path_length(reverse, t)
            steps = [dist[s] + 1 for s in ts.successors(t) if s in dist]
            if not steps:
                raise InputError(f"no cycle through symbol {t}")
            remaining = min(steps)
            cycle, cur = [t], t
            while remaining > 1:
                cur = next(s for s in ts.successors(cur) if dist.get(s) == remaining - 1)
                cycle.append(cur)
                remaining -= 1
            cycles.append(tuple(cycle))
        return cls(ts, tuple(cycles))

    def at(self, t: int, k: int) -> int:
        c = self.cycles[t]
        return c[k % len(c)]

    def complete(self, word: Sequence[int], lo: int = 0) -> BiSequence:
        """``word`` placed at coordinates ``lo..`` with scheme cycles as both tails."""
        w = tuple(word)
        first, last = self.cycles[w[0]], self.cycles[w[-1]]
        hi = lo + len(w) - 1
        return BiSequence(
            core=w, lo=lo,
            left=Tail(first, -lo),
            right=Tail(last, -hi),
        )


def rho(scheme: ReferenceScheme, x: BiSequence) -> BiSequence:
    """Keep ``x_k`` for ``k > 0`` and replace the past by ``a[k, x_0]`` for ``k <= 0``."""
    t = x[0]
    core = tuple(x[k] for k in range(1, x.hi))
    if not scheme.ts.allowed(scheme.at(t, 0), x[1]):
        raise SpliceInadmissible(f"cannot splice reference past of {t} onto {x[1]}")
    return BiSequence(core=core, lo=1, left=Tail(scheme.cycles[t], 0), right=x.right)


def _u_value(phi: TwoSidedPotential, scheme: ReferenceScheme, x: BiSequence) -> float:
    star = rho(scheme, x)
    return math.fsum(phi(x.shift(j)) - phi(star.shift(j)) for j in range(phi.radius))


def coboundary_u(phi: TwoSidedPotential, scheme: Optional[ReferenceScheme] = None) -> TwoSidedPotential:
    """The transfer function ``u = sum_j [phi(sigma^j x) - phi(sigma^j rho x)]``.

    Terms with ``j >= radius`` vanish, so ``u`` reads ``x_{-m}..x_{2m-1}`` and
    is returned with radius ``max(0, 2m - 1)``.
    """
    scheme = scheme or ReferenceScheme.shortest_cycles(phi.ts)
    radius = max(0, 2 * phi.radius - 1)
    return TwoSidedPotential(
        phi.ts, radius,
        {w: _u_value(phi, scheme, scheme.complete(w, -radius))
         for w in admissible_words(phi.ts, 2 * radius + 1)},
    )


def reduce_two_sided(phi: TwoSidedPotential, scheme: Optional[ReferenceScheme] = None) -> OneSidedPotential:
    """``psi = phi + u o sigma - u`` as a one-sided potential of depth ``2m + 1``.

    ``psi`` is evaluated on the scheme completion of each admissible word
    ``x_0..x_{2m}``; its value does not depend on the chosen past.
    """
    scheme = scheme or ReferenceScheme.shortest_cycles(phi.ts)
    m = phi.radius
    if m == 0:
        return OneSidedPotential(phi.ts, 1, {w: phi.value(w) for w in phi.words})
    table = {}
    for w in admissible_words(phi.ts, 2 * m + 1):
        x = scheme.complete(w, 0)
        table[w] = phi(x) + _u_value(phi, scheme, x.shift(1)) - _u_value(phi, scheme, x)
    logger.debug("reduced radius %d potential to depth %d", m, 2 * m + 1)
    return OneSidedPotential(phi.ts, 2 * m + 1, table)


class HolderTruncation(NamedTuple):
    potential: TwoSidedPotential
    error_bound: float


def truncate_holder(
    ts: TransitionStructure,
    evaluator: Callable[[BiSequence], float],
    b: float,
    c: float,
    m: int,
    scheme: Optional[ReferenceScheme] = None,
) -> HolderTruncation:
    """Radius-``m`` table of ``evaluator`` sampled on scheme-completed windows.

    If ``var_k <= b * c**k`` for the true potential, the sup error is at most
    ``b * c**m``.
    """
    if not 0 < c < 1:
        raise InputError("c must lie in (0, 1)")
    if b < 0 or m < 0:
        raise InputError("b and m must be non-negative")
    scheme = scheme or ReferenceScheme.shortest_cycles(ts)
    table = {w: float(evaluator(scheme.complete(w, -m))) for w in admissible_words(ts, 2 * m + 1)}
    return HolderTruncation(TwoSidedPotential(ts, m, table), b * c ** m)


def max_abs_delta(phi, psi, words: Iterable[Word]) -> float:
    """Largest cycle-average difference between two potentials over the given words."""
    return max((abs(phi.cycle_average(w) - psi.cycle_average(w)) for w in words), default=0.0)
