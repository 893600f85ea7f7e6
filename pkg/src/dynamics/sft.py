"""
Subshifts of finite type.

Transition structures, admissible words, two-sided sequences, periodic-orbit
enumeration, higher block presentations and the gluing construction of
periodic points.

Usage::

    from src.dynamics.sft import TransitionStructure, periodic_words

    ts = TransitionStructure.golden_mean()
    for cert in periodic_words(ts, 4):
        print(cert.word, cert.period)

Words are plain ``tuple[int, ...]`` over the symbols ``0..n-1``.
"""
from __future__ import annotations

import math
import threading
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

import networkx as nx
import numpy as np

from src.errors import BudgetExceeded, InputError, NotPrimitive, WindowTooShort

Word = tuple[int, ...]


# ---------------------------------------------------------------------------
# Transition structure
# ---------------------------------------------------------------------------

class TransitionStructure:
    """An SFT given by an ``n x n`` 0/1 transition matrix.

    Immutable after construction apart from the cached mixing constant,
    which is computed under a lock.
    """

    def __init__(self, matrix: Sequence[Sequence[int]] | np.ndarray):
        R = np.asarray(matrix)
        if R.ndim != 2 or R.shape[0] != R.shape[1] or R.shape[0] < 1:
            raise InputError(f"transition matrix must be square and non-empty, got shape {R.shape}")
        if not np.isin(R, (0, 1)).all():
            raise InputError("transition matrix entries must be 0 or 1")
        R = R.astype(bool)
        if not R.any(axis=1).all() or not R.any(axis=0).all():
            raise InputError("every symbol needs a successor and a predecessor")
        R.setflags(write=False)
        self._R = R
        self._mixing: Optional[int] = None
        self._mixing_known = False
        self._lock = threading.Lock()

    # -- constructors -----------------------------------------------------

    @classmethod
    def full_shift(cls, n: int) -> "TransitionStructure":
        return cls(np.ones((n, n), dtype=int))

    @classmethod
    def golden_mean(cls) -> "TransitionStructure":
        return cls([[1, 1], [1, 0]])

    @classmethod
    def from_rows(cls, rows: Iterable[str]) -> "TransitionStructure":
        """Build from strings of ``0``/``1`` characters, one per row."""
        parsed = []
        for row in rows:
            if set(row) - {"0", "1"}:
                raise InputError(f"invalid SFT row {row!r}")
            parsed.append([int(ch) for ch in row])
        return cls(parsed)

    # -- accessors --------------------------------------------------------

    @property
    def n(self) -> int:
        return self._R.shape[0]

    @property
    def R(self) -> np.ndarray:
        return self._R

    def allowed(self, a: int, b: int) -> bool:
        return bool(self._R[a, b])

    def successors(self, a: int) -> list[int]:
        return [int(b) for b in np.flatnonzero(self._R[a])]

    def rows(self) -> list[str]:
        return ["".join("1" if v else "0" for v in row) for row in self._R]

    @cached_property
    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from((int(a), int(b)) for a, b in zip(*np.nonzero(self._R)))
        return g

    @property
    def is_irreducible(self) -> bool:
        return nx.is_strongly_connected(self.graph)

    @property
    def is_primitive(self) -> bool:
        try:
            mixing_constant(self)
        except NotPrimitive:
            return False
        return True

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TransitionStructure):
            return NotImplemented
        return self._R.shape == other._R.shape and bool((self._R == other._R).all())

    def __hash__(self) -> int:
        return hash((self.n, self._R.tobytes()))

    def __repr__(self) -> str:
        return f"TransitionStructure(n={self.n}, rows={self.rows()})"


# ---------------------------------------------------------------------------
# Words
# ---------------------------------------------------------------------------

def _check_symbols(ts: TransitionStructure, w: Sequence[int]) -> None:
    for s in w:
        if not 0 <= s < ts.n:
            raise InputError(f"symbol {s} out of range 0..{ts.n - 1}")


def admissible(ts: TransitionStructure, w: Sequence[int], cyclic: bool = False) -> bool:
    """True iff every consecutive pair of ``w`` is allowed (and the wrap pair, if cyclic)."""
    if len(w) == 0:
        raise InputError("words have length >= 1")
    _check_symbols(ts, w)
    R = ts.R
    if any(not R[a, b] for a, b in zip(w, w[1:])):
        return False
    return not cyclic or bool(R[w[-1], w[0]])


def admissible_words(ts: TransitionStructure, length: int) -> list[Word]:
    """All admissible words of the given length, in lexicographic order."""
    if length < 1:
        raise InputError("length must be >= 1")
    words: list[Word] = [(s,) for s in range(ts.n)]
    for _ in range(length - 1):
        words = [w + (b,) for w in words for b in ts.successors(w[-1])]
    return words


def canonical_rotation(w: Sequence[int]) -> Word:
    """Lexicographically least rotation."""
    w = tuple(w)
    return min(w[i:] + w[:i] for i in range(len(w)))


def primitive_root(w: Sequence[int]) -> Word:
    """Shortest ``u`` with ``w == u * k``."""
    w = tuple(w)
    p = len(w)
    for d in range(1, p + 1):
        if p % d == 0 and w == w[:d] * (p // d):
            return w[:d]
    return w


def word_frequencies(word: Sequence[int], depth: int, cyclic: bool = True) -> dict[Word, Fraction]:
    """Frequencies of the depth-``depth`` subwords of ``word``.

    Cyclic words are read around the wrap and have ``len(word)`` windows;
    linear words have ``len(word) - depth + 1``.
    """
    w = tuple(word)
    p = len(w)
    if cyclic:
        ext = w + w * (depth // p + 1)
        windows = [ext[i:i + depth] for i in range(p)]
    else:
        windows = [w[i:i + depth] for i in range(p - depth + 1)]
    if not windows:
        return {}
    counts: dict[Word, int] = {}
    for win in windows:
        counts[win] = counts.get(win, 0) + 1
    total = len(windows)
    return {k: Fraction(v, total) for k, v in sorted(counts.items())}


@dataclass(frozen=True)
class PeriodicCertificate:
    """A primitive cyclic word and the periodic measure it carries."""
    word: Word

    def __post_init__(self):
        if len(self.word) == 0:
            raise InputError("certificate word is empty")
        if primitive_root(self.word) != self.word:
            raise InputError(f"certificate word {self.word} is a proper power")

    @classmethod
    def of(cls, word: Sequence[int]) -> "PeriodicCertificate":
        """Canonical certificate of the orbit through ``word`` (any rotation or power)."""
        return cls(canonical_rotation(primitive_root(word)))

    @property
    def period(self) -> int:
        return len(self.word)

    def frequencies(self, depth: int) -> dict[Word, Fraction]:
        return word_frequencies(self.word, depth, cyclic=True)

    @cached_property
    def cylinder_frequencies(self) -> dict[Word, Fraction]:
        """Frequencies of every cylinder of depth ``1..period``."""
        out: dict[Word, Fraction] = {}
        for d in range(1, self.period + 1):
            out.update(self.frequencies(d))
        return out

    def to_dict(self) -> dict:
        return {"word": list(self.word), "period": self.period}


# ---------------------------------------------------------------------------
# Two-sided sequences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Tail:
    """Periodic continuation: coordinate ``k`` reads ``cycle[(phase + k) % len(cycle)]``."""
    cycle: Word
    phase: int = 0

    def at(self, k: int) -> int:
        return self.cycle[(self.phase + k) % len(self.cycle)]


@dataclass(frozen=True)
class BiSequence:
    """A two-sided sequence: explicit symbols on ``lo..hi-1`` plus optional periodic tails.

    Reading a coordinate outside the core with no tail on that side raises
    :class:`WindowTooShort`.
    """
    core: Word
    lo: int = 0
    left: Optional[Tail] = None
    right: Optional[Tail] = None

    @property
    def hi(self) -> int:
        return self.lo + len(self.core)

    @classmethod
    def periodic(cls, word: Sequence[int], phase: int = 0) -> "BiSequence":
        tail = Tail(tuple(word), phase)
        return cls(core=(), lo=0, left=tail, right=tail)

    def __getitem__(self, k: int) -> int:
        if self.lo <= k < self.hi:
            return self.core[k - self.lo]
        if k < self.lo:
            if self.left is None:
                raise WindowTooShort(f"coordinate {k} left of window starting at {self.lo}")
            return self.left.at(k)
        if self.right is None:
            raise WindowTooShort(f"coordinate {k} right of window ending at {self.hi - 1}")
        return self.right.at(k)

    def window(self, a: int, b: int) -> Word:
        """Symbols at coordinates ``a..b`` inclusive."""
        return tuple(self[k] for k in range(a, b + 1))

    def shift(self, j: int = 1) -> "BiSequence":
        """``sigma^j``: the new coordinate ``k`` reads the old ``k + j``."""
        return BiSequence(
            core=self.core,
            lo=self.lo - j,
            left=Tail(self.left.cycle, self.left.phase + j) if self.left else None,
            right=Tail(self.right.cycle, self.right.phase + j) if self.right else None,
        )


def d_beta(x: BiSequence, y: BiSequence, beta: float, horizon: int = 64) -> float:
    """``beta**N`` with ``N`` the largest integer such that ``x_i == y_i`` for ``|i| < N``.

    Sequences agreeing on ``|i| < horizon`` are identified (distance 0).
    """
    for N in range(horizon):
        if x[N] != y[N] or x[-N] != y[-N]:
            return beta ** N
    return 0.0


# ---------------------------------------------------------------------------
# Mixing constant
# ---------------------------------------------------------------------------

def mixing_constant(ts: TransitionStructure) -> int:
    """Least ``m >= 1`` with ``R**m`` entrywise positive; cached on ``ts``.

    Gives up after the Wielandt bound ``n**2 - 2n + 2``.
    """
    with ts._lock:
        if ts._mixing_known:
            if ts._mixing is None:
                raise NotPrimitive(f"SFT with n={ts.n} is not primitive")
            return ts._mixing

        n = ts.n
        cutoff = max(1, n * n - 2 * n + 2)
        A = ts.R.astype(np.int64)
        P = A.copy()
        found: Optional[int] = None
        for m in range(1, cutoff + 1):
            if (P > 0).all():
                found = m
                break
            P = np.minimum(P @ A, 1)
        ts._mixing = found
        ts._mixing_known = True

    if found is None:
        raise NotPrimitive(f"SFT with n={ts.n} is not primitive within {cutoff} powers")
    return found


def orbit_count(ts: TransitionStructure, p: int) -> int:
    """Number of points of period ``p`` (not necessarily least), ``trace(R**p)``."""
    A = ts.R.astype(object)
    return int(np.trace(np.linalg.matrix_power(A, p)))


# ---------------------------------------------------------------------------
# Periodic orbits
# ---------------------------------------------------------------------------

def _lyndon_words(ts: TransitionStructure, p_max: int, budget: Optional[int]) -> Iterator[Word]:
    """Admissible Lyndon words (primitive least rotations) of length <= p_max.

    Depth-first over the transition graph, extending prenecklaces: a prefix
    with period ``p`` may continue with ``a[t-p]`` (period kept) or any larger
    symbol (period becomes ``t+1``). The prefix is a Lyndon word exactly when
    its period equals its length. Yields in lexicographic order.
    """
    R = ts.R
    a = [0] * (p_max + 1)
    visited = 0
    # frames: (prefix length t, period p), with a candidate iterator alongside
    for first in range(ts.n):
        a[0] = first
        stack = [(1, 1)]
        if R[first, first]:
            yield (first,)
        it_stack: list[Iterator[int]] = [iter(range(a[0], ts.n))]
        while stack:
            t, p = stack[-1]
            if t == p_max:
                stack.pop()
                it_stack.pop()
                continue
            nxt = next(it_stack[-1], None)
            if nxt is None:
                stack.pop()
                it_stack.pop()
                continue
            if not R[a[t - 1], nxt]:
                continue
            visited += 1
            if budget is not None and visited > budget:
                raise BudgetExceeded(f"periodic enumeration exceeded {budget} words")
            a[t] = nxt
            q = p if nxt == a[t - p] else t + 1
            if q == t + 1 and R[nxt, a[0]]:
                yield tuple(a[:t + 1])
            stack.append((t + 1, q))
            it_stack.append(iter(range(a[t + 1 - q], ts.n)))


def periodic_words(
    ts: TransitionStructure, p_max: int, budget: Optional[int] = None
) -> list[PeriodicCertificate]:
    """All periodic orbits of period <= ``p_max``, one canonical certificate each.

    Ordered lexicographically by the least rotation.
    """
    if p_max < 1:
        raise InputError("p_max must be >= 1")
    return [PeriodicCertificate(w) for w in _lyndon_words(ts, p_max, budget)]


def enumeration_estimate(ts: TransitionStructure, p_max: int) -> int:
    """Upper estimate of the words visited when enumerating up to ``p_max``."""
    return sum(orbit_count(ts, p) for p in range(1, p_max + 1))


# ---------------------------------------------------------------------------
# Higher block presentation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BlockCoding:
    """Bijection between admissible ``k``-words and block symbols."""
    k: int
    words: tuple[Word, ...]
    index: dict = field(hash=False, compare=False)

    def symbol(self, w: Sequence[int]) -> int:
        return self.index[tuple(w)]

    def encode_cycle(self, word: Sequence[int]) -> Word:
        """Block symbols visited by the periodic orbit of ``word``."""
        w = tuple(word)
        p = len(w)
        ext = w * (self.k // p + 2)
        return tuple(self.index[ext[i:i + self.k]] for i in range(p))

    def decode_cycle(self, blocks: Sequence[int]) -> Word:
        """Original symbols of a cycle of block symbols (first symbol of each block)."""
        return tuple(self.words[b][0] for b in blocks)


def refine_blocks(ts: TransitionStructure, k: int) -> tuple[TransitionStructure, BlockCoding]:
    """The ``k``-block presentation: symbols are admissible ``k``-words,
    transitions admissible ``(k+1)``-words."""
    if k < 1:
        raise InputError("block length must be >= 1")
    words = tuple(admissible_words(ts, k))
    index = {w: i for i, w in enumerate(words)}
    size = len(words)
    M = np.zeros((size, size), dtype=int)
    for i, w in enumerate(words):
        for b in ts.successors(w[-1]):
            M[i, index[w[1:] + (b,)]] = 1
    return TransitionStructure(M), BlockCoding(k=k, words=words, index=index)


# ---------------------------------------------------------------------------
# Gluing
# ---------------------------------------------------------------------------

def shortest_connection(ts: TransitionStructure, a: int, b: int) -> Word:
    """Symbols to insert between ``a`` and ``b`` so that the junction is admissible.

    BFS over successors in increasing order; empty when ``a -> b`` is allowed.
    """
    if ts.allowed(a, b):
        return ()
    parent: dict[int, int] = {a: -1}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        for s in ts.successors(v):
            if s == b:
                path = [v]
                while parent[path[-1]] != -1:
                    path.append(parent[path[-1]])
                # drop the start symbol a
                return tuple(reversed(path[:-1]))
            if s not in parent:
                parent[s] = v
                queue.append(s)
    raise NotPrimitive(f"no admissible path from {a} to {b}")


@dataclass(frozen=True)
class GluedOrbit:
    """A periodic orbit shadowing a list of segments."""
    word: Word
    gaps: tuple[Word, ...]
    positions: tuple[int, ...]
    mixing: int

    @property
    def period(self) -> int:
        return len(self.word)

    @property
    def total_gap(self) -> int:
        return sum(len(g) for g in self.gaps)

    @cached_property
    def certificate(self) -> PeriodicCertificate:
        return PeriodicCertificate.of(self.word)

    def frequencies(self, depth: int) -> dict[Word, Fraction]:
        return word_frequencies(self.word, depth, cyclic=True)

    def frequency_bound(self, depth: int) -> Fraction:
        """Largest gap between orbit and joined-segment frequencies of depth-``depth`` words.

        Windows touching a gap or a segment boundary number at most
        ``total_gap + segments * (depth - 1)``.
        """
        if depth < 1:
            raise InputError("depth must be >= 1")
        if depth == 1:
            return Fraction(self.total_gap, self.period)
        inner = self.period - self.total_gap
        if inner < depth:
            return Fraction(1)
        return Fraction(self.total_gap + len(self.positions) * (depth - 1), inner - depth + 1)


def glue_orbits(ts: TransitionStructure, segments: Sequence[Sequence[int]]) -> GluedOrbit:
    """Close the segments, in order, into one periodic orbit with connecting gaps.

    The gap after segment ``i`` joins its last symbol to the first symbol of
    segment ``i+1`` (cyclically) and has length at most the mixing constant.
    """
    if not segments:
        raise InputError("need at least one segment")
    segs = [tuple(s) for s in segments]
    for s in segs:
        if not admissible(ts, s):
            raise InputError(f"segment {s} is not admissible")
    m = mixing_constant(ts)

    word: list[int] = []
    gaps: list[Word] = []
    positions: list[int] = []
    for i, seg in enumerate(segs):
        positions.append(len(word))
        word.extend(seg)
        nxt = segs[(i + 1) % len(segs)]
        gap = shortest_connection(ts, seg[-1], nxt[0])
        gaps.append(gap)
        word.extend(gap)
    return GluedOrbit(word=tuple(word), gaps=tuple(gaps), positions=tuple(positions), mixing=m)


def cycle_windows(word: Sequence[int], start: int, length: int) -> np.ndarray:
    """Array of shape ``(p, length)``: row ``i`` holds coordinates ``i+start .. i+start+length-1``."""
    w = np.asarray(word, dtype=np.int64)
    p = len(w)
    idx = (np.arange(p)[:, None] + start + np.arange(length)[None, :]) % p
    return w[idx]


def words_by_period(certs: Iterable[PeriodicCertificate]) -> dict[int, list[PeriodicCertificate]]:
    out: dict[int, list[PeriodicCertificate]] = {}
    for c in certs:
        out.setdefault(c.period, []).append(c)
    return out


def necklace_count(n: int, p: int) -> int:
    """Primitive orbits of least period ``p`` in the full ``n``-shift (Möbius inversion)."""
    def mobius(k: int) -> int:
        result, d = 1, 2
        while d * d <= k:
            if k % d == 0:
                k //= d
                if k % d == 0:
                    return 0
                result = -result
            d += 1
        return -result if k > 1 else result

    return sum(mobius(p // d) * n ** d for d in range(1, p + 1) if p % d == 0) // p



def random_primitive(rng: np.random.Generator, n: int, density: float = 0.7,
                     attempts: int = 200) -> TransitionStructure:
    """Random primitive SFT on ``n`` symbols; falls back to the full shift."""
    for _ in range(attempts):
        M = (rng.random((n, n)) < density).astype(int)
        if not M.any(axis=1).all() or not M.any(axis=0).all():
            continue
        ts = TransitionStructure(M)
        if ts.is_primitive:
            return ts
    return TransitionStructure.full_shift(n)


__all__ = [
    "Word", "TransitionStructure", "PeriodicCertificate", "Tail", "BiSequence",
    "GluedOrbit", "BlockCoding", "admissible", "admissible_words", "canonical_rotation",
    "primitive_root", "word_frequencies", "d_beta", "mixing_constant", "orbit_count",
    "periodic_words", "enumeration_estimate", "refine_blocks", "shortest_connection",
    "glue_orbits", "cycle_windows", "words_by_period", "necklace_count", "random_primitive",
]
