"""
Symbolic suspension flows.

Points are ``(x, s)`` with ``x`` a two-sided sequence and ``0 <= s < r(x)``;
the flow moves up the fiber at unit speed and jumps ``(x, r(x)) -> (sigma x, 0)``.
Flow observables integrate along fibers to base potentials, so flow averages
over periodic orbits become cycle ratios on the base.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import roots_legendre

from src.config import get_settings
from src.dynamics.potentials import OneSidedPotential, ReferenceScheme
from src.dynamics.sft import (
    BiSequence,
    PeriodicCertificate,
    TransitionStructure,
    admissible_words,
    d_beta,
)
from src.errors import InputError, NonPositiveRoof, QuadratureNotConverged

logger = logging.getLogger(__name__)

# Heights within this relative distance of the roof snap to the next fiber.
_SNAP = 1e-12


@dataclass(frozen=True, eq=False)
class SuspensionSpec:
    ts: TransitionStructure
    roof: OneSidedPotential

    def __post_init__(self):
        if self.roof.ts != self.ts:
            raise InputError("roof lives on a different SFT")
        if self.roof.min() <= 0.0:
            raise NonPositiveRoof(f"roof minimum {self.roof.min()} is not positive")

    @property
    def r_min(self) -> float:
        return self.roof.min()

    def r(self, x: BiSequence) -> float:
        return self.roof(x)

    def point(self, base: BiSequence, height: float) -> "SuspensionPoint":
        r = self.r(base)
        if not 0.0 <= height < r:
            raise InputError(f"height {height} outside [0, {r})")
        return SuspensionPoint(base, float(height))

    @cached_property
    def scheme(self) -> ReferenceScheme:
        return ReferenceScheme.shortest_cycles(self.ts)


@dataclass(frozen=True)
class SuspensionPoint:
    base: BiSequence
    height: float


def flow(spec: SuspensionSpec, p: SuspensionPoint, t: float) -> SuspensionPoint:
    """``X^t(x, s) = (sigma^n x, s')`` with ``sum_{i<n} r(sigma^i x) + s' = t + s``."""
    if t < 0:
        raise InputError("flow time must be non-negative")
    x = p.base
    total = p.height + t
    while True:
        r = spec.r(x)
        if total < r and r - total > _SNAP * max(1.0, r):
            return SuspensionPoint(x, total)
        total = max(0.0, total - r)
        x = x.shift(1)


# ---------------------------------------------------------------------------
# Metric and segment lengths
# ---------------------------------------------------------------------------

def d_pi(spec: SuspensionSpec, p: SuspensionPoint, q: SuspensionPoint,
         beta: Optional[float] = None, normalize: bool = True) -> float:
    """Distance on the suspension: the best of the same-fiber, forward-wrap and backward-wrap branches.

    Heights are divided by the roof at their base point when ``normalize``
    is set; with a constant unit roof both conventions agree.
    """
    beta = beta if beta is not None else get_settings().beta
    x, y = p.base, q.base
    if normalize:
        t, s = p.height / spec.r(x), q.height / spec.r(y)
        top_t, top_s = 1.0, 1.0
    else:
        t, s = p.height, q.height
        top_t, top_s = spec.r(x), spec.r(y)
    same = d_beta(x, y, beta) + abs(t - s)
    up = d_beta(x.shift(1), y, beta) + (top_t - t) + s
    down = d_beta(x, y.shift(1), beta) + (top_s - s) + t
    return min(same, up, down)


@dataclass(frozen=True)
class HorizontalSegment:
    """Points ``(x, t r(x))`` to ``(y, t r(y))`` at a common normalized height ``t`` in ``[0, 1]``."""
    x: BiSequence
    y: BiSequence
    t: float


@dataclass(frozen=True)
class VerticalSegment:
    """Fiber over ``x`` from height ``t`` to height ``s``."""
    x: BiSequence
    t: float
    s: float


def segment_length(spec: SuspensionSpec, segment: HorizontalSegment | VerticalSegment,
                   beta: Optional[float] = None) -> float:
    beta = beta if beta is not None else get_settings().beta
    if isinstance(segment, HorizontalSegment):
        if not 0.0 <= segment.t <= 1.0:
            raise InputError("horizontal segment height must lie in [0, 1]")
        t = segment.t
        return ((1 - t) * d_beta(segment.x, segment.y, beta)
                + t * d_beta(segment.x.shift(1), segment.y.shift(1), beta))
    return abs(segment.t - segment.s) / spec.r(segment.x)


def comparability_envelope(spec: SuspensionSpec, samples: int, seed: int,
                           beta: Optional[float] = None) -> float:
    """Largest observed ``d_pi / chain`` over random two-segment chains.

    Each chain runs horizontally from ``p`` to the fiber of ``q`` at ``p``'s
    normalized height, then vertically to ``q``.
    """
    rng = np.random.default_rng(seed)
    beta = beta if beta is not None else get_settings().beta
    worst = 0.0
    for _ in range(samples):
        p = random_point(spec, rng)
        q = random_point(spec, rng)
        tp = p.height / spec.r(p.base)
        chain = (segment_length(spec, HorizontalSegment(p.base, q.base, tp), beta)
                 + segment_length(spec, VerticalSegment(q.base, tp * spec.r(q.base), q.height), beta))
        d = d_pi(spec, p, q, beta)
        if chain > 0:
            worst = max(worst, d / chain)
    return worst


def random_point(spec: SuspensionSpec, rng: np.random.Generator, window: int = 8) -> SuspensionPoint:
    """Random admissible window around the origin, scheme-completed, with a uniform height."""
    ts = spec.ts
    w = [int(rng.integers(ts.n))]
    for _ in range(2 * window):
        succ = ts.successors(w[-1])
        w.append(succ[int(rng.integers(len(succ)))])
    base = spec.scheme.complete(w, -window)
    return SuspensionPoint(base, float(rng.uniform(0.0, spec.r(base))))


# ---------------------------------------------------------------------------
# Flow observables
# ---------------------------------------------------------------------------

FiberFunction = Callable[[BiSequence, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FlowObservable:
    """``Phi(x, s)`` reading base coordinates ``0..depth-1``.

    ``fn`` takes a base sequence and an array of heights and returns an array.
    """
    fn: FiberFunction
    depth: int = 1
    name: str = "observable"
    sup_norm: Optional[float] = None
    holder: Optional[tuple[float, float]] = None
    offset: float = field(default=0.0)

    def __call__(self, x: BiSequence, s):
        return np.asarray(self.fn(x, np.asarray(s, dtype=float)), dtype=float) + self.offset

    def shifted(self, c: float) -> "FlowObservable":
        return FlowObservable(self.fn, self.depth, self.name, None, self.holder, self.offset + c)

    def combine(self, a: float, other: "FlowObservable") -> "FlowObservable":
        """``a * self + other``."""
        f, g = self, other

        def fn(x, s):
            return a * f(x, s) + g(x, s)

        return FlowObservable(fn, max(f.depth, g.depth), f"{a}*{f.name}+{g.name}")


def quotient_defect(spec: SuspensionSpec, Phi: FlowObservable, samples: int = 32, seed: int = 0) -> float:
    """Largest sampled ``|Phi(x, r(x)) - Phi(sigma x, 0)|``; zero for observables on the quotient."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = random_point(spec, rng).base
        top = float(Phi(x, spec.r(x)))
        bottom = float(Phi(x.shift(1), 0.0))
        worst = max(worst, abs(top - bottom))
    return worst


def gauss_legendre(f: Callable[[np.ndarray], np.ndarray], length: float, nodes: int) -> tuple[float, float]:
    """``int_0^length f`` with ``nodes`` and ``2 * nodes`` points; returns (value, error estimate)."""
    def rule(k: int) -> float:
        xi, wi = roots_legendre(k)
        s = 0.5 * length * (xi + 1.0)
        return 0.5 * length * math.fsum(wi * np.asarray(f(s), dtype=float))

    coarse, fine = rule(nodes), rule(2 * nodes)
    return fine, abs(fine - coarse)


class InducedPotential(NamedTuple):
    potential: OneSidedPotential
    error: float


def induce_observable(spec: SuspensionSpec, Phi: FlowObservable,
                      nodes: Optional[int] = None, tol: Optional[float] = None) -> InducedPotential:
    """``phi(x) = int_0^{r(x)} Phi(x, s) ds`` tabulated on admissible depth-``D`` words."""
    settings = get_settings()
    nodes = nodes or settings.quad_nodes
    tol = tol if tol is not None else settings.quad_tol
    depth = max(spec.roof.depth, Phi.depth)
    scheme = spec.scheme

    table = {}
    worst = 0.0
    for w in admissible_words(spec.ts, depth):
        x = scheme.complete(w, 0)
        value, err = gauss_legendre(lambda s: Phi(x, s), spec.r(x), nodes)
        table[w] = value
        worst = max(worst, err)
    if worst > tol:
        raise QuadratureNotConverged(f"fiber quadrature error {worst:.3e} exceeds {tol:.1e}",
                                     error=worst, nodes=nodes)
    return InducedPotential(OneSidedPotential(spec.ts, depth, table), worst)


def flow_average(spec: SuspensionSpec, Phi: FlowObservable, cert: PeriodicCertificate | Sequence[int],
                 induced: Optional[OneSidedPotential] = None) -> float:
    """Time average of ``Phi`` along the flow orbit over ``cert``: ``sum(phi) / sum(r)`` on the cycle."""
    word = cert.word if isinstance(cert, PeriodicCertificate) else tuple(cert)
    phi = induced if induced is not None else induce_observable(spec, Phi).potential
    return phi.cycle_average(word) / spec.roof.cycle_average(word)


def surjectivity_witness(spec: SuspensionSpec, phi: OneSidedPotential) -> FlowObservable:
    """The observable ``phi(x) / r(x)``, constant along fibers, whose fiber integral is ``phi``."""
    depth = max(phi.depth, spec.roof.depth)

    def fn(x, s):
        return np.full(np.shape(s), phi(x) / spec.r(x))

    return FlowObservable(fn, depth, "witness")


def orbit_time_average(spec: SuspensionSpec, Phi: FlowObservable, cert: PeriodicCertificate | Sequence[int],
                       rtol: float = 1e-12, atol: float = 1e-14) -> float:
    """Time average of ``Phi`` over one period, by ODE time-stepping along the flow.

    Starts at ``(x, 0)`` on the periodic base point and integrates
    ``d/dt I = Phi(X^t p)`` fiber by fiber, moving between fibers with :func:`flow`.
    """
    word = cert.word if isinstance(cert, PeriodicCertificate) else tuple(cert)
    p = SuspensionPoint(BiSequence.periodic(word), 0.0)
    total_time = 0.0
    integral = 0.0
    for _ in range(len(word)):
        x, s0 = p.base, p.height
        span = spec.r(x) - s0
        sol = solve_ivp(lambda t, y: [float(Phi(x, s0 + t))], (0.0, span), [0.0],
                        method="DOP853", rtol=rtol, atol=atol)
        integral += float(sol.y[0, -1])
        total_time += span
        p = flow(spec, p, span)
    return integral / total_time
