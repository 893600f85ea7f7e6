"""
Ergodic optimization for locally constant potentials.

A depth-``d`` potential becomes a vertex weight on the ``d``-block graph; the
maximal Birkhoff average is then the maximum cycle mean (Karp), and for a
suspension the maximum cycle ratio ``sum(phi) / sum(r)`` (Dinkelbach steps on
``lambda`` with Karp on ``phi - lambda * r``, bisecting only when a step stalls).

Every result carries a periodic certificate whose exact cycle average is the
reported value, and a residual comparing it with the solver's own bound.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Optional, TYPE_CHECKING

import numpy as np

from src.config import get_settings
from src.dynamics.potentials import OneSidedPotential, TwoSidedPotential
from src.dynamics.sft import (
    PeriodicCertificate,
    TransitionStructure,
    Word,
    canonical_rotation,
    enumeration_estimate,
    periodic_words,
    refine_blocks,
    words_by_period,
)
from src.errors import BudgetExceeded, EmptyGraph, InputError, NonPositiveRoof

if TYPE_CHECKING:
    from src.dynamics.suspension import FlowObservable, SuspensionSpec

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Graph and result types
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Directed graph with per-edge weight and optional per-edge roof.

    ``labels[v]``, when present, is the block word of vertex ``v``; cycles
    decode to the first symbol of each block.
    """
    n_vertices: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    roof: Optional[np.ndarray] = None
    labels: Optional[tuple[Word, ...]] = None

    @classmethod
    def from_edges(cls, n_vertices: int, edges: list[tuple[int, int, float]],
                   roofs: Optional[list[float]] = None) -> "WeightedGraph":
        src = np.array([e[0] for e in edges], dtype=np.int64)
        dst = np.array([e[1] for e in edges], dtype=np.int64)
        w = np.array([e[2] for e in edges], dtype=float)
        r = None if roofs is None else np.asarray(roofs, dtype=float)
        return cls(n_vertices, src, dst, w, r)

    @cached_property
    def in_edges(self) -> np.ndarray:
        """``(V, maxdeg)`` edge indices entering each vertex, padded with -1."""
        V = self.n_vertices
        deg = np.bincount(self.dst, minlength=V)
        width = max(1, int(deg.max()) if len(deg) else 1)
        table = np.full((V, width), -1, dtype=np.int64)
        fill = np.zeros(V, dtype=np.int64)
        for e, v in enumerate(self.dst):
            table[v, fill[v]] = e
            fill[v] += 1
        return table

    def decode(self, vertices: tuple[int, ...]) -> Word:
        if self.labels is None:
            return tuple(vertices)
        return tuple(self.labels[v][0] for v in vertices)


@dataclass
class MaximizationResult:
    value: float
    certificate: PeriodicCertificate
    residual: float
    method: str
    reduced: Optional[OneSidedPotential] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "certificate": self.certificate.to_dict(),
            "residual": self.residual,
            "method": self.method,
        }


@dataclass(frozen=True)
class _Cycle:
    vertices: tuple[int, ...]
    edges: tuple[int, ...]
    word: Word
    mean: float


# ---------------------------------------------------------------------------
# Karp
# ---------------------------------------------------------------------------

def _karp(g: WeightedGraph, w: np.ndarray) -> tuple[float, _Cycle]:
    """Karp's bound and a certified optimal cycle for edge weights ``w``.

    Every closed sub-walk of the maximum-weight ``V``-edge walk into the
    Karp vertex has mean exactly the optimum; the simple ones are candidates.
    """
    V = g.n_vertices
    if V == 0 or len(g.src) == 0:
        raise EmptyGraph("graph has no vertices or no edges")

    pred = g.in_edges
    pad = pred < 0
    safe = np.where(pad, 0, pred)
    from_v = g.src[safe]
    ew = w[safe]
    rows = np.arange(V)

    D = np.full((V + 1, V), -np.inf)
    D[0] = 0.0
    choice = np.full((V + 1, V), -1, dtype=np.int64)
    for k in range(1, V + 1):
        cand = np.where(pad, -np.inf, D[k - 1][from_v] + ew)
        j = np.argmax(cand, axis=1)
        D[k] = cand[rows, j]
        choice[k] = np.where(np.isfinite(D[k]), pred[rows, j], -1)

    with np.errstate(invalid="ignore"):
        steps = (V - np.arange(V))[:, None]
        ratios = (D[V][None, :] - D[:V]) / steps
    ratios = np.where(np.isnan(ratios) | np.isposinf(-D[:V]), np.inf, ratios)
    per_vertex = np.where(np.isfinite(D[V]), ratios.min(axis=0), -np.inf)
    v_star = int(np.argmax(per_vertex))
    bound = float(per_vertex[v_star])

    walk_v = [0] * (V + 1)
    walk_e = [0] * (V + 1)
    walk_v[V] = v_star
    for k in range(V, 0, -1):
        e = int(choice[k][walk_v[k]])
        walk_e[k] = e
        walk_v[k - 1] = int(g.src[e])

    candidates: list[_Cycle] = []
    for i in range(V):
        for j in range(i + 1, V + 1):
            if walk_v[j] == walk_v[i]:
                verts = tuple(walk_v[i:j])
                if len(set(verts)) == len(verts):
                    edges = tuple(walk_e[i + 1:j + 1])
                    mean = math.fsum(w[list(edges)]) / len(edges)
                    candidates.append(_Cycle(verts, edges, canonical_rotation(g.decode(verts)), mean))
                break
    if not candidates:
        raise EmptyGraph("no cycle found on the critical walk")

    best = max(c.mean for c in candidates)
    tie = get_settings().exact_tol * max(1.0, abs(best))
    chosen = min((c for c in candidates if c.mean >= best - tie), key=lambda c: c.word)
    return bound, chosen


def max_mean_cycle(g: WeightedGraph, weight: Optional[np.ndarray] = None) -> MaximizationResult:
    """Maximum cycle mean with an attaining simple cycle as certificate."""
    w = g.weight if weight is None else np.asarray(weight, dtype=float)
    bound, cyc = _karp(g, w)
    return MaximizationResult(
        value=cyc.mean,
        certificate=PeriodicCertificate.of(cyc.word),
        residual=abs(bound - cyc.mean),
        method="karp",
    )


def max_ratio_cycle(g: WeightedGraph) -> MaximizationResult:
    """Maximum of ``sum(weight) / sum(roof)`` over cycles.

    Dinkelbach iteration: ``lambda`` starts at the exact ratio of the best
    cycle for ``w - min(w/r) r`` and moves to the exact ratio of the Karp
    cycle for ``w - lambda r`` while that ratio is larger. If a step stalls
    above the zero tolerance, one bisection step on ``[lambda, max w/r]``
    runs instead. Stops once ``max_mean_cycle(w - lambda r) == 0`` within
    tolerance.
    """
    if g.roof is None:
        raise InputError("ratio cycle needs a roof weight on every edge")
    if len(g.roof) and float(g.roof.min()) <= 0.0:
        raise NonPositiveRoof(f"roof weight {float(g.roof.min())} is not positive")
    if len(g.src) == 0:
        raise EmptyGraph("graph has no edges")

    settings = get_settings()
    phi, r = g.weight, g.roof

    def ratio(c: _Cycle) -> float:
        e = list(c.edges)
        return math.fsum(phi[e]) / math.fsum(r[e])

    edge_ratios = phi / r
    hi = float(edge_ratios.max())
    _, best = _karp(g, phi - float(edge_ratios.min()) * r)
    lam = ratio(best)
    scale = max(1.0, float(np.abs(phi).max()), abs(lam) * float(r.max()))
    zero_tol = settings.exact_tol * scale

    iterations = 0
    for iterations in range(1, settings.bisection_max_iter + 1):
        _, at_lam = _karp(g, phi - lam * r)
        if at_lam.mean <= zero_tol:
            break
        # a cycle strictly beats lam: Dinkelbach step
        if ratio(at_lam) > lam:
            lam, best = ratio(at_lam), at_lam
            continue
        mid = 0.5 * (lam + hi)
        if hi - lam <= zero_tol:
            break
        _, at_mid = _karp(g, phi - mid * r)
        if at_mid.mean >= 0.0 and ratio(at_mid) > lam:
            lam, best = ratio(at_mid), at_mid
        else:
            hi = mid
    logger.debug("ratio cycle converged", extra={"metadata": {"iterations": iterations, "lambda": lam}})

    residual_bound, at_opt = _karp(g, phi - lam * r)
    return MaximizationResult(
        value=lam,
        certificate=PeriodicCertificate.of(best.word),
        residual=max(abs(at_opt.mean), abs(residual_bound)),
        method="ratio_dinkelbach",
    )


# ---------------------------------------------------------------------------
# Potentials on SFTs
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def _block_graph(ts: TransitionStructure, depth: int) -> WeightedGraph:
    bts, coding = refine_blocks(ts, depth)
    src, dst = np.nonzero(bts.R)
    return WeightedGraph(
        n_vertices=bts.n,
        src=src.astype(np.int64),
        dst=dst.astype(np.int64),
        weight=np.zeros(len(src)),
        labels=coding.words,
    )


def block_graph(ts: TransitionStructure, psi: OneSidedPotential,
                roof: Optional[OneSidedPotential] = None) -> WeightedGraph:
    """Edge weights ``psi(source block)`` (and ``roof(source block)``) on the depth block graph."""
    depth = psi.depth if roof is None else max(psi.depth, roof.depth)
    base = _block_graph(ts, depth)
    psi = psi.lift(depth)

    def edge_values(pot: OneSidedPotential) -> np.ndarray:
        vertex = np.array([pot.value(w) for w in base.labels])
        return vertex[base.src]

    return WeightedGraph(
        base.n_vertices, base.src, base.dst,
        weight=edge_values(psi),
        roof=None if roof is None else edge_values(roof.lift(depth)),
        labels=base.labels,
    )


def _check_ts(ts: TransitionStructure, pot) -> None:
    if pot.ts != ts:
        raise InputError("potential lives on a different SFT")


def maximize_map(ts: TransitionStructure, psi: OneSidedPotential) -> MaximizationResult:
    """``M(psi, sigma)`` with a certificate in the original symbols."""
    _check_ts(ts, psi)
    return max_mean_cycle(block_graph(ts, psi))


def maximize_flow(ts: TransitionStructure, phi: OneSidedPotential, r: OneSidedPotential) -> MaximizationResult:
    """Maximal flow average ``max int(phi) / int(r)`` and the reduced potential ``phi - M r``.

    The residual combines the ratio solver's zero condition with the
    map-level maximum of the reduced potential.
    """
    _check_ts(ts, phi)
    _check_ts(ts, r)
    if r.min() <= 0.0:
        raise NonPositiveRoof(f"roof minimum {r.min()} is not positive")
    result = max_ratio_cycle(block_graph(ts, phi, r))
    depth = max(phi.depth, r.depth)
    reduced = phi.lift(depth) - result.value * r.lift(depth)
    zero = maximize_map(ts, reduced)
    result.residual = max(result.residual, abs(zero.value))
    result.reduced = reduced
    if result.residual > get_settings().tol:
        logger.warning("flow optimum residual above tolerance",
                       extra={"metadata": {"residual": result.residual, "value": result.value}})
    return result


def orbit_values(
    ts: TransitionStructure,
    objective: OneSidedPotential | TwoSidedPotential,
    p_max: int,
    roof: Optional[OneSidedPotential] = None,
    budget: Optional[int] = None,
) -> tuple[list[PeriodicCertificate], np.ndarray]:
    """Every periodic orbit of period ``<= p_max`` with its average (or ratio)."""
    _check_ts(ts, objective)
    if roof is not None:
        _check_ts(ts, roof)
        if roof.min() <= 0.0:
            raise NonPositiveRoof(f"roof minimum {roof.min()} is not positive")
    budget = budget if budget is not None else get_settings().orbit_budget
    estimate = enumeration_estimate(ts, p_max)
    if estimate > budget:
        raise BudgetExceeded(f"about {estimate} periodic words up to period {p_max}, budget {budget}",
                             estimate=estimate, budget=budget)

    certs = periodic_words(ts, p_max)
    position = {c.word: i for i, c in enumerate(certs)}
    values = np.empty(len(certs))
    for p, group in words_by_period(certs).items():
        arr = np.array([c.word for c in group], dtype=np.int64)
        sums = objective.cycle_sums(arr)
        vals = sums / roof.cycle_sums(arr) if roof is not None else sums / p
        for c, v in zip(group, vals):
            values[position[c.word]] = v
    return certs, values


def brute_force_periodic(
    ts: TransitionStructure,
    objective: OneSidedPotential | TwoSidedPotential,
    p_max: int,
    roof: Optional[OneSidedPotential] = None,
    budget: Optional[int] = None,
) -> MaximizationResult:
    """Best average (or ratio, with ``roof``) over orbits of period ``<= p_max``.

    Ties go to the lexicographically least certificate.
    """
    certs, values = orbit_values(ts, objective, p_max, roof, budget)
    i = int(np.argmax(values))
    return MaximizationResult(value=float(values[i]), certificate=certs[i], residual=0.0, method="brute_force")


def uniqueness_gap(
    ts: TransitionStructure, psi: OneSidedPotential | TwoSidedPotential, p_max: int,
    roof: Optional[OneSidedPotential] = None,
) -> float:
    """Best minus second-best orbit value over periods ``<= p_max`` (``inf`` with one orbit)."""
    _, values = orbit_values(ts, psi, p_max, roof)
    if len(values) < 2:
        return math.inf
    top = np.sort(values)[-2:]
    return float(top[1] - top[0])


def level_of(ts: TransitionStructure, psi: OneSidedPotential) -> float:
    """The maximization level ``k`` with ``psi`` in ``C_k``."""
    return maximize_map(ts, psi).value


def normalize_pi0(ts: TransitionStructure, psi: OneSidedPotential) -> OneSidedPotential:
    """``psi - M(psi)``, a potential with maximal average zero."""
    return psi - level_of(ts, psi)


def normalize_Pi0(spec: "SuspensionSpec", Phi: "FlowObservable") -> "FlowObservable":
    """``Phi - M(Phi)`` for a flow observable; its flow maximum is zero."""
    from src.dynamics.suspension import induce_observable

    induced = induce_observable(spec, Phi)
    level = maximize_flow(spec.ts, induced.potential, spec.roof).value
    return Phi.shifted(-level)
