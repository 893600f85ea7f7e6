"""
Geometric Lorenz model through its one-dimensional quotient.

    alpha(x) = sign(x) * ((1 + a) |x|**gamma - 1)        x in [-1, 1] \\ {0}
    beta(x, y) = (lambda_y y + sign(x) (1 - lambda_y)) / 2
    roof(x) = -log|x| / lambda1 + s0

Periodic orbits are found by composing the branches along an itinerary over
{L, R}; flow averages along them weight each point by the roof. Constrained
optima restrict to orbits avoiding ``(-eps, eps)``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import bisect

from src.config import get_settings
from src.dynamics.sft import TransitionStructure, canonical_rotation, periodic_words, primitive_root
from src.dynamics.suspension import gauss_legendre
from src.errors import BudgetExceeded, CurveNotMonotone, EmptyFamily, InputError, SingularInput

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
LETTERS = "LR"
# Fixed points closer to the discontinuity than this are rejected.
SINGULAR_GUARD = 1e-10
ORBIT_TOL = 1e-10


@dataclass(frozen=True)
class LorenzModel:
    gamma: float = 0.75
    a: float = 0.95
    lambda_y: float = 0.5
    lambda1: float = 1.0
    s0: float = 1.0
    lambda2: Optional[float] = None
    lambda3: Optional[float] = None

    @property
    def expansion(self) -> float:
        """``(1 + a) gamma``, the minimum of ``alpha'`` (attained at ``|x| = 1``)."""
        return (1.0 + self.a) * self.gamma


# ---------------------------------------------------------------------------
# Maps
# ---------------------------------------------------------------------------

def _check_point(x: float) -> float:
    x = float(x)
    if x == 0.0:
        raise SingularInput("x = 0 is the discontinuity")
    if not -1.0 <= x <= 1.0:
        raise InputError(f"x = {x} outside [-1, 1]")
    return x


def alpha(m: LorenzModel, x: float) -> float:
    x = _check_point(x)
    sign = 1.0 if x > 0 else -1.0
    return sign * ((1.0 + m.a) * abs(x) ** m.gamma - 1.0)


def alpha_prime(m: LorenzModel, x: float) -> float:
    x = _check_point(x)
    return (1.0 + m.a) * m.gamma * abs(x) ** (m.gamma - 1.0)


def alpha_array(m: LorenzModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return np.sign(x) * ((1.0 + m.a) * np.abs(x) ** m.gamma - 1.0)


def alpha_prime_array(m: LorenzModel, x: np.ndarray) -> np.ndarray:
    return (1.0 + m.a) * m.gamma * np.abs(np.asarray(x, dtype=float)) ** (m.gamma - 1.0)


def poincare(m: LorenzModel, x: float, y: float) -> tuple[float, float]:
    """``P(x, y) = (alpha(x), beta(x, y))``."""
    if not -1.0 <= y <= 1.0:
        raise InputError(f"y = {y} outside [-1, 1]")
    x_new = alpha(m, x)
    sign = 1.0 if x > 0 else -1.0
    return x_new, 0.5 * (m.lambda_y * y + sign * (1.0 - m.lambda_y))


def roof(m: LorenzModel, x: float) -> float:
    x = _check_point(x)
    return -math.log(abs(x)) / m.lambda1 + m.s0


def roof_array(m: LorenzModel, x: np.ndarray) -> np.ndarray:
    return -np.log(np.abs(np.asarray(x, dtype=float))) / m.lambda1 + m.s0


@dataclass(frozen=True)
class RoofComparability:
    """``c1 log alpha'(x) <= roof(x) <= c2 log alpha'(x)`` for ``|x| <= xbar``."""
    c1: float
    c2: float
    xbar: float

    def holds(self, m: LorenzModel, x: float, slack: float = 1e-12) -> bool:
        la = math.log(alpha_prime(m, x))
        r = roof(m, x)
        return self.c1 * la - slack <= r <= self.c2 * la + slack


def roof_comparability(m: LorenzModel, xbar: Optional[float] = None) -> RoofComparability:
    """Constants from ``h(L) = (L / lambda1 + s0) / (log K + (1 - gamma) L)`` with ``L = -log|x|``.

    ``h`` is a ratio of affine functions, hence monotone on ``[L(xbar), inf)``:
    its extremes are at ``L(xbar)`` and the limit ``1 / (lambda1 (1 - gamma))``.
    """
    xbar = xbar if xbar is not None else get_settings().roof_xbar
    if not 0.0 < xbar < 1.0:
        raise InputError("xbar must lie in (0, 1)")
    log_k = math.log(m.expansion)
    L = -math.log(xbar)
    denom = log_k + (1.0 - m.gamma) * L
    if denom <= 0:
        raise InputError("log alpha' is not positive at xbar")
    at_bar = (L / m.lambda1 + m.s0) / denom
    limit = 1.0 / (m.lambda1 * (1.0 - m.gamma))
    return RoofComparability(min(at_bar, limit), max(at_bar, limit), xbar)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ModelValidation:
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def validate_model(m: LorenzModel, grid_points: Optional[int] = None) -> ModelValidation:
    """Check every defining condition; never raises for a bad model."""
    grid_points = grid_points or get_settings().lorenz_grid_points
    checks: list[Check] = []

    def add(name: str, passed: bool, detail: str) -> None:
        checks.append(Check(name, bool(passed), detail))

    add("gamma_in_unit_interval", 0.0 < m.gamma < 1.0, f"gamma = {m.gamma}")
    add("alpha_one_below_one", 0.0 < m.a < 1.0, f"alpha(1) = a = {m.a}")
    add("y_contraction", 0.0 < m.lambda_y < 1.0, f"lambda_y = {m.lambda_y}")
    add("roof_positive", m.lambda1 > 0.0 and m.s0 > 0.0, f"lambda1 = {m.lambda1}, s0 = {m.s0}")

    valid_gamma = 0.0 < m.gamma < 1.0
    if valid_gamma:
        near = alpha_array(m, np.array([1e-300]))[0]
        add("alpha_zero_limit", abs(near + 1.0) < 1e-9, f"alpha(0+) ~ {near:.12f}")
    else:
        add("alpha_zero_limit", False, "needs 0 < gamma < 1")

    xs = np.linspace(-1.0, 1.0, 2 * grid_points + 1)
    xs = xs[xs != 0.0]
    odd = np.array_equal(alpha_array(m, -xs), -alpha_array(m, xs))
    add("odd_symmetry", odd, f"{len(xs)} sample points")

    add("expansion_analytic", m.expansion > SQRT2, f"(1+a)*gamma = {m.expansion:.6f} vs sqrt2 = {SQRT2:.6f}")
    grid = np.linspace(1e-6, 1.0, grid_points)
    grid_min = float(alpha_prime_array(m, grid).min())
    add("expansion_grid", grid_min > SQRT2, f"min alpha' on grid = {grid_min:.6f}")

    probes = alpha_prime_array(m, np.array([1e-3, 1e-6, 1e-12]))
    add("derivative_unbounded", valid_gamma and bool(probes[0] < probes[1] < probes[2]),
        f"alpha'(1e-12) = {probes[2]:.3e}")

    if m.lambda2 is not None or m.lambda3 is not None:
        l2, l3 = m.lambda2, m.lambda3
        ok = l2 is not None and l3 is not None and 0.0 < l3 < m.lambda1 < l2
        add("eigenvalue_ordering", ok, f"lambda3 = {l3}, lambda1 = {m.lambda1}, lambda2 = {l2}")

    report = ModelValidation(tuple(checks))
    if not report.passed:
        logger.warning("lorenz model failed validation", extra={"metadata": {"failures": report.failures}})
    return report


# ---------------------------------------------------------------------------
# Periodic orbits
# ---------------------------------------------------------------------------

def _branch(m: LorenzModel, letter: str, x: float) -> float:
    if letter == "R":
        return (1.0 + m.a) * max(x, 0.0) ** m.gamma - 1.0
    return 1.0 - (1.0 + m.a) * max(-x, 0.0) ** m.gamma


def _branch_inverse(m: LorenzModel, letter: str, y: float) -> float:
    if letter == "R":
        return ((y + 1.0) / (1.0 + m.a)) ** (1.0 / m.gamma)
    return -(((1.0 - y) / (1.0 + m.a)) ** (1.0 / m.gamma))


def _domain(letter: str) -> tuple[float, float]:
    return (0.0, 1.0) if letter == "R" else (-1.0, 0.0)


def _image(m: LorenzModel, letter: str) -> tuple[float, float]:
    return (-1.0, m.a) if letter == "R" else (-m.a, 1.0)


def _cylinder(m: LorenzModel, itinerary: str) -> Optional[tuple[float, float]]:
    """Points of the first letter's domain following the whole itinerary, by backward propagation."""
    lo, hi = _domain(itinerary[-1])
    for letter in reversed(itinerary[:-1]):
        ilo, ihi = _image(m, letter)
        lo, hi = max(lo, ilo), min(hi, ihi)
        if lo > hi:
            return None
        lo, hi = _branch_inverse(m, letter, lo), _branch_inverse(m, letter, hi)
    return lo, hi


def canonical_itinerary(itinerary: str) -> str:
    if not itinerary or set(itinerary) - set(LETTERS):
        raise InputError(f"itinerary {itinerary!r} must be a non-empty word over L, R")
    word = tuple(LETTERS.index(ch) for ch in itinerary)
    return "".join(LETTERS[s] for s in canonical_rotation(primitive_root(word)))


@dataclass(frozen=True)
class LorenzOrbit:
    itinerary: str
    points: tuple[float, ...]

    @property
    def period(self) -> int:
        return len(self.points)

    @property
    def min_abs_x(self) -> float:
        return min(abs(x) for x in self.points)

    def residual(self, m: LorenzModel) -> float:
        """Largest ``|alpha(x_i) - x_{i+1}|``."""
        pts = self.points
        return max(abs(alpha(m, pts[i]) - pts[(i + 1) % len(pts)]) for i in range(len(pts)))

    def verify(self, m: LorenzModel, tol: float = ORBIT_TOL) -> bool:
        signs_ok = all((x > 0) == (ch == "R") for x, ch in zip(self.points, self.itinerary))
        return signs_ok and self.residual(m) <= tol


def find_periodic(m: LorenzModel, itinerary: str) -> Optional[LorenzOrbit]:
    """The periodic orbit with the given itinerary, or None if it does not exist."""
    itin = canonical_itinerary(itinerary)
    box = _cylinder(m, itin)
    if box is None:
        return None
    lo, hi = box

    def composed(x: float) -> float:
        for letter in itin:
            x = _branch(m, letter, x)
        return x

    def g(x: float) -> float:
        return composed(x) - x

    g_lo, g_hi = g(lo), g(hi)
    if g_lo > 0.0 or g_hi < 0.0:
        return None
    if g_lo == 0.0:
        x0 = lo
    elif g_hi == 0.0:
        x0 = hi
    else:
        x0 = bisect(g, lo, hi, xtol=1e-300, maxiter=2000)

    points = [x0]
    for letter in itin[:-1]:
        points.append(_branch(m, letter, points[-1]))
    if min(abs(x) for x in points) < SINGULAR_GUARD:
        logger.debug("rejected near-singular orbit", extra={"metadata": {"itinerary": itin}})
        return None
    orbit = LorenzOrbit(itin, tuple(points))
    if not orbit.verify(m):
        logger.debug("orbit failed verification", extra={"metadata": {"itinerary": itin}})
        return None
    return orbit


def itineraries(p_max: int) -> list[str]:
    """Canonical primitive itineraries of length ``<= p_max`` in lexicographic order."""
    limit = get_settings().lorenz_p_limit
    if p_max > limit:
        raise BudgetExceeded(f"lorenz period {p_max} above limit {limit}", p_max=p_max, limit=limit)
    if p_max < 1:
        raise InputError("p_max must be >= 1")
    return ["".join(LETTERS[s] for s in c.word)
            for c in periodic_words(TransitionStructure.full_shift(2), p_max)]


@lru_cache(maxsize=16)
def _catalogue(m: LorenzModel, p_max: int) -> tuple[LorenzOrbit, ...]:
    found = (find_periodic(m, it) for it in itineraries(p_max))
    return tuple(o for o in found if o is not None)


def enumerate_orbits(m: LorenzModel, p_max: int, eps: float = 0.0,
                     catalogue: Optional[Sequence[LorenzOrbit]] = None) -> list[LorenzOrbit]:
    """Existing orbits of period ``<= p_max`` with ``min |x_i| >= eps``."""
    if eps < 0:
        raise InputError("eps must be >= 0")
    orbits = catalogue if catalogue is not None else _catalogue(m, p_max)
    return [o for o in orbits if o.period <= p_max and o.min_abs_x >= eps]


# ---------------------------------------------------------------------------
# Observables and orbit statistics
# ---------------------------------------------------------------------------

PointFunction = Callable[[np.ndarray], np.ndarray]
FiberFunction = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class LorenzObservable:
    """``point(x)`` for fiber-constant observables; ``fiber(x, s)`` when the value varies up the fiber."""
    name: str
    point: PointFunction
    fiber: Optional[FiberFunction] = None


@dataclass(frozen=True)
class OrbitStats:
    map_avg: float
    flow_avg: float
    lyap: float
    roof_sum: float


def orbit_stats(m: LorenzModel, orbit: LorenzOrbit, phi: LorenzObservable | PointFunction,
                nodes: Optional[int] = None) -> OrbitStats:
    obs = phi if isinstance(phi, LorenzObservable) else LorenzObservable("function", phi)
    xs = np.asarray(orbit.points)
    rho = roof_array(m, xs)
    values = np.asarray(obs.point(xs), dtype=float) * np.ones_like(xs)
    roof_sum = math.fsum(rho)
    if obs.fiber is None:
        weighted = math.fsum(values * rho)
    else:
        nodes = nodes or get_settings().quad_nodes
        weighted = math.fsum(gauss_legendre(lambda s, x=x: obs.fiber(x, s), r, nodes)[0]
                             for x, r in zip(xs, rho))
    return OrbitStats(
        map_avg=math.fsum(values) / len(xs),
        flow_avg=weighted / roof_sum,
        lyap=math.fsum(np.log(alpha_prime_array(m, xs))) / len(xs),
        roof_sum=roof_sum,
    )


def _bump(x: np.ndarray, centre: float, width: float) -> np.ndarray:
    return np.exp(-(((np.abs(x) - centre) / width) ** 2))


def lorenz_observable(m: LorenzModel, name: str) -> LorenzObservable:
    """Built-in observables.

    ``constant``       1
    ``log_singular``   ``-log|x|``, largest near the discontinuity
    ``log_derivative`` ``log alpha'(x)``
    ``bump``           Gaussian bump in ``|x|`` centred on the period-2 orbit
    ``bump_spike``     the bump plus a tall spike on ``|x| < 0.02``
    """
    if name == "constant":
        return LorenzObservable(name, lambda x: np.ones_like(np.asarray(x, dtype=float)))
    if name == "log_singular":
        return LorenzObservable(name, lambda x: -np.log(np.abs(x)))
    if name == "log_derivative":
        return LorenzObservable(name, lambda x: np.log(alpha_prime_array(m, x)))
    if name in ("bump", "bump_spike"):
        two = find_periodic(m, "LR")
        centre = abs(two.points[0]) if two is not None else 0.5
        if name == "bump":
            return LorenzObservable(name, lambda x: _bump(x, centre, 0.05))
        return LorenzObservable(
            name,
            lambda x: _bump(x, centre, 0.05) + 40.0 * np.maximum(0.0, 1.0 - np.abs(x) / 0.02),
        )
    raise InputError(f"unknown lorenz observable {name!r}")


LORENZ_OBSERVABLES = ("constant", "log_singular", "log_derivative", "bump", "bump_spike")


# ---------------------------------------------------------------------------
# Constrained optima
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurvePoint:
    eps: float
    m_hat: float
    itinerary: Optional[str]
    period: Optional[int]


@dataclass
class ConstrainedCurve:
    points: list[CurvePoint]
    shape: str
    warnings: list[str] = field(default_factory=list)

    @property
    def values(self) -> list[float]:
        return [p.m_hat for p in self.points]


def constrained_point(eps: float, orbits: Sequence[LorenzOrbit], values: Sequence[float]) -> CurvePoint:
    """Best flow average among the orbits clearing ``(-eps, eps)``; NaN when none does."""
    best: Optional[int] = None
    for i, o in enumerate(orbits):
        if o.min_abs_x >= eps and (best is None or values[i] > values[best]):
            best = i
    if best is None:
        return CurvePoint(eps, math.nan, None, None)
    return CurvePoint(eps, float(values[best]), orbits[best].itinerary, orbits[best].period)


def classify_shape(values: Sequence[float], tol: float = 1e-9) -> str:
    """Label a curve ordered by decreasing eps.

    ``plateau`` when the last two defined values agree, ``strict_decrease``
    when every step strictly grows, ``mixed`` otherwise; ``undetermined``
    with fewer than two defined values.
    """
    vals = [v for v in values if not math.isnan(v)]
    if len(vals) < 2:
        return "undetermined"
    if abs(vals[-1] - vals[-2]) <= tol:
        return "plateau"
    if all(b - a > tol for a, b in zip(vals, vals[1:])):
        return "strict_decrease"
    return "mixed"


def assemble_curve(points: list[CurvePoint]) -> ConstrainedCurve:
    """Check nested-maximum monotonicity and classify."""
    warnings = [f"no orbit clears eps = {p.eps}" for p in points if math.isnan(p.m_hat)]
    prev = -math.inf
    for p in points:
        v = -math.inf if math.isnan(p.m_hat) else p.m_hat
        if v < prev:
            raise CurveNotMonotone(f"M_hat dropped from {prev} to {v} at eps = {p.eps}", eps=p.eps)
        prev = v
    return ConstrainedCurve(points, classify_shape([p.m_hat for p in points]), warnings)


def check_grid(eps_grid: Sequence[float]) -> list[float]:
    grid = [float(e) for e in eps_grid]
    if not grid:
        raise InputError("eps grid is empty")
    if any(e < 0 for e in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
        raise InputError("eps grid must be non-negative and strictly decreasing")
    return grid


def constrained_M_curve(m: LorenzModel, phi: LorenzObservable, eps_grid: Sequence[float], p_max: int,
                        catalogue: Optional[Sequence[LorenzOrbit]] = None) -> ConstrainedCurve:
    """``M_hat(eps)``: best flow average over orbits of period ``<= p_max`` avoiding ``(-eps, eps)``."""
    grid = check_grid(eps_grid)
    orbits = enumerate_orbits(m, p_max, 0.0, catalogue)
    values = [orbit_stats(m, o, phi).flow_avg for o in orbits]
    curve = assemble_curve([constrained_point(e, orbits, values) for e in grid])
    for w in curve.warnings:
        logger.warning(w)
    return curve


# ---------------------------------------------------------------------------
# Near-singular family and Dirac experiment
# ---------------------------------------------------------------------------

def near_singular_family(m: LorenzModel, p_max: Optional[int] = None,
                         catalogue: Optional[Sequence[LorenzOrbit]] = None) -> list[LorenzOrbit]:
    """Orbits scanned by decreasing ``min |x_i|``, each kept when its roof mean beats the last kept one.

    ``p_max`` defaults to the Lorenz period limit. Ties in depth are broken
    by itinerary.
    """
    p_max = p_max or get_settings().lorenz_p_limit
    orbits = sorted(enumerate_orbits(m, p_max, 0.0, catalogue), key=lambda o: (-o.min_abs_x, o.itinerary))
    family: list[LorenzOrbit] = []
    last = -math.inf
    for o in orbits:
        mean = math.fsum(roof_array(m, np.asarray(o.points))) / o.period
        if mean > last:
            family.append(o)
            last = mean
    logger.debug("near-singular family", extra={"metadata": {"p_max": p_max, "orbits": len(family)}})
    return family


@dataclass(frozen=True)
class DiracRow:
    itinerary: str
    min_abs_x: float
    roof_mean: float
    lyap: float
    c_eps: float
    f_eps: float
    bound: float

    def to_dict(self) -> dict:
        return {
            "itinerary": self.itinerary,
            "min_abs_x": self.min_abs_x,
            "roof_mean": self.roof_mean,
            "lyap": self.lyap,
            "c_eps": self.c_eps,
            "f_eps": self.f_eps,
            "bound": self.bound,
        }


@dataclass(frozen=True)
class DiracExperiment:
    eps: float
    rows: tuple[DiracRow, ...]

    @property
    def bound_ok(self) -> bool:
        return all(r.f_eps >= r.bound - 1e-9 for r in self.rows)

    @property
    def increasing(self) -> bool:
        return all(b.f_eps > a.f_eps for a, b in zip(self.rows, self.rows[1:]))


def dirac_mass_experiment(m: LorenzModel, family: Iterable[LorenzOrbit], eps: float) -> DiracExperiment:
    """Roof-time share spent near the singularity along a family of orbits.

    ``C_eps`` is the largest roof value at orbit points with ``|x| >= eps``
    (``roof(eps)`` if there is none) and ``f_eps`` the share of roof time in
    excess of ``C_eps``.
    """
    family = list(family)
    if not family:
        raise EmptyFamily("orbit family is empty")
    if not 0.0 < eps < 1.0:
        raise InputError("eps must lie in (0, 1)")
    rows = []
    for o in family:
        xs = np.asarray(o.points)
        rho = roof_array(m, xs)
        off = rho[np.abs(xs) >= eps]
        c_eps = float(off.max()) if len(off) else roof(m, eps)
        total = math.fsum(rho)
        mean = total / len(xs)
        f_eps = math.fsum(np.maximum(0.0, rho - c_eps)) / total
        rows.append(DiracRow(
            itinerary=o.itinerary,
            min_abs_x=o.min_abs_x,
            roof_mean=mean,
            lyap=math.fsum(np.log(alpha_prime_array(m, xs))) / len(xs),
            c_eps=c_eps,
            f_eps=f_eps,
            bound=(1.0 - eps) * (1.0 - c_eps / mean),
        ))
    return DiracExperiment(eps, tuple(rows))


# ---------------------------------------------------------------------------
# Locally eventually onto
# ---------------------------------------------------------------------------

def _merge(intervals: list[tuple[float, float]]) -> list[tuple[float, float]]:
    out: list[tuple[float, float]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1] = (out[-1][0], max(out[-1][1], hi))
        else:
            out.append((lo, hi))
    return out


def locally_eventually_onto(m: LorenzModel, interval: tuple[float, float], n_max: int = 60) -> Optional[int]:
    """Least ``N`` with ``alpha^N(I)`` covering ``[alpha(-1), alpha(1)]``, or None within ``n_max``."""
    lo, hi = interval
    if not -1.0 <= lo < hi <= 1.0:
        raise InputError(f"bad interval {interval}")
    target_lo, target_hi = -m.a, m.a
    pieces = [(lo, hi)]
    for n in range(1, n_max + 1):
        images = []
        for a, b in pieces:
            if a < 0.0:
                images.append((_branch(m, "L", a), _branch(m, "L", min(b, 0.0))))
            if b > 0.0:
                images.append((_branch(m, "R", max(a, 0.0)), _branch(m, "R", b)))
        pieces = _merge(images)
        if any(a <= target_lo + 1e-12 and b >= target_hi - 1e-12 for a, b in pieces):
            return n
    return None
