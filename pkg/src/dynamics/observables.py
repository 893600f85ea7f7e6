"""
Named flow observables for fiber integration tests and the selftest sweeps.

    constant        Phi = c
    height_linear   Phi = a * s + b
    fiber_sine      Phi = amplitude * sin(omega * s + phase(x_0))
    indicator_poly  Phi = 1{x_0 == symbol} * (c0 + c1 s + c2 s^2)
"""
from __future__ import annotations

from typing import Callable

import numpy as np

from src.dynamics.suspension import FlowObservable
from src.errors import InputError


def constant(c: float = 1.0) -> FlowObservable:
    return FlowObservable(lambda x, s: np.full(np.shape(s), float(c)), 1, "constant", sup_norm=abs(c))


def height_linear(a: float = 2.0, b: float = 0.0) -> FlowObservable:
    return FlowObservable(lambda x, s: a * s + b, 1, "height_linear")


def fiber_sine(amplitude: float = 1.0, omega: float = 1.0,
               phases: tuple[float, ...] = (0.0,)) -> FlowObservable:
    """Sine along the fiber; the phase is picked by the base symbol ``x_0`` (cyclically)."""
    def fn(x, s):
        return amplitude * np.sin(omega * s + phases[x[0] % len(phases)])

    return FlowObservable(fn, 1, "fiber_sine", sup_norm=abs(amplitude))


def indicator_poly(symbol: int = 1, coeffs: tuple[float, ...] = (0.0, 1.0)) -> FlowObservable:
    poly = np.polynomial.Polynomial(coeffs)

    def fn(x, s):
        return poly(s) if x[0] == symbol else np.zeros(np.shape(s))

    return FlowObservable(fn, 1, "indicator_poly")


BUILTINS: dict[str, Callable[..., FlowObservable]] = {
    "constant": constant,
    "height_linear": height_linear,
    "fiber_sine": fiber_sine,
    "indicator_poly": indicator_poly,
}


def builtin(name: str, **params) -> FlowObservable:
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise InputError(f"unknown observable {name!r}; choose from {sorted(BUILTINS)}") from None
    return factory(**params)


def random_builtin(rng: np.random.Generator, n_symbols: int) -> FlowObservable:
    """A member of the built-in family with random parameters."""
    kind = sorted(BUILTINS)[int(rng.integers(len(BUILTINS)))]
    if kind == "constant":
        return constant(float(rng.uniform(-2, 2)))
    if kind == "height_linear":
        return height_linear(float(rng.uniform(-2, 2)), float(rng.uniform(-1, 1)))
    if kind == "fiber_sine":
        return fiber_sine(float(rng.uniform(0.5, 2)), float(rng.uniform(0.5, 3)),
                          tuple(float(v) for v in rng.uniform(0, np.pi, size=n_symbols)))
    return indicator_poly(int(rng.integers(n_symbols)), tuple(float(v) for v in rng.uniform(-1, 1, size=3)))
