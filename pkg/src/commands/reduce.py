"""reduce: two-sided potential to a one-sided one with the same cycle averages."""

from __future__ import annotations

import asyncio

from src.commands import CommandResult
from src.commands.context import RunContext
from src.dynamics.potentials import TwoSidedPotential, reduce_two_sided
from src.dynamics.sft import periodic_words
from src.errors import InputError, ResidualTooLarge
from src.utils.io import read_potential, read_sft, write_json, write_potential


async def handle_reduce(ctx: RunContext) -> CommandResult:
    cfg = ctx.config
    ts = read_sft(ctx.resolve(cfg.sft))
    phi = read_potential(ctx.resolve(cfg.potential), ts)
    if not isinstance(phi, TwoSidedPotential):
        raise InputError("reduce expects a two-sided potential")

    psi = await asyncio.to_thread(reduce_two_sided, phi)
    p_verify = cfg.p_max or cfg.verify_period
    orbits = [
        {"word": list(c.word), "delta": abs(psi.cycle_average(c.word) - phi.cycle_average(c.word))}
        for c in periodic_words(ts, p_verify)
    ]
    worst = max((o["delta"] for o in orbits), default=0.0)
    verification = {
        "max_delta": worst,
        "orbits": orbits,
        "passed": worst <= cfg.exact_tol,
        "period_max": p_verify,
        "seed": cfg.seed,
    }

    write_potential(ctx.output("potential.json"), psi)
    write_json(ctx.output("verification.json"), verification)
    if not verification["passed"]:
        raise ResidualTooLarge(f"cycle average moved by {worst:.3e}")
    ctx.logger.info("reduced potential", extra={"event_type": "reduce",
                                                "metadata": {"depth": psi.depth, "max_delta": worst}})
    return CommandResult(summary={"depth": psi.depth, "max_delta": worst})
