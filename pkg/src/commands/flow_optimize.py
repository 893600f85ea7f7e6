"""flow-optimize: maximal flow average over a symbolic suspension."""

from __future__ import annotations

import asyncio

from src.commands import CommandResult
from src.commands.context import RunContext
from src.dynamics.optimizer import maximize_flow
from src.dynamics.potentials import OneSidedPotential
from src.dynamics.suspension import SuspensionSpec
from src.errors import InputError, ResidualTooLarge
from src.schemas.files import ResultFile
from src.utils.io import read_potential, read_sft, read_suspension, write_json, write_potential


def _load_spec(ctx: RunContext) -> SuspensionSpec:
    cfg = ctx.config
    if cfg.suspension is not None:
        return read_suspension(ctx.resolve(cfg.suspension))
    ts = read_sft(ctx.resolve(cfg.sft))
    roof = read_potential(ctx.resolve(cfg.roof), ts)
    if not isinstance(roof, OneSidedPotential):
        raise InputError("roof must be a one-sided potential")
    return SuspensionSpec(ts, roof)


async def handle_flow_optimize(ctx: RunContext) -> CommandResult:
    cfg = ctx.config
    spec = _load_spec(ctx)
    phi = read_potential(ctx.resolve(cfg.potential), spec.ts)
    if not isinstance(phi, OneSidedPotential):
        raise InputError("flow-optimize expects a one-sided potential; run reduce first")

    result = await asyncio.to_thread(maximize_flow, spec.ts, phi, spec.roof)
    if result.residual > cfg.tol:
        raise ResidualTooLarge(f"zero-maximum residual {result.residual:.3e} exceeds {cfg.tol:.1e}")

    write_potential(ctx.output("reduced_potential.json"), result.reduced)
    payload = ResultFile(**result.to_dict(), command=cfg.command, seed=cfg.seed,
                         reduced_potential="reduced_potential.json").model_dump()
    write_json(ctx.output("result.json"), payload)
    ctx.logger.info("flow optimum", extra={"event_type": "flow_optimize",
                                           "metadata": {"value": result.value, "residual": result.residual}})
    return CommandResult(summary=payload)
