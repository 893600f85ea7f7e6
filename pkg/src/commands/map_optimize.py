"""map-optimize: maximal Birkhoff average of a potential on an SFT."""

from __future__ import annotations

import asyncio

from src.commands import CommandResult
from src.commands.context import RunContext
from src.dynamics.optimizer import maximize_map
from src.dynamics.potentials import TwoSidedPotential, reduce_two_sided
from src.schemas.files import ResultFile
from src.utils.io import read_potential, read_sft, write_json


async def handle_map_optimize(ctx: RunContext) -> CommandResult:
    cfg = ctx.config
    ts = read_sft(ctx.resolve(cfg.sft))
    psi = read_potential(ctx.resolve(cfg.potential), ts)
    if isinstance(psi, TwoSidedPotential):
        ctx.logger.info("reducing two-sided potential before optimizing",
                        extra={"metadata": {"radius": psi.radius}})
        psi = reduce_two_sided(psi)

    result = await asyncio.to_thread(maximize_map, ts, psi)

    payload = ResultFile(**result.to_dict(), command=cfg.command, seed=cfg.seed).model_dump(exclude_none=True)
    write_json(ctx.output("result.json"), payload)
    ctx.logger.info("map optimum", extra={"event_type": "map_optimize",
                                          "metadata": {"value": result.value,
                                                       "period": result.certificate.period}})
    return CommandResult(summary=payload)
