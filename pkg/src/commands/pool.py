"""Bounded worker pool for independent solver calls."""

from __future__ import annotations

import asyncio
from typing import Callable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")


async def fan_out(fn: Callable[[T], R], items: Sequence[T], limit: int) -> list[R]:
    """Run ``fn`` over ``items`` in worker threads, at most ``limit`` at a time.

    Results come back in input order whatever the completion order.
    """
    sem = asyncio.Semaphore(max(1, limit))

    async def run(item: T) -> R:
        async with sem:
            return await asyncio.to_thread(fn, item)

    return list(await asyncio.gather(*(run(item) for item in items)))
