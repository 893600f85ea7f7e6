"""Command dispatch table and result type."""

from __future__ import annotations

import dataclasses
from typing import Awaitable, Callable

from src.commands.context import RunContext


@dataclasses.dataclass
class CommandResult:
    """Returned by each command handler.

    ``exit_code`` is 0 unless the handler finished but a contract check
    failed (selftest failures report 2).
    """
    exit_code: int = 0
    summary: dict = dataclasses.field(default_factory=dict)


CommandHandler = Callable[[RunContext], Awaitable[CommandResult]]


def get_command_dispatch() -> dict[str, CommandHandler]:
    """Build and return the command → handler dispatch table.

    Imports are deferred so that ``--help`` does not pull in scipy.
    """
    from src.commands.map_optimize import handle_map_optimize
    from src.commands.flow_optimize import handle_flow_optimize
    from src.commands.reduce import handle_reduce
    from src.commands.lorenz import handle_lorenz
    from src.commands.selftest import handle_selftest

    return {
        "map-optimize": handle_map_optimize,
        "flow-optimize": handle_flow_optimize,
        "reduce": handle_reduce,
        "lorenz": handle_lorenz,
        "selftest": handle_selftest,
    }
