"""Command-line entry point: ``ergopt <command> [--config PATH] [flags]``."""

from __future__ import annotations

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from src.commands import CommandResult, get_command_dispatch
from src.commands.context import RunContext
from src.config import get_settings, override_settings
from src.errors import ErgoptError, InputError
from src.schemas.experiment import VALID_COMMANDS, validate_command_config
from src.utils.logging_config import RunAdapter, get_logger, setup_logging

_logger = logging.getLogger("ergopt.cli")

# Config fields that, when given, override the environment for the run.
_SETTING_FIELDS = ("tol", "exact_tol", "beta", "quad_nodes", "quad_tol")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ergopt",
        description="Ergodic optimization for suspension flows over subshifts of finite type.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in sorted(VALID_COMMANDS):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", help="output directory")
        p.add_argument("--tol", type=float, help="solver residual tolerance")
        p.add_argument("--seed", type=int, help="random seed")
        p.add_argument("--pmax", dest="p_max", type=int, help="largest orbit period")
    return parser


def load_config(path: Optional[Path]) -> dict:
    if path is None:
        return {}
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError(f"config {path} must hold a JSON object")
    raw.setdefault("base_dir", str(path.resolve().parent))
    return raw


def merge_flags(raw: dict, args: argparse.Namespace) -> dict:
    merged = dict(raw)
    for key in ("out", "tol", "seed", "p_max"):
        value = getattr(args, key)
        if value is not None:
            merged[key] = value
    return merged


async def run_command(command: str, raw: dict) -> CommandResult:
    ok, cfg = validate_command_config(command, raw)
    if not ok:
        raise InputError(cfg)

    settings = override_settings(**{k: getattr(cfg, k) for k in _SETTING_FIELDS if k in cfg.model_fields_set})
    logger = RunAdapter(get_logger("ergopt.commands"), command=command, seed=cfg.seed)
    ctx = RunContext(config=cfg, settings=settings, out_dir=Path(cfg.out), logger=logger)

    handler = get_command_dispatch()[command]
    logger.info("command started", extra={"event_type": "start"})
    result = await handler(ctx)
    logger.info("command finished", extra={"event_type": "finish",
                                           "metadata": {"exit_code": result.exit_code,
                                                        "outputs": ctx.outputs}})
    return result


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(get_settings().log_file)
    try:
        raw = merge_flags(load_config(args.config), args)
        result = asyncio.run(run_command(args.command, raw))
    except ErgoptError as exc:
        _logger.warning("command failed", extra={"metadata": {"code": exc.code, **exc.details}})
        print(f"error[{exc.code}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:
        _logger.exception("unexpected failure")
        print(f"error[INTERNAL]: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(result.summary, sort_keys=True, default=str))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
