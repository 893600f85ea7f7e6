"""lorenz: model validation, orbit table, constrained curves and the Dirac experiment."""

from __future__ import annotations

import asyncio
import math
from functools import partial

from src.commands import CommandResult
from src.commands.context import RunContext
from src.commands.pool import fan_out
from src.dynamics.lorenz import (
    LorenzModel,
    LorenzOrbit,
    assemble_curve,
    check_grid,
    constrained_point,
    dirac_mass_experiment,
    find_periodic,
    itineraries,
    lorenz_observable,
    near_singular_family,
    orbit_stats,
    roof_comparability,
    validate_model,
)
from src.errors import EmptyFamily, ModelValidationFailed
from src.schemas.files import CheckOut, ValidationReport
from src.utils.io import write_csv, write_json

DEFAULT_P_MAX = 12


def model_from_config(cfg) -> LorenzModel:
    return LorenzModel(gamma=cfg.gamma, a=cfg.a, lambda_y=cfg.lambda_y, lambda1=cfg.lambda1,
                       s0=cfg.s0, lambda2=cfg.lambda2, lambda3=cfg.lambda3)


def validation_payload(m: LorenzModel, report, seed: int) -> dict:
    comparability = None
    if report.passed:
        comp = roof_comparability(m)
        comparability = {"c1": comp.c1, "c2": comp.c2, "xbar": comp.xbar}
    return ValidationReport(
        passed=report.passed,
        checks=[CheckOut(name=c.name, passed=c.passed, detail=c.detail) for c in report.checks],
        min_alpha_prime=m.expansion,
        roof_comparability=comparability,
        seed=seed,
    ).model_dump(exclude_none=True)


async def find_catalogue(m: LorenzModel, p_max: int, threads: int) -> list[LorenzOrbit]:
    found = await fan_out(partial(find_periodic, m), itineraries(p_max), threads)
    return [o for o in found if o is not None]


async def handle_lorenz(ctx: RunContext) -> CommandResult:
    cfg = ctx.config
    m = model_from_config(cfg)

    report = validate_model(m, ctx.settings.lorenz_grid_points)
    write_json(ctx.output("validation.json"), validation_payload(m, report, cfg.seed))
    if not report.passed:
        raise ModelValidationFailed(f"model failed: {', '.join(report.failures)}")

    p_max = cfg.p_max or DEFAULT_P_MAX
    grid = check_grid(cfg.epsilon_grid)
    catalogue = await find_catalogue(m, p_max, ctx.settings.threads)
    ctx.logger.info("orbit catalogue", extra={"metadata": {"orbits": len(catalogue), "p_max": p_max}})

    write_csv(ctx.output("orbits.csv"), ["itinerary", "period", "min_abs_x", "roof_mean", "lyap"], [
        (o.itinerary, o.period, o.min_abs_x, s.roof_sum / o.period, s.lyap)
        for o, s in ((o, orbit_stats(m, o, lorenz_observable(m, "constant"))) for o in catalogue)
    ])

    shapes = {}
    for name in cfg.observables:
        obs = lorenz_observable(m, name)
        values = [orbit_stats(m, o, obs).flow_avg for o in catalogue]
        points = await fan_out(lambda e: constrained_point(e, catalogue, values), grid, ctx.settings.threads)
        curve = assemble_curve(points)
        for w in curve.warnings:
            ctx.logger.warning(w, extra={"metadata": {"observable": name}})
        write_csv(ctx.output(f"curve_{name}.csv"), ["eps", "M_hat", "period", "itinerary"],
                  [(p.eps, p.m_hat, p.period, p.itinerary) for p in curve.points])
        shapes[name] = {"shape": curve.shape, "warnings": curve.warnings}
    write_json(ctx.output("shapes.json"), {"observables": shapes, "p_max": p_max, "seed": cfg.seed})

    family = near_singular_family(m, p_max, catalogue)
    dirac = {"eps": cfg.dirac_eps, "orbits": [], "bound_ok": True, "increasing": True}
    try:
        exp = await asyncio.to_thread(dirac_mass_experiment, m, family, cfg.dirac_eps)
        dirac.update(orbits=[r.to_dict() for r in exp.rows], bound_ok=exp.bound_ok, increasing=exp.increasing)
    except EmptyFamily:
        ctx.logger.warning("near-singular family is empty")
    write_json(ctx.output("dirac.json"), {**dirac, "seed": cfg.seed})

    write_json(ctx.output("plot_spec.json"), {
        "figures": [
            {"file": f"curve_{name}.csv", "x": "eps", "y": "M_hat", "xscale": "log", "title": name}
            for name in cfg.observables
        ] + [{"file": "orbits.csv", "x": "roof_mean", "y": "lyap", "kind": "scatter"}],
    })

    summary = {"orbits": len(catalogue), "shapes": {k: v["shape"] for k, v in shapes.items()},
               "dirac_final": dirac["orbits"][-1]["f_eps"] if dirac["orbits"] else math.nan}
    return CommandResult(summary=summary)
