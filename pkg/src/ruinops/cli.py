"""Command-line front end.

Three subcommands under one binary:

* ``ruin``: ruin-probability curves. The file's discount rate is forced
  to zero and the penalty to the ruin indicator.
* ``penalty``: discounted-penalty curves with the file's discount rate
  and penalty (``--delta-zero`` reduces it to ``ruin``).
* ``selftest``: the acceptance matrix, quick subset or full.

``ruin`` and ``penalty`` print one JSON report to stdout: the effective
model echo, per-route values on the requested grid, a pairwise agreement
matrix and per-route diagnostics. ``--csv DIR`` additionally writes one
``<route>.csv`` per route (columns ``u,value`` plus ``std_error`` for the
simulation route) and ``--plots`` renders PNG figures into the same
directory.

Exit codes: 0 success (refused routes are reported, not fatal), 2 model
or flag validation failure (no partial report), 3 a requested route
crashed (the report still carries the partial results).
"""
from __future__ import annotations

import csv as csv_module
import json
import math
import os
import sys
from dataclasses import dataclass, field, replace

import click
import numpy as np

from . import acceptance
from .asymptotics import (
    AsymptoticForm,
    ExpansionConditionError,
    PremiumClassError,
    TurningPointError,
    gs_asymptote,
    ruin_asymptote,
)
from .gerber_shiu import AssemblyError, phi
from .greens import sylvester_lemma_residual, wronskian_table
from .model import (
    ModelValidationError,
    RiskModel,
    RuinIndicatorPenalty,
    model_from_file,
    model_to_dict,
)
from .montecarlo import SimConfig, estimate_penalty, estimate_ruin
from .numerics import BranchSensitivityWarning
from .operator import build_operator, fundamental_system
from . import __version__

ROUTES = ("closed_form", "greens", "asymptotic", "monte_carlo")


# ---------------------------------------------------------------------------
# Report type
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RunReport:
    """Everything one command run produced, JSON-ready.

    ``routes`` maps a route name to a dict with ``values`` (aligned to
    ``u``), ``std_error`` (simulation only), ``diagnostics``, ``warnings``
    and exactly one of ``refusal`` (the route does not apply to this
    model) or ``error`` (the route was attempted and crashed) when
    ``values`` is null.
    """

    command: str
    model: dict
    u: tuple[float, ...]
    settings: dict
    routes: dict[str, dict]
    agreement: dict[str, dict]
    notes: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "model": self.model,
            "u": list(self.u),
            "settings": dict(self.settings),
            "routes": {k: dict(v) for k, v in self.routes.items()},
            "agreement": {k: dict(v) for k, v in self.agreement.items()},
            "notes": list(self.notes),
        }


def _finite_list(values) -> list:
    """Floats with non-finite entries as null (strict-JSON safe); an
    asymptote with a negative power is one honest source of inf at u = 0."""
    return [float(v) if math.isfinite(float(v)) else None for v in values]


def _route_entry(values=None, std_error=None, diagnostics=None,
                 warnings_=None, refusal=None, error=None) -> dict:
    return {
        "values": None if values is None else _finite_list(values),
        "std_error": None if std_error is None else _finite_list(std_error),
        "diagnostics": diagnostics or {},
        "warnings": warnings_ or [],
        "refusal": refusal,
        "error": error,
    }


def _as_array(values) -> np.ndarray:
    return np.array([np.nan if v is None else float(v) for v in values],
                    dtype=float)


# ---------------------------------------------------------------------------
# Route runners
# ---------------------------------------------------------------------------


def _run_closed_form(command: str, model: RiskModel, us: np.ndarray, *,
                     tol: float, **_: object) -> dict:
    import warnings as warnings_mod

    try:
        with warnings_mod.catch_warnings(record=True) as caught:
            warnings_mod.simplefilter("always")
            sol = phi(model, route="closed_form", tol=tol)
            vals = np.asarray(sol(us), dtype=float)
    except AssemblyError as exc:
        if "[dispatch]" in str(exc):
            return _route_entry(refusal=str(exc))
        return _route_entry(error=str(exc))

    notes = [str(w.message) for w in caught]
    if model.premium.family == "ExpDecay":
        # The hypergeometric display for this premium evaluates 2F1 past
        # its branch point; surface its warning even though the returned
        # values come from the quadrature form.
        from .gerber_shiu import ruin_exponential_premium
        with warnings_mod.catch_warnings(record=True) as caught2:
            warnings_mod.simplefilter("always")
            disp = ruin_exponential_premium(
                model.premium.c, model.interclaims.lam, model.claims.mu,
                float(us[0]), display=True)
        notes.extend(str(w.message) for w in caught2
                     if issubclass(w.category, BranchSensitivityWarning))
        diag = {"gamma": sol.gamma, "display_value_at_first_u": float(disp)}
    else:
        diag = {"gamma": sol.gamma}
    return _route_entry(values=vals, diagnostics=diag, warnings_=notes)


def _run_greens(command: str, model: RiskModel, us: np.ndarray, *,
                tol: float, **_: object) -> dict:
    try:
        ode = build_operator(model)
        fs = fundamental_system(ode, model)
        sol = phi(model, route="greens", fs=fs, tol=tol)
        vals = np.asarray(sol(us), dtype=float)
        table = wronskian_table(fs)
        sylvester = sylvester_lemma_residual(table, 1, 1)
        boundary = abs(float(sol.gg(float(fs.grid[0]))))
    except AssemblyError as exc:
        return _route_entry(error=str(exc))
    except Exception as exc:
        return _route_entry(error=f"{type(exc).__name__}: {exc}")
    diag = dict(sol.diagnostics)
    diag.update({"gamma": sol.gamma,
                 "boundary_residual": boundary,
                 "sylvester_residual": sylvester})
    return _route_entry(values=vals, diagnostics=diag)


def _run_asymptotic(command: str, model: RiskModel, us: np.ndarray,
                    **_: object) -> dict:
    try:
        if model.delta == 0.0 and isinstance(model.penalty,
                                             RuinIndicatorPenalty):
            form: AsymptoticForm = ruin_asymptote(model)
        else:
            form = gs_asymptote(model)
    except (PremiumClassError, TurningPointError, ExpansionConditionError,
            ValueError) as exc:
        return _route_entry(refusal=f"{type(exc).__name__}: {exc}")
    vals = np.asarray(form(us), dtype=float)
    blob = form.to_json()
    diag = {"terms": blob["terms"],
            "validity": blob["validity"],
            "ratio_checkpoints": blob["ratio_checkpoints"],
            "diagnostics": blob["diagnostics"]}
    return _route_entry(values=vals, diagnostics=diag)


def _run_monte_carlo(command: str, model: RiskModel, us: np.ndarray, *,
                     paths: int, seed: int, **_: object) -> dict:
    estimator = estimate_ruin if command == "ruin" else estimate_penalty
    means, ses = [], []
    censored = 0
    diag_last = {}
    try:
        for k, u0 in enumerate(us):
            cfg = SimConfig(paths=paths, seed=(seed + k) % 2**64)
            est = estimator(model, float(u0), cfg)
            means.append(est.mean)
            ses.append(est.std_error)
            censored += est.n_censored
            diag_last = est.diagnostics
    except ModelValidationError as exc:
        return _route_entry(refusal=f"{type(exc).__name__}: {exc}")
    except Exception as exc:
        return _route_entry(error=f"{type(exc).__name__}: {exc}")
    diag = {"censored_paths": censored,
            "paths_per_point": paths,
            "seed_rule": "point k uses seed + k",
            "barrier": diag_last.get("barrier"),
            "barrier_bound": diag_last.get("barrier_bound")}
    return _route_entry(values=means, std_error=ses, diagnostics=diag)


_RUNNERS = {
    "closed_form": _run_closed_form,
    "greens": _run_greens,
    "asymptotic": _run_asymptotic,
    "monte_carlo": _run_monte_carlo,
}


# ---------------------------------------------------------------------------
# Agreement matrix
# ---------------------------------------------------------------------------


def _agreement_matrix(routes: dict[str, dict], us: np.ndarray) -> dict:
    """Pairwise max relative deviation; z-scores against the simulation
    route. Pairs with an asymptotic member are compared only from the
    form's validity point on (the form is a large-u description)."""
    names = [n for n, r in routes.items() if r["values"] is not None]
    matrix: dict[str, dict] = {n: {} for n in names}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            cell = _agreement_cell(a, routes[a], b, routes[b], us)
            matrix[a][b] = cell
            matrix[b][a] = cell
    return matrix


def _validity_mask(name: str, route: dict, us: np.ndarray) -> np.ndarray:
    if name != "asymptotic":
        return np.ones_like(us, dtype=bool)
    validity = route["diagnostics"].get("validity")
    if validity is None:
        return np.zeros_like(us, dtype=bool)
    return us >= float(validity) - 1e-12


def _agreement_cell(name_a: str, ra: dict, name_b: str, rb: dict,
                    us: np.ndarray) -> dict:
    va_full = _as_array(ra["values"])
    vb_full = _as_array(rb["values"])
    mask = (_validity_mask(name_a, ra, us) & _validity_mask(name_b, rb, us)
            & np.isfinite(va_full) & np.isfinite(vb_full))
    cell: dict = {"points_used": int(np.sum(mask))}
    if not np.any(mask):
        cell["max_rel_dev"] = None
        return cell
    va, vb = va_full[mask], vb_full[mask]
    cell["max_rel_dev"] = float(np.max(
        np.abs(va - vb) / np.maximum(np.maximum(np.abs(va), np.abs(vb)),
                                     1e-300)))
    if "monte_carlo" in (name_a, name_b):
        mc, other = (ra, rb) if name_a == "monte_carlo" else (rb, ra)
        se = _as_array(mc["std_error"])[mask]
        vm = _as_array(mc["values"])[mask]
        vo = (vb_full if name_a == "monte_carlo" else va_full)[mask]
        # A zero standard error means the simulation saw no events at that
        # surplus; a z-score carries no information there.
        live = se > 0.0
        cell["degenerate_points"] = int(np.sum(~live))
        cell["max_abs_z"] = (float(np.max(np.abs(vo[live] - vm[live])
                                          / se[live]))
                             if np.any(live) else None)
    return cell


# ---------------------------------------------------------------------------
# CSV and figures
# ---------------------------------------------------------------------------


def _write_csvs(directory: str, us: np.ndarray, routes: dict) -> list[str]:
    os.makedirs(directory, exist_ok=True)
    written = []
    for name, rr in routes.items():
        if rr["values"] is None:
            continue
        path = os.path.join(directory, f"{name}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv_module.writer(fh)
            if rr["std_error"] is None:
                writer.writerow(["u", "value"])
                writer.writerows(zip(us.tolist(), rr["values"]))
            else:
                writer.writerow(["u", "value", "std_error"])
                writer.writerows(zip(us.tolist(), rr["values"],
                                     rr["std_error"]))
        written.append(path)
    return written


def _write_plots(directory: str, command: str, us: np.ndarray,
                 routes: dict) -> list[str]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    os.makedirs(directory, exist_ok=True)
    written = []

    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    positive = True
    for name, rr in routes.items():
        if rr["values"] is None:
            continue
        vals = _as_array(rr["values"])
        finite = vals[np.isfinite(vals)]
        positive = positive and bool(np.all(finite > 0.0)) and finite.size > 0
        if rr["std_error"] is not None:
            se = _as_array(rr["std_error"])
            ax.errorbar(us, vals, yerr=3.0 * se, fmt=".", capsize=2,
                        label=f"{name} (3 s.e.)")
        else:
            ax.plot(us, vals, label=name)
    if positive:
        ax.set_yscale("log")
    ax.set_xlabel("initial surplus u")
    ax.set_ylabel("value")
    ax.set_title(f"{command}: route comparison")
    ax.legend()
    fig.tight_layout()
    curves = os.path.join(directory, f"{command}_curves.png")
    fig.savefig(curves, dpi=150)
    plt.close(fig)
    written.append(curves)

    mc = routes.get("monte_carlo")
    exact = [(n, rr) for n, rr in routes.items()
             if n != "monte_carlo" and rr["values"] is not None]
    if mc and mc["values"] is not None and exact:
        fig, ax = plt.subplots(figsize=(7.0, 4.5))
        se = _as_array(mc["std_error"])
        se[se <= 0.0] = np.nan
        v_mc = _as_array(mc["values"])
        for name, rr in exact:
            z = (_as_array(rr["values"]) - v_mc) / se
            ax.plot(us, z, marker="o", label=name)
        ax.axhline(3.0, color="grey", lw=0.8, ls="--")
        ax.axhline(-3.0, color="grey", lw=0.8, ls="--")
        ax.set_xlabel("initial surplus u")
        ax.set_ylabel("z-score vs simulation")
        ax.set_title(f"{command}: agreement with simulation")
        ax.legend()
        fig.tight_layout()
        zpath = os.path.join(directory, f"{command}_zscores.png")
        fig.savefig(zpath, dpi=150)
        plt.close(fig)
        written.append(zpath)
    return written


# ---------------------------------------------------------------------------
# Shared command body
# ---------------------------------------------------------------------------


def _parse_grid(spec: str, model: RiskModel) -> np.ndarray:
    try:
        start_s, stop_s, count_s = spec.split(":")
        start, stop, count = float(start_s), float(stop_s), int(count_s)
    except ValueError:
        raise click.BadParameter(
            f"grid must be start:stop:count, got {spec!r}", param_hint="--u")
    if count < 1:
        raise click.BadParameter("count must be >= 1", param_hint="--u")
    if stop < start:
        raise click.BadParameter("stop must be >= start", param_hint="--u")
    if start < model.u_min - 1e-12:
        raise click.BadParameter(
            f"start {start} is below the model's domain edge {model.u_min}",
            param_hint="--u")
    if stop > model.u_max + 1e-12:
        raise click.BadParameter(
            f"stop {stop} exceeds the model's u_max {model.u_max}; raise "
            "u_max in the model file", param_hint="--u")
    return np.linspace(start, stop, count)


def _parse_routes(spec: str) -> list[str]:
    names = [r.strip() for r in spec.split(",") if r.strip()]
    unknown = [n for n in names if n not in ROUTES]
    if unknown:
        raise click.BadParameter(
            f"unknown routes: {', '.join(unknown)} (choose from "
            f"{', '.join(ROUTES)})", param_hint="--routes")
    if not names:
        raise click.BadParameter("no routes requested", param_hint="--routes")
    return names


def _execute(command: str, model_file: str, u_spec: str, routes_spec: str,
             paths: int, seed: int, csv_dir: str | None, plots: bool,
             tol: float, delta_zero: bool = False) -> None:
    if plots and not csv_dir:
        raise click.UsageError("--plots needs --csv DIR for the output files")
    try:
        model = model_from_file(model_file)
    except ModelValidationError as exc:
        click.echo(f"model validation failed: {exc}", err=True)
        raise SystemExit(2)

    notes = []
    if command == "ruin" or delta_zero:
        if model.delta != 0.0 or not isinstance(model.penalty,
                                                RuinIndicatorPenalty):
            notes.append("discount rate forced to 0 and penalty to the ruin "
                         "indicator")
        model = replace(model, delta=0.0, penalty=RuinIndicatorPenalty())

    names = _parse_routes(routes_spec)
    us = _parse_grid(u_spec, model)

    routes = {name: _RUNNERS[name](command, model, us, paths=paths,
                                   seed=seed, tol=tol)
              for name in names}
    report = RunReport(
        command=command,
        model=model_to_dict(model),
        u=tuple(float(v) for v in us),
        settings={"u": u_spec, "routes": names, "paths": paths, "seed": seed,
                  "tol": tol, "delta_zero": bool(delta_zero)},
        routes=routes,
        agreement=_agreement_matrix(routes, us),
        notes=tuple(notes),
    )

    artifacts = []
    if csv_dir:
        artifacts += _write_csvs(csv_dir, us, routes)
        if plots:
            artifacts += _write_plots(csv_dir, command, us, routes)
    blob = report.to_json()
    if artifacts:
        blob["artifacts"] = artifacts
    click.echo(json.dumps(blob, indent=2, sort_keys=True))

    if any(rr["error"] is not None for rr in routes.values()):
        raise SystemExit(3)


# ---------------------------------------------------------------------------
# Click wiring
# ---------------------------------------------------------------------------


def _common_options(fn):
    fn = click.option("--tol", default=1e-10, show_default=True, type=float,
                      help="quadrature and cumulative-integral tolerance")(fn)
    fn = click.option("--plots", is_flag=True,
                      help="render PNG figures next to the CSV files")(fn)
    fn = click.option("--csv", "csv_dir", default=None,
                      type=click.Path(file_okay=False),
                      help="directory for one <route>.csv per route")(fn)
    fn = click.option("--seed", default=0, show_default=True,
                      type=click.IntRange(min=0),
                      help="base seed; grid point k uses seed + k")(fn)
    fn = click.option("--paths", default=10_000, show_default=True,
                      type=click.IntRange(min=1),
                      help="simulation paths per grid point")(fn)
    fn = click.option("--routes", "routes_spec", metavar="A,B,...",
                      help="comma-separated routes: "
                           + ", ".join(ROUTES))(fn)
    fn = click.option("--u", "u_spec", default="0:10:41", show_default=True,
                      metavar="START:STOP:COUNT", help="evaluation grid")(fn)
    fn = click.option("--model", "model_file", required=True,
                      type=click.Path(exists=True, dir_okay=False),
                      help="model JSON file")(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="ruinops")
def main() -> None:
    """Ruin probabilities and discounted penalties under surplus-dependent
    premiums: closed forms, a Green's-operator solver, asymptotics and
    Monte Carlo, cross-checked in one report."""


@main.command()
@_common_options
def ruin(model_file, u_spec, routes_spec, paths, seed, csv_dir, plots,
         tol) -> None:
    """Ruin-probability curves (discount 0, indicator penalty)."""
    _execute("ruin", model_file, u_spec,
             routes_spec or "closed_form,greens,asymptotic,monte_carlo",
             paths, seed, csv_dir, plots, tol)


@main.command()
@_common_options
@click.option("--delta-zero", is_flag=True,
              help="force discount 0 and the indicator penalty "
                   "(reduces to the ruin command)")
def penalty(model_file, u_spec, routes_spec, paths, seed, csv_dir, plots,
            tol, delta_zero) -> None:
    """Discounted-penalty curves with the file's discount and penalty."""
    _execute("penalty", model_file, u_spec,
             routes_spec or "greens,asymptotic,monte_carlo",
             paths, seed, csv_dir, plots, tol, delta_zero=delta_zero)


@main.command()
@click.argument("level", type=click.Choice(["quick", "full"]))
@click.option("--inject-fault", default=None, hidden=True,
              type=click.Choice(["wronskian_sign"]))
def selftest(level, inject_fault) -> None:
    """Run the acceptance matrix (quick: fast invariant subset)."""
    names = acceptance.QUICK if level == "quick" else None
    results = acceptance.run_all(names, inject_fault=inject_fault)
    click.echo(acceptance.format_report(results))
    failed = [r for r in results if not r.passed]
    if failed:
        click.echo("failure manifest:")
        for r in failed:
            click.echo(f"  {r.name}: {r.margin}")
        raise SystemExit(1)


if __name__ == "__main__":
    main()
