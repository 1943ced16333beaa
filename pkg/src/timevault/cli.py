"""Command-line front end.

``run`` plays a scenario and writes its artifacts; ``analyze`` produces the
closed-form security and cost tables; ``verify-golden`` replays the bundled
scenarios and byte-compares their artifacts against the committed goldens.
"""
from __future__ import annotations

import dataclasses
import os
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

import click

from . import adversary, econ
from .chain import GasSchedule
from .economics import Economics
from .errors import TimevaultError
from .scenario import (SUMMARY_FILE, TRACE_FILE, bundled_scenario_names,
                       bundled_scenario_path, golden_dir, load_scenario,
                       run_scenario, write_artifacts)

_OUT_ENV = "TIMEVAULT_OUT"


def _default_out(name: str) -> Path:
    base = os.environ.get(_OUT_ENV, "timevault-out")
    return Path(base) / name


def _parse_ints(text: str) -> list[int]:
    """Accept '30', '10:60', '10:60:10', or '4,8,20'."""
    text = text.strip()
    if "," in text:
        return [int(part) for part in text.split(",") if part.strip()]
    if ":" in text:
        parts = [int(part) for part in text.split(":")]
        if len(parts) == 2:
            lo, hi, step = parts[0], parts[1], 1
        elif len(parts) == 3:
            lo, hi, step = parts
        else:
            raise click.BadParameter(f"bad range {text!r}")
        if step < 1 or hi < lo:
            raise click.BadParameter(f"bad range {text!r}")
        return list(range(lo, hi + 1, step))
    return [int(text)]


def _emit_report(text_table: str, tsv: str, out: Optional[str],
                 stem: str) -> None:
    click.echo(text_table, nl=False)
    if out:
        out_dir = Path(out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"{stem}.txt").write_text(text_table)
        (out_dir / f"{stem}.tsv").write_text(tsv)
        click.echo(f"wrote {out_dir}/{stem}.txt and .tsv")


@click.group()
@click.version_option(package_name="artifact", prog_name="timevault")
def main() -> None:
    """Deterministic timed-execution protocol simulator."""


# ----------------------------------------------------------------------- run

@main.command()
@click.argument("scenario")
@click.option("--seed", type=int, default=None,
              help="Override the scenario's seed.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help=f"Artifact directory (default: ${_OUT_ENV}/<name>).")
@click.option("--gas-schedule", "gas_schedule_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="TOML gas schedule replacing the scenario's.")
@click.option("--economics", "economics_path",
              type=click.Path(exists=True, dir_okay=False), default=None,
              help="TOML economics replacing the scenario's.")
def run(scenario: str, seed: Optional[int], out: Optional[str],
        gas_schedule_path: Optional[str], economics_path: Optional[str]) -> None:
    """Run SCENARIO (a TOML path or a bundled name) and write artifacts."""
    try:
        path = Path(scenario)
        if not path.is_file():
            path = bundled_scenario_path(scenario)
        cfg = load_scenario(path)
        if gas_schedule_path:
            cfg = dataclasses.replace(
                cfg, schedule=GasSchedule.from_toml(gas_schedule_path))
        if economics_path:
            cfg = dataclasses.replace(
                cfg, economics=Economics.from_toml(economics_path))
        result = run_scenario(cfg, seed=seed)
        out_dir = Path(out) if out else _default_out(cfg.name)
        paths = write_artifacts(result, out_dir, schedule=cfg.schedule)
    except TimevaultError as exc:
        raise click.ClickException(str(exc)) from exc
    convicted = len(result.convicted) + (1 if result.leader_convicted else 0)
    click.echo(
        f"{cfg.name}: {result.outcome} via {result.path} "
        f"(seed {result.seed}, {result.payloads_executed}/"
        f"{result.payloads_total} payloads, {convicted} convicted, "
        f"{result.tx_count} txs)")
    click.echo(f"artifacts in {paths['trace'].parent}")


# ------------------------------------------------------------------- analyze

@main.group()
def analyze() -> None:
    """Closed-form security and cost analyses."""


@analyze.command()
@click.option("--group-size", "group_sizes", default="2:6", show_default=True,
              help="Custodians per share (single value, range, or list).")
@click.option("--honest", type=int, default=100, show_default=True,
              help="Independently operated executors in the registry.")
@click.option("--threshold", type=int, default=4, show_default=True)
@click.option("--share-count", type=int, default=10, show_default=True)
@click.option("--deposit", default="1", show_default=True,
              help="Stake per executor per service (ether).")
@click.option("--trials", type=int, default=0, show_default=True,
              help="Monte-Carlo trials per point (0 skips simulation).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def sybil(group_sizes: str, honest: int, threshold: int, share_count: int,
          deposit: str, trials: int, seed: int, out: Optional[str]) -> None:
    """Registration-flooding budgets at the attacker's optimal fleet size."""
    headers = ["group_size", "honest", "optimal_fleet", "capture_prob",
               "budget_ether"]
    if trials:
        headers += ["mc_mean", "mc_expected", "mc_ci95", "within_3se"]
    rows = []
    try:
        unit = Fraction(deposit)
        for l in _parse_ints(group_sizes):
            fleet = adversary.flooding_optimum(l, honest)
            if fleet is None:
                rows.append([l, honest, "none", "-", "-"]
                            + (["-"] * 4 if trials else []))
                continue
            params = adversary.FloodingParams(
                fleet, honest, l, threshold, share_count, unit)
            row = [l, honest, fleet,
                   float(adversary.capture_probability(params)),
                   float(adversary.flooding_budget(params))]
            if trials:
                stats = adversary.capture_monte_carlo(params, trials, seed)
                row += [stats.mean_captured, stats.expected, stats.ci95,
                        stats.within(3.0)]
            rows.append(row)
    except TimevaultError as exc:
        raise click.ClickException(str(exc)) from exc
    _emit_report(econ.render_table(headers, rows),
                 econ.render_tsv(headers, rows), out, "sybil")


@analyze.command()
@click.option("--targets", required=True,
              help="Reputation of each bribed executor, e.g. '1,3,5'.")
@click.option("--deposit", default="1", show_default=True,
              help="Stake per executor per service (ether).")
@click.option("--pay", default="0.01", show_default=True,
              help="Pay per reputation point per service (ether).")
@click.option("--rep-step", type=int, default=1, show_default=True)
@click.option("--rep-floor", type=int, default=1, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), default=None)
def bribery(targets: str, deposit: str, pay: str, rep_step: int,
            rep_floor: int, out: Optional[str]) -> None:
    """Committee buy-out budget, itemized per bribed executor."""
    try:
        reps = _parse_ints(targets)
        params = adversary.BriberyParams(
            reps, Fraction(deposit), Fraction(pay), rep_step, rep_floor)
        headers = ["target", "reputation", "stake_ether", "pay_loss_ether",
                   "total_ether"]
        rows = []
        for i, rep in enumerate(reps):
            loss = adversary.reputation_loss(rep, rep_floor, rep_step,
                                             Fraction(pay))
            rows.append([i, rep, float(Fraction(deposit)), float(loss),
                         float(Fraction(deposit) + loss)])
        rows.append(["all", "-", "-", "-",
                     float(adversary.bribery_budget(params))])
    except TimevaultError as exc:
        raise click.ClickException(str(exc)) from exc
    _emit_report(econ.render_table(headers, rows),
                 econ.render_tsv(headers, rows), out, "bribery")


@analyze.command()
@click.option("--path", "which", default="all", show_default=True,
              type=click.Choice(["all", "opt", "pes", "pool"]))
@click.option("--sizes", default="10:60:10", show_default=True,
              help="Committee sizes (range or list).")
@click.option("--payloads", type=int, default=1, show_default=True)
@click.option("--out", "out", type=click.Path(file_okay=False), default=None)
def cost(which: str, sizes: str, payloads: int, out: Optional[str]) -> None:
    """USD totals per execution path across committee sizes."""
    paths = {"all": [econ.PATH_OPT, econ.PATH_PES, econ.PATH_POOL],
             "opt": [econ.PATH_OPT], "pes": [econ.PATH_PES],
             "pool": [econ.PATH_POOL]}[which]
    try:
        size_list = _parse_ints(sizes)
        curves = {p: dict(econ.scaling_curve(p, size_list, payloads))
                  for p in paths}
    except TimevaultError as exc:
        raise click.ClickException(str(exc)) from exc
    headers = ["committee_size"] + [f"{p.lower()}_usd" for p in paths]
    rows = [[size] + [curves[p][size] for p in paths] for size in size_list]
    table = econ.render_table(headers, rows)
    if len(size_list) >= 2:
        slopes = ", ".join(
            f"{p} {econ.curve_slope(sorted(curves[p].items())):+.4f}/member"
            for p in paths)
        table += f"slopes: {slopes}\n"
    _emit_report(table, econ.render_tsv(headers, rows), out, "cost")


@analyze.command()
@click.option("--committee-size", type=int, default=30, show_default=True)
@click.option("--followers", default="0:19", show_default=True,
              help="Pool follower counts (range or list).")
@click.option("--fee-usd", type=float, default=None,
              help="Join fee per follower (default: configured minimum).")
@click.option("--out", type=click.Path(file_okay=False), default=None)
def pooling(committee_size: int, followers: str, fee_usd: Optional[float],
            out: Optional[str]) -> None:
    """Cost sharing as followers attach to one scheduled service."""
    try:
        reports = econ.pooling_table(committee_size, _parse_ints(followers),
                                     fee_usd=fee_usd)
    except TimevaultError as exc:
        raise click.ClickException(str(exc)) from exc
    headers = ["followers", "leader_adjusted_usd", "per_follower_usd",
               "per_request_usd", "average_usd"]
    rows = [[r.follower_count, r.leader_adjusted_usd, r.per_follower_usd,
             r.per_request_usd, r.average_usd] for r in reports]
    _emit_report(econ.render_table(headers, rows),
                 econ.render_tsv(headers, rows), out, "pooling")


# ------------------------------------------------------------- golden traces

@main.command("verify-golden")
@click.option("--scenario", "only", default=None,
              help="Check a single bundled scenario.")
@click.option("--update", is_flag=True,
              help="Rewrite the goldens from the current code instead.")
def verify_golden(only: Optional[str], update: bool) -> None:
    """Replay bundled scenarios and byte-compare trace and summary."""
    names = [only] if only else bundled_scenario_names()
    base = golden_dir()
    failures = []
    for name in names:
        try:
            cfg = load_scenario(bundled_scenario_path(name))
            result = run_scenario(cfg)
        except TimevaultError as exc:
            raise click.ClickException(f"{name}: {exc}") from exc
        got = {
            f"{name}.trace": "".join(line + "\n" for line in result.trace),
            f"{name}.summary.json": result.summary_json(),
        }
        if update:
            for fname, text in got.items():
                Path(str(base.joinpath(fname))).write_text(text)
            click.echo(f"{name}: goldens rewritten")
            continue
        bad = []
        for fname, text in got.items():
            ref = base.joinpath(fname)
            if not ref.is_file():
                bad.append(f"{fname} missing")
            elif ref.read_text() != text:
                bad.append(f"{fname} differs")
        if bad:
            failures.append(name)
            click.echo(f"{name}: MISMATCH ({'; '.join(bad)})")
        else:
            click.echo(f"{name}: OK")
    if failures:
        raise click.ClickException(
            f"golden mismatch in {len(failures)} scenario(s)")


if __name__ == "__main__":
    main()
