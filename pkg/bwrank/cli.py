import logging
import os
from typing import Any, Dict, List, Optional

import click
from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from bwrank.config import get_settings
from bwrank.graph import build_graph
from bwrank.utils.audit_logger import AuditLogger
from bwrank.utils.bwgeom import bw_distance, bw_distance_procrustes, psd_factor
from bwrank.utils.errors import (
    BwRankError,
    CertificateError,
    ConfigError,
    CountMismatchError,
    DimensionMismatchError,
    NotPositiveSemidefiniteError,
    RankError,
)
from bwrank.utils.logmaps import log_index_params, sample_log_family
from bwrank.utils.matrix_io import load_matrix
from bwrank.utils.reproductions import REPRODUCTIONS
from bwrank.utils.verify import run_verify

console = Console()
err_console = Console(stderr=True)
logger = logging.getLogger(__name__)

EXIT_CHECK_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_BREAKDOWN = 3
EXIT_NOT_PSD = 4
EXIT_ORACLE_DISAGREEMENT = 5
EXIT_CERTIFICATE = 6
EXIT_REPRODUCTION_FAILED = 7

LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]


def _configure_logging(level: str):
    logging.basicConfig(
        level=level.upper(),
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def _fail(code: int, message: str):
    err_console.print(f"[bold red]{message}[/bold red]")
    raise SystemExit(code)


def _fmt(x: Optional[float]) -> str:
    return "-" if x is None else f"{x:.3e}"


def _run_pipeline(initial: Dict[str, Any], failure_code: int = EXIT_BAD_INPUT) -> Dict[str, Any]:
    """Invoke the graph; a bwrank error that escapes a stage exits with failure_code."""
    audit = initial.get("audit_logger")
    if audit is not None:
        audit.log_system_event("PIPELINE_START", "langgraph run",
                               {"config": initial.get("config_path") or initial.get("label")})
    graph = build_graph()
    try:
        return graph.invoke(initial)
    except BwRankError as e:
        logger.error("pipeline aborted: %s", e.message)
        if audit is not None:
            audit.log_error("PIPELINE_ABORTED", e.message, e.to_dict())
        _fail(failure_code, f"{type(e).__name__}: {e.message}")


def _print_run_summary(result: Dict[str, Any]):
    cfg = result["run_config"]
    traj = result["trajectory"]
    cons = result.get("conservation", {})
    t = Table(show_header=True, header_style="bold", title=f"Geodesic run: {cfg.label}")
    t.add_column("Field")
    t.add_column("Value")
    t.add_row("n, k", f"{cfg.n}, {cfg.k}")
    t.add_row("System", cfg.system)
    t.add_row("Steps", str(len(traj.states) - 1))
    t.add_row("t_final", f"{traj.times[-1]:.6f}")
    t.add_row("Energy drift", _fmt(cons.get("energy_drift")))
    t.add_row("Angular momentum residual", _fmt(cons.get("momentum_residual")))
    t.add_row("BD residual", _fmt(cons.get("bd_residual")))
    t.add_row("Frame orthogonality residual", _fmt(cons.get("orthogonality_residual")))
    diag = result.get("diagnostics", {})
    if diag:
        t.add_row("Stays in initial fiber", f"{'yes' if diag['stays_in_fiber'] else 'no'} "
                                           f"(sine {diag['final_fiber_sine']:.3e}, angle_tol {cfg.angle_tol:.1e})")
        t.add_row(f"Gauge energy error (seed {diag['gauge_seed']})", _fmt(diag["gauge_energy_error"]))
    console.print(t)
    for a in result.get("artifacts", []):
        console.print(f"[green]{a['kind']} written to {a['path']}[/green]")
    _print_audit_summary(result)


def _print_audit_summary(result: Dict[str, Any]):
    summary = result.get("audit_summary")
    if not summary:
        return
    line = f"Audit: {summary['total_events']} events, {summary['error_events']} errors"
    if result.get("audit_export"):
        line += f" ({result['audit_export']})"
    console.print(f"[dim]{line}[/dim]")


def _report_pipeline_error(result: Dict[str, Any]):
    error = result["error"]
    if error.get("kind") == "breakdown":
        err_console.print(f"[bold red]Integration breakdown:[/bold red] {error.get('message')}")
        err_console.print(f"  time            {error['time']:.6f}")
        err_console.print(f"  min eigenvalue  {error['min_eigenvalue']:.3e}")
        for a in result.get("artifacts", []):
            err_console.print(f"  partial {a['kind']}: {a['path']}")
        raise SystemExit(EXIT_BREAKDOWN)
    _fail(EXIT_BAD_INPUT, f"Config error: {error.get('message')}")


@click.group()
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False), default=None,
              help="Diagnostic log level (default BWRANK_LOG_LEVEL or WARNING)")
def run(log_level: Optional[str]):
    _configure_logging(log_level or get_settings().log_level)


@run.command("geodesic")
@click.argument("config_path", type=click.Path(dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Directory for the CSV, monitors and SVG artifacts")
def geodesic(config_path: str, out_dir: Optional[str]):
    """Integrate the geodesic described by a JSON run config."""
    audit = AuditLogger(run_dir=out_dir)
    result = _run_pipeline({"config_path": config_path, "out_dir": out_dir, "audit_logger": audit})
    if result.get("error"):
        _report_pipeline_error(result)
    _print_run_summary(result)


@run.command("distance")
@click.argument("a_path", type=click.Path(dir_okay=False))
@click.argument("b_path", type=click.Path(dir_okay=False))
@click.option("--rank-tol", type=float, default=None, help="Relative threshold for zero eigenvalues")
def distance(a_path: str, b_path: str, rank_tol: Optional[float]):
    """Bures-Wasserstein distance between two PSD matrix files, checked by Procrustes."""
    settings = get_settings().with_overrides(rank_tol=rank_tol)
    try:
        A, B = load_matrix(a_path), load_matrix(b_path)
        formula = bw_distance(A, B, psd_tol=settings.psd_clamp_tol, rank_tol=settings.rank_tol)
        procrustes = bw_distance_procrustes(psd_factor(A, settings.psd_clamp_tol, settings.rank_tol),
                                            psd_factor(B, settings.psd_clamp_tol, settings.rank_tol),
                                            rank_tol=settings.rank_tol, require_full_rank=False)
    except NotPositiveSemidefiniteError as e:
        _fail(EXIT_NOT_PSD, f"Input is not positive semidefinite: {e.message}")
    except (ConfigError, DimensionMismatchError) as e:
        _fail(EXIT_BAD_INPUT, e.message)

    diff = abs(formula - procrustes)
    t = Table(show_header=True, header_style="bold")
    t.add_column("Quantity")
    t.add_column("Value")
    t.add_row("d_BW (square roots)", repr(formula))
    t.add_row("d_BW (Procrustes)", repr(procrustes))
    t.add_row("|difference|", f"{diff:.3e}")
    console.print(t)
    if diff > settings.oracle_agreement_tol:
        _fail(EXIT_ORACLE_DISAGREEMENT,
              f"Distance oracles disagree by {diff:.3e} > {settings.oracle_agreement_tol:.1e}")


@run.command("logcount")
@click.argument("x_path", type=click.Path(dir_okay=False))
@click.argument("y_path", type=click.Path(dir_okay=False))
@click.option("--samples", type=click.IntRange(min=0), default=4, show_default=True,
              help="Seeds drawn for the O(r) factor (each in both components)")
@click.option("--seed", type=int, default=None, help="First seed (default BWRANK_SEED or 0)")
def logcount(x_path: str, y_path: str, samples: int, seed: Optional[int]):
    """Size of the family of minimizing geodesics between XXᵀ and YYᵀ."""
    settings = get_settings()
    first = seed if seed is not None else (settings.seed or 0)
    try:
        X, Y = load_matrix(x_path), load_matrix(y_path)
        p = log_index_params(X, Y, settings.rank_tol, settings.angle_tol)
        family = sample_log_family(p, range(first, first + samples), settings.certificate_tol)
    except (CertificateError, CountMismatchError) as e:
        _fail(EXIT_CERTIFICATE, f"Certificate failure: {e.message}")
    except (ConfigError, DimensionMismatchError, RankError) as e:
        _fail(EXIT_BAD_INPUT, e.message)

    t = Table(show_header=True, header_style="bold")
    t.add_column("Field")
    t.add_column("Value")
    t.add_row("k", str(p.k))
    t.add_row("l = rank XᵀY", str(p.l))
    t.add_row("r = k - l", str(p.r))
    t.add_row("Principal angles", ", ".join(f"{a:.6f}" for a in p.angles))
    t.add_row("Certified samples", str(len(family)))
    t.add_row("Verdict", "unique" if p.unique else f"O({p.r})-family")
    console.print(t)
    for w in p.warnings:
        err_console.print(f"[yellow]warning:[/yellow] {w}")


@run.command("reproduce")
@click.argument("example_id")
@click.option("--out", "out_root", type=click.Path(file_okay=False), default=None,
              help="Parent directory for per-example artifacts")
def reproduce(example_id: str, out_root: Optional[str]):
    """Run a built-in example (or 'all') and assert its checks."""
    if example_id == "all":
        ids: List[str] = list(REPRODUCTIONS)
    elif example_id in REPRODUCTIONS:
        ids = [example_id]
    else:
        _fail(EXIT_BAD_INPUT, f"Unknown example id {example_id!r}; choose from {', '.join(REPRODUCTIONS)} or all")

    root = out_root or get_settings().runs_dir
    failed: List[str] = []
    for rid in ids:
        repro = REPRODUCTIONS[rid]
        out_dir = os.path.join(root, rid)
        result = _run_pipeline({
            "config_data": repro.config,
            "label": rid,
            "reproduction_id": rid,
            "out_dir": out_dir,
            "audit_logger": AuditLogger(run_dir=out_dir, run_label=rid),
        }, failure_code=EXIT_REPRODUCTION_FAILED)
        if result.get("error"):
            _report_pipeline_error(result)

        console.rule(f"{rid}: {repro.description}")
        t = Table(show_header=True, header_style="bold")
        t.add_column("Check")
        t.add_column("Error", justify="right")
        t.add_column("Tolerance", justify="right")
        t.add_column("Result")
        for c in result["checks"]:
            t.add_row(c.name, _fmt(c.error), _fmt(c.tolerance),
                      "[green]PASS[/green]" if c.passed else "[red]FAIL[/red]")
            if not c.passed:
                failed.append(f"{rid}:{c.name}")
        console.print(t)
        for a in result.get("artifacts", []):
            console.print(f"[green]{a['kind']} written to {a['path']}[/green]")
        _print_audit_summary(result)

    if failed:
        _fail(EXIT_REPRODUCTION_FAILED, f"Failed checks: {', '.join(failed)}")


@run.command("verify")
@click.option("--seed", type=int, default=None, help="Base seed (default BWRANK_SEED or 0)")
@click.option("--trials", type=click.IntRange(min=0), default=3, show_default=True)
@click.option("--dt", type=float, default=None, help="Override the integrator step")
@click.option("--workers", type=click.IntRange(min=1), default=4, show_default=True)
def verify(seed: Optional[int], trials: int, dt: Optional[float], workers: int):
    """Run every invariant on randomized inputs."""
    settings = get_settings()
    base_seed = seed if seed is not None else (settings.seed or 0)
    reports = run_verify(seed=base_seed, trials=trials, dt=dt, settings=settings, max_workers=workers)

    t = Table(show_header=True, header_style="bold", title=f"Invariant suite (seed {base_seed}, {trials} trials)")
    t.add_column("Module")
    t.add_column("Property")
    t.add_column("Trials", justify="right")
    t.add_column("Worst error", justify="right")
    t.add_column("Tolerance", justify="right")
    t.add_column("Result")
    for r in reports:
        t.add_row(r.module, r.name, str(r.trials), _fmt(r.worst_error), _fmt(r.tolerance),
                  "[green]PASS[/green]" if r.passed else f"[red]FAIL ({r.failures})[/red]")
    console.print(t)

    failing = [r for r in reports if not r.passed]
    if failing:
        for r in failing:
            err_console.print(f"[red]{r.name}[/red]: {r.message}")
        _fail(EXIT_CHECK_FAILED, f"Failing properties: {', '.join(r.name for r in failing)}")


if __name__ == "__main__":
    run()
