"""xychain CLI — evaluate, scan, fit and collapse the XY-chain susceptibility.

Exit codes: 0 success, 2 invalid parameters, 3 critical divergence,
4 quadrature failure, 5 analysis failure (no interior maximum, degenerate
fit, insufficient collapse overlap).
"""

from __future__ import annotations

import logging
import math
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator

import numpy as np
import typer
from rich.console import Console
from rich.panel import Panel

from xychain import __version__
from xychain.config import DEFAULT_CONFIG_FILENAME, XYChainConfig
from xychain.criticality import (
    analyze_exponents,
    collapse_curves,
    collapse_quality,
    find_pseudocritical,
    universality_table,
)
from xychain.errors import (
    CriticalDivergence,
    NonConvergence,
    NonFiniteIntegrand,
    ParameterError,
    XYChainError,
)
from xychain.geophase import ground_state_gp, thermal_gp, thermal_gp_mode_sum
from xychain.model import ModelParams
from xychain.quadrature import QuadratureSpec
from xychain.reporter import ExponentReport, emit, fit_to_dict, render_csv, render_json
from xychain.sweep import parallel_map
from xychain.thermo import (
    ThermalPoint,
    free_energy,
    free_energy_finite_n,
    magnetization,
    magnetization_finite_n,
    susceptibility,
    susceptibility_fd,
    susceptibility_finite_n,
)

logger = logging.getLogger(__name__)

EXIT_PARAMETER = 2
EXIT_DIVERGENCE = 3
EXIT_QUADRATURE = 4
EXIT_ANALYSIS = 5

app = typer.Typer(
    name="xychain",
    help=(
        "Exact finite-temperature thermodynamics and criticality of the 1D XY chain.\n\n"
        "Exit codes: 0 ok, 2 invalid parameters, 3 critical divergence, "
        "4 quadrature non-convergence, 5 analysis failure."
    ),
    add_completion=False,
    rich_markup_mode="rich",
)
console = Console(stderr=True)

SCAN_COLUMNS = ["gamma", "lambda", "T", "F", "M_z", "chi_z", "error"]

# -- Argument parsing ---------------------------------------------------------


def parse_temperature(text: str) -> float:
    """A temperature literal; ``e<x>`` is shorthand for exp(x)."""
    raw = text.strip()
    try:
        value = math.exp(float(raw[1:])) if raw.lower().startswith("e") else float(raw)
    except ValueError as exc:
        raise ParameterError(f"cannot parse temperature {text!r}") from exc
    if not (math.isfinite(value) and value >= 0.0):
        raise ParameterError(f"temperature must be finite and >= 0, got {text!r}")
    return value


def parse_temperatures(text: str) -> list[float]:
    temps = [parse_temperature(part) for part in text.split(",") if part.strip()]
    if not temps:
        raise ParameterError("temperature list is empty")
    return temps


def parse_range(text: str) -> list[float]:
    """``MIN:MAX:COUNT`` as an inclusive uniform grid."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ParameterError(f"range must be MIN:MAX:COUNT, got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ParameterError(f"cannot parse range {text!r}") from exc
    if count < 2 or not lo < hi:
        raise ParameterError(f"range needs COUNT >= 2 and MIN < MAX, got {text!r}")
    return [float(x) for x in np.linspace(lo, hi, count)]


def parse_bracket(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise ParameterError(f"bracket must be MIN:MAX, got {text!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise ParameterError(f"cannot parse bracket {text!r}") from exc
    if not lo < hi:
        raise ParameterError(f"bracket needs MIN < MAX, got {text!r}")
    return lo, hi


def _positive(temps: list[float], command: str) -> list[float]:
    if any(t <= 0.0 for t in temps):
        raise ParameterError(f"'{command}' needs temperatures > 0")
    return temps


# -- Helpers --------------------------------------------------------------------


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Translate library errors into the documented exit codes."""
    try:
        yield
    except ParameterError as exc:
        console.print(f"[red]Error:[/red] {exc}")
        raise typer.Exit(EXIT_PARAMETER)
    except CriticalDivergence as exc:
        console.print(f"[red]Error:[/red] {exc}")
        raise typer.Exit(EXIT_DIVERGENCE)
    except (NonConvergence, NonFiniteIntegrand) as exc:
        console.print(f"[red]Quadrature failed:[/red] {exc}")
        raise typer.Exit(EXIT_QUADRATURE)
    except XYChainError as exc:
        console.print(f"[red]Analysis failed:[/red] {exc}")
        raise typer.Exit(EXIT_ANALYSIS)


def _load(config: str | None, rel_tol: float | None) -> tuple[XYChainConfig, QuadratureSpec]:
    cfg = XYChainConfig.load(config)
    if rel_tol is not None:
        cfg.quadrature.rel_tol = rel_tol
    return cfg, cfg.quadrature.to_spec()


def _out_path(out: str | None) -> Path | None:
    return Path(out).resolve() if out else None


def _check_format(fmt: str) -> str:
    fmt = fmt.lower()
    if fmt not in ("csv", "json"):
        raise ParameterError(f"format must be csv or json, got {fmt!r}")
    return fmt


def _panel(title: str, fields: dict[str, Any], quiet: bool) -> None:
    if quiet:
        return
    body = "\n".join(f"[bold]{k}:[/bold] {v}" for k, v in fields.items())
    console.print(Panel(body, title=f"[bold cyan]xychain {title}[/bold cyan]", border_style="cyan"))


def _thermo_point(
    p: ModelParams, T: float, n_sites: int | None, spec: QuadratureSpec
) -> dict[str, float]:
    """F, M_z, chi_z and the geometric phase at one point."""
    t = ThermalPoint(T)
    record: dict[str, float] = {}
    if n_sites is None:
        record["F"] = free_energy(p, t, spec)
        record["M_z"] = magnetization(p, t, spec)
        gp = ground_state_gp(p, spec) if t.is_zero else thermal_gp(p, t, spec)
    else:
        record["F"] = free_energy_finite_n(p, t, n_sites)
        record["M_z"] = magnetization_finite_n(p, t, n_sites)
        gp = thermal_gp_mode_sum(p, t, n_sites)
    record["beta_g" if t.is_zero else "beta_T"] = gp.value
    if n_sites is None:
        record["chi_z"] = susceptibility(p, t, spec)
    else:
        record["chi_z"] = susceptibility_finite_n(p, t, n_sites)
    return record


def _scan_row(
    gamma: float, lam: float, T: float, n_sites: int | None, spec: QuadratureSpec
) -> dict[str, Any]:
    """One grid row; failures land in the error column, computed fields are kept."""
    row: dict[str, Any] = {"gamma": gamma, "lambda": lam, "T": T}
    try:
        p = ModelParams(gamma, lam)
        t = ThermalPoint(T)
    except XYChainError as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
        return row
    if n_sites is None:
        steps = [
            ("F", lambda: free_energy(p, t, spec)),
            ("M_z", lambda: magnetization(p, t, spec)),
            ("chi_z", lambda: susceptibility(p, t, spec)),
        ]
    else:
        steps = [
            ("F", lambda: free_energy_finite_n(p, t, n_sites)),
            ("M_z", lambda: magnetization_finite_n(p, t, n_sites)),
            ("chi_z", lambda: susceptibility_finite_n(p, t, n_sites)),
        ]
    errors = []
    for name, compute in steps:
        try:
            row[name] = compute()
        except XYChainError as exc:
            errors.append(f"{name}: {type(exc).__name__}: {exc}")
    row["error"] = "; ".join(errors) or None
    return row


# -- Commands ---------------------------------------------------------------------


@app.command("eval")
def eval_point(
    gamma: float = typer.Option(None, "--gamma", "-g", help="Anisotropy in [0, 1]"),
    lam: float = typer.Option(..., "--lambda", "-l", help="Transverse field >= 0"),
    temp: str = typer.Option("0", "--temp", "-t", help="Temperature (e<x> = exp(x))"),
    n_sites: int = typer.Option(None, "--n-sites", "-n", help="Finite chain length"),
    fd_check: bool = typer.Option(
        False, "--fd-check", help="Add chi_z_fd, the second difference of F in lambda"
    ),
    out: str = typer.Option(None, "--out", "-o", help="Output file (default: stdout)"),
    fmt: str = typer.Option(None, "--format", "-f", help="Output format: csv or json"),
    rel_tol: float = typer.Option(None, "--rel-tol", help="Quadrature relative tolerance"),
    config: str = typer.Option(None, "--config", "-c", help="Path to xychain.yaml"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No console summary"),
) -> None:
    """Evaluate F, M_z, chi_z and the geometric phase at one (gamma, lambda, T)."""
    with _exit_codes():
        cfg, spec = _load(config, rel_tol)
        g = cfg.gamma if gamma is None else gamma
        T = parse_temperature(temp)
        output_format = _check_format(fmt or cfg.output_format)
        if fd_check and n_sites is not None:
            raise ParameterError("--fd-check applies to the thermodynamic limit only")
        p = ModelParams(g, lam)
        record: dict[str, Any] = {"gamma": g, "lambda": lam, "T": T}
        if n_sites is not None:
            record["N"] = n_sites
        record.update(_thermo_point(p, T, n_sites, spec))
        if fd_check:
            record["chi_z_fd"] = susceptibility_fd(p, T, h=cfg.analysis.fd_step, spec=spec)

        if output_format == "json":
            text = render_json(record)
        else:
            text = render_csv(list(record), [record], metadata={"command": "eval"})
        emit(text, _out_path(out), console)
        _panel("eval", {k: record[k] for k in record if k not in ("gamma", "lambda")}, quiet)


@app.command()
def scan(
    gamma: float = typer.Option(None, "--gamma", "-g", help="Anisotropy in [0, 1]"),
    lambda_range: str = typer.Option(
        "0:2:101", "--lambda-range", help="Field grid MIN:MAX:COUNT"
    ),
    temps: str = typer.Option(
        "0.02,0.06,0.21,0.5,1.01", "--temps", help="Comma-separated temperatures"
    ),
    n_sites: int = typer.Option(None, "--n-sites", "-n", help="Finite chain length"),
    out: str = typer.Option(None, "--out", "-o", help="Output file (default: stdout)"),
    rel_tol: float = typer.Option(None, "--rel-tol", help="Quadrature relative tolerance"),
    config: str = typer.Option(None, "--config", "-c", help="Path to xychain.yaml"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No console summary"),
) -> None:
    """Tabulate F, M_z and chi_z over a (lambda, T) grid as CSV."""
    with _exit_codes():
        cfg, spec = _load(config, rel_tol)
        g = cfg.gamma if gamma is None else gamma
        ModelParams(g, 0.0)
        lams = parse_range(lambda_range)
        temperatures = parse_temperatures(temps)
        points = [(lam, T) for lam in lams for T in temperatures]
        rows = parallel_map(
            lambda pt: _scan_row(g, pt[0], pt[1], n_sites, spec), points, cfg.workers
        )
        failed = sum(1 for r in rows if r["error"])
        metadata = {
            "command": "scan",
            "gamma": g,
            "lambda_range": lambda_range,
            "temps": ",".join(format(t, ".17g") for t in temperatures),
            "n_sites": n_sites,
            "rel_tol": spec.rel_tol,
        }
        emit(render_csv(SCAN_COLUMNS, rows, metadata), _out_path(out), console)
        if failed:
            console.print(f"[yellow]Warning:[/yellow] {failed} grid point(s) failed; see the error column")
        _panel("scan", {"rows": len(rows), "failed": failed}, quiet)


@app.command()
def pseudocrit(
    gamma: float = typer.Option(None, "--gamma", "-g", help="Anisotropy in [0, 1]"),
    temps: str = typer.Option(None, "--temps", help="Comma-separated temperatures > 0"),
    bracket: str = typer.Option(None, "--bracket", help="Field bracket MIN:MAX"),
    out: str = typer.Option(None, "--out", "-o", help="Output file (default: stdout)"),
    rel_tol: float = typer.Option(None, "--rel-tol", help="Quadrature relative tolerance"),
    config: str = typer.Option(None, "--config", "-c", help="Path to xychain.yaml"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No console summary"),
) -> None:
    """Pseudocritical field lambda_m and peak susceptibility per temperature."""
    with _exit_codes():
        cfg, spec = _load(config, rel_tol)
        g = cfg.gamma if gamma is None else gamma
        ModelParams(g, 0.0)
        a = cfg.analysis
        temperatures = _positive(
            parse_temperatures(temps) if temps else a.temperatures(), "pseudocrit"
        )
        field_bracket = parse_bracket(bracket) if bracket else a.bracket

        def search(T: float) -> dict[str, Any]:
            try:
                r = find_pseudocritical(
                    g, T, field_bracket, a.field_tol, grid_points=a.grid_points, spec=spec
                )
            except XYChainError as exc:
                return {"T": T, "error": f"{type(exc).__name__}: {exc}"}
            return {"T": T, "lambda_m": r.lambda_m, "chi_max": r.chi_max, "side": r.side}

        rows = parallel_map(search, temperatures, cfg.workers)
        failed = sum(1 for r in rows if r.get("error"))
        metadata = {
            "command": "pseudocrit",
            "gamma": g,
            "bracket": f"{field_bracket[0]:g}:{field_bracket[1]:g}",
            "tol": a.field_tol,
        }
        columns = ["T", "lambda_m", "chi_max", "side", "error"]
        emit(render_csv(columns, rows, metadata), _out_path(out), console)
        if failed:
            console.print(f"[yellow]Warning:[/yellow] {failed} search(es) failed; see the error column")
        _panel("pseudocrit", {"temperatures": len(rows), "failed": failed}, quiet)


@app.command()
def exponents(
    gamma: float = typer.Option(None, "--gamma", "-g", help="Anisotropy in (0, 1]"),
    temps: str = typer.Option(None, "--temps", help="Temperatures of the kappa1 fit"),
    drift_temps: str = typer.Option(
        None, "--drift-temps", help="Temperatures of the drift-exponent fit"
    ),
    side: str = typer.Option("below", "--side", help="kappa2 approach side: below or above"),
    bracket: str = typer.Option(None, "--bracket", help="Field bracket MIN:MAX"),
    out: str = typer.Option(None, "--out", "-o", help="Output file (default: stdout)"),
    rel_tol: float = typer.Option(None, "--rel-tol", help="Quadrature relative tolerance"),
    config: str = typer.Option(None, "--config", "-c", help="Path to xychain.yaml"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No console summary"),
) -> None:
    """kappa1, kappa2, nu and the pseudocritical drift exponent as JSON."""
    with _exit_codes():
        cfg, spec = _load(config, rel_tol)
        g = cfg.gamma if gamma is None else gamma
        a = cfg.analysis
        if side not in ("below", "above"):
            raise ParameterError(f"side must be 'below' or 'above', got {side!r}")
        temperatures = _positive(
            parse_temperatures(temps) if temps else a.temperatures(), "exponents"
        )
        drift_temperatures = _positive(
            parse_temperatures(drift_temps) if drift_temps else a.drift_temperatures(), "exponents"
        )
        analysis = analyze_exponents(
            g,
            temperatures,
            a.offsets(),
            side,
            drift_temperatures=drift_temperatures,
            bracket=parse_bracket(bracket) if bracket else a.bracket,
            tol=a.field_tol,
            grid_points=a.grid_points,
            spec=spec,
            workers=cfg.workers,
        )
        report = ExponentReport.from_analysis(analysis)
        emit(report.to_json(), _out_path(out), console)
        if not quiet:
            report.print_summary(console)


@app.command()
def collapse(
    gamma: float = typer.Option(None, "--gamma", "-g", help="Anisotropy in (0, 1]"),
    temps: str = typer.Option(None, "--temps", help="Temperatures, e.g. e-3,e-4,e-5,e-5.5"),
    x_range: str = typer.Option(None, "--x-range", help="Scaled field grid MIN:MAX:COUNT"),
    bracket: str = typer.Option(None, "--bracket", help="Field bracket MIN:MAX"),
    out: str = typer.Option(None, "--out", "-o", help="Output file (default: stdout)"),
    rel_tol: float = typer.Option(None, "--rel-tol", help="Quadrature relative tolerance"),
    config: str = typer.Option(None, "--config", "-c", help="Path to xychain.yaml"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No console summary"),
) -> None:
    """Collapse curves F against (lambda - lambda_m)/T as CSV with a quality summary."""
    with _exit_codes():
        cfg, spec = _load(config, rel_tol)
        g = cfg.gamma if gamma is None else gamma
        a = cfg.analysis
        temperatures = _positive(
            parse_temperatures(temps) if temps else list(a.collapse_temps), "collapse"
        )
        grid = parse_range(x_range) if x_range else a.collapse_grid()
        data = collapse_curves(
            g,
            temperatures,
            grid,
            spec=spec,
            workers=cfg.workers,
            bracket=parse_bracket(bracket) if bracket else a.bracket,
            tol=a.field_tol,
            grid_points=a.grid_points,
        )
        quality = collapse_quality(data) if len(data.curves) > 1 else None
        rows = [
            {"T": c.T, "x": x, "F": f} for c in data.curves for x, f in zip(c.x, c.F)
        ]
        summary = {
            "gamma": g,
            "collapse_quality": quality,
            "lambda_m": {format(c.T, ".17g"): c.lambda_m for c in data.curves},
        }
        metadata = {"command": "collapse", "gamma": g, "curves": len(data.curves)}
        emit(render_csv(["T", "x", "F"], rows, metadata, trailer=summary), _out_path(out), console)
        _panel("collapse", {"curves": len(data.curves), "quality": quality}, quiet)


@app.command()
def universality(
    gammas: str = typer.Option("1.0,0.8,0.6,0.4", "--gammas", help="Comma-separated anisotropies"),
    temps: str = typer.Option(None, "--temps", help="Temperatures for kappa1"),
    out: str = typer.Option(None, "--out", "-o", help="Output file (default: stdout)"),
    rel_tol: float = typer.Option(None, "--rel-tol", help="Quadrature relative tolerance"),
    config: str = typer.Option(None, "--config", "-c", help="Path to xychain.yaml"),
    quiet: bool = typer.Option(False, "--quiet", "-q", help="No console summary"),
) -> None:
    """nu for several anisotropies, checking that it stays at the Ising value."""
    with _exit_codes():
        cfg, spec = _load(config, rel_tol)
        a = cfg.analysis
        try:
            gamma_list = [float(x) for x in gammas.split(",") if x.strip()]
        except ValueError as exc:
            raise ParameterError(f"cannot parse anisotropies {gammas!r}") from exc
        temperatures = _positive(
            parse_temperatures(temps) if temps else a.temperatures(), "universality"
        )
        rows = universality_table(
            gamma_list,
            temperatures,
            a.offsets(),
            bracket=a.bracket,
            tol=a.field_tol,
            grid_points=a.grid_points,
            spec=spec,
            workers=cfg.workers,
        )
        data = [
            {
                "gamma": r.gamma,
                "kappa1": fit_to_dict(r.kappa1),
                "kappa2": fit_to_dict(r.kappa2),
                "nu": r.nu,
            }
            for r in rows
        ]
        emit(render_json({"rows": data}), _out_path(out), console)
        _panel("universality", {f"gamma={r.gamma:g}": f"nu={r.nu:.4f}" for r in rows}, quiet)


@app.command()
def init(
    path: str = typer.Option(".", "--path", help="Directory to write xychain.yaml into"),
) -> None:
    """Write a default xychain.yaml."""
    target = Path(path).resolve() / DEFAULT_CONFIG_FILENAME
    if target.exists():
        console.print(f"[yellow]Skipped:[/yellow] {target} already exists")
        return
    XYChainConfig().save(target)
    console.print(f"[green]Created:[/green] {target}")


@app.command()
def version() -> None:
    """Show xychain version."""
    console.print(f"[bold cyan]xychain[/bold cyan] v{__version__}")


# -- Logging setup -------------------------------------------------------------


@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Enable verbose logging"),
) -> None:
    """xychain — XY spin chain thermodynamics and criticality."""
    level = logging.DEBUG if verbose else logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(levelname)s: %(message)s",
    )


if __name__ == "__main__":
    app()
