"""Machine-readable output (CSV grids, JSON summaries) and rich console summaries."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Sequence

from rich.console import Console
from rich.panel import Panel
from rich.table import Table

from xychain import __version__
from xychain.criticality import ExponentAnalysis, LinearFit, PseudocriticalResult


def format_value(value: Any) -> str:
    """CSV cell text; floats carry 17 significant digits so they round-trip exactly."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_csv(
    columns: Sequence[str],
    rows: Iterable[dict[str, Any]],
    metadata: dict[str, Any] | None = None,
    trailer: dict[str, Any] | None = None,
) -> str:
    """``#`` metadata lines, the column header, then one line per row.

    ``trailer`` is appended as a final ``# summary`` line holding JSON.
    """
    buf = io.StringIO()
    buf.write(f"# xychain {__version__}\n")
    for key, value in (metadata or {}).items():
        buf.write(f"# {key}: {format_value(value)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(row.get(c)) for c in columns])
    if trailer is not None:
        buf.write(f"# summary {json.dumps(trailer, sort_keys=True)}\n")
    return buf.getvalue()


def render_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def emit(text: str, out: Path | None, console: Console | None = None) -> None:
    """Write ``text`` to ``out``, or to stdout when no path is given."""
    if out is None:
        print(text, end="")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    if console is not None:
        console.print(f"[dim]wrote {out}[/dim]")


def fit_to_dict(fit: LinearFit) -> dict[str, Any]:
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "n_points": fit.n_points,
        "x_range": list(fit.x_range),
        "slope_stderr": fit.slope_stderr,
    }


def _points(results: Iterable[PseudocriticalResult]) -> list[dict[str, Any]]:
    return [
        {"T": r.T, "lambda_m": r.lambda_m, "chi_max": r.chi_max, "side": r.side} for r in results
    ]


@dataclass
class ExponentReport:
    """Structured summary of one exponent analysis."""

    gamma: float
    kappa1: float
    kappa2: float
    nu: float
    drift_exponent: float
    kappa2_side: str
    fits: dict[str, LinearFit] = field(default_factory=dict)
    pseudocritical: list[dict[str, float]] = field(default_factory=list)
    drift_points: list[dict[str, float]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @classmethod
    def from_analysis(cls, analysis: ExponentAnalysis) -> ExponentReport:
        return cls(
            gamma=analysis.gamma,
            kappa1=analysis.kappa1.slope,
            kappa2=analysis.kappa2.slope,
            nu=analysis.nu,
            drift_exponent=analysis.drift.slope,
            kappa2_side=analysis.kappa2_side,
            fits={
                "kappa1": analysis.kappa1,
                "kappa2": analysis.kappa2,
                "drift": analysis.drift,
            },
            pseudocritical=_points(analysis.pseudocritical),
            drift_points=_points(analysis.drift_points),
            notes=list(analysis.notes),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "gamma": self.gamma,
            "kappa1": self.kappa1,
            "kappa2": self.kappa2,
            "nu": self.nu,
            "drift_exponent": self.drift_exponent,
            "kappa2_side": self.kappa2_side,
            "r_squared": {name: fit.r_squared for name, fit in self.fits.items()},
            "fit_ranges": {name: list(fit.x_range) for name, fit in self.fits.items()},
            "fits": {name: fit_to_dict(fit) for name, fit in self.fits.items()},
            "pseudocritical": self.pseudocritical,
            "drift_points": self.drift_points,
            "notes": self.notes,
        }

    def to_json(self) -> str:
        """Serialize report to JSON for CI assertions."""
        return render_json(self.to_dict())

    def print_summary(self, console: Console | None = None) -> None:
        """Print a rich summary to the console."""
        console = console or Console(stderr=True)

        table = Table(title=f"Exponent fits (gamma = {self.gamma:g})", show_lines=False)
        table.add_column("Fit", style="bold")
        table.add_column("Slope", justify="right")
        table.add_column("R²", justify="right")
        table.add_column("Range", style="dim")
        for name, fit in self.fits.items():
            table.add_row(
                name,
                f"{fit.slope:.6f}",
                f"{fit.r_squared:.6f}",
                f"[{fit.x_range[0]:.3g}, {fit.x_range[1]:.3g}]",
            )
        console.print(table)

        lines = [
            f"[bold]nu:[/bold] {self.nu:.5f}",
            f"[bold]kappa2 side:[/bold] {self.kappa2_side}",
        ]
        lines.extend(f"[dim]{note}[/dim]" for note in self.notes)
        console.print(
            Panel(
                "\n".join(lines),
                title="[bold cyan]Criticality Report[/bold cyan]",
                border_style="cyan",
            )
        )
