import json
import logging
from contextlib import contextmanager
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Sequence

import click
import typer
from rich.console import Console
from rich.logging import RichHandler

from datacomplex.config import get_settings, override_settings
from datacomplex.errors import BudgetExceededError, ConfigError, DataComplexError
from datacomplex.joins import (
    FillResult,
    HornProblem,
    JoinProblem,
    conditional_glue,
    fill_boundary,
    fill_horn_constructive,
    fill_horn_lp,
    minimize_boundary_slack,
    overlap_consistent,
)
from datacomplex.lp import BUDGET_EXCEEDED
from datacomplex.measures import (
    closure_up_to,
    is_path_connected,
    is_well_aligned,
    marginalize,
    path_components,
    total_mass,
)
from datacomplex.obstruction import (
    DataSection,
    classify_trichotomy,
    default_cells,
    evaluate_cocycle,
    persistence as run_persistence,
    section_from_complex,
)
from datacomplex.project import Project, load_project
from datacomplex.reports import build_report
from datacomplex.simpattr import face_closure, face_list, homology_rank, is_nondegenerate
from datacomplex.transport import optimal_coupling
from datacomplex.utils.rationals import format_rational, parse_rational

console = Console(stderr=True)
app = typer.Typer(help="Exact merging of data tables and the obstructions to it.")

CONFIG_OPTION = typer.Option(Path("datacomplex.json"), "--config", "-c", help="Project config JSON")
OUT_OPTION = typer.Option(None, "--out", help="Write the report here instead of stdout")
DECIMAL_OPTION = typer.Option(False, "--decimal", help="Add lossy decimal companions to exact values")


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log solver decisions")):
    level = "DEBUG" if verbose else get_settings().log_level
    logging.basicConfig(
        level=level,
        format="%(message)s",
        handlers=[RichHandler(console=console, show_path=False)],
        force=True,
    )


# --------------------------------
# Plumbing
# --------------------------------
@contextmanager
def reporting_errors() -> Iterator[None]:
    """Library errors become a one-line diagnostic and their exit code."""
    try:
        yield
    except DataComplexError as e:
        console.print(f"[red]{type(e).__name__}:[/red] {e.message}")
        for key, value in sorted(e.details.items()):
            if key in ("field", "line", "source", "row", "components", "cell", "faces"):
                console.print(f"  {key}: {value}")
        raise typer.Exit(e.exit_code)


@contextmanager
def project_settings(project: Project) -> Iterator[None]:
    options = project.options
    with override_settings(variable_budget=options.variable_budget,
                           max_witness_combinations=options.max_witness_combinations):
        yield


def emit(command: str, project: Project, arguments: Dict[str, Any], result: Dict[str, Any],
         out: Optional[Path], decimal: bool) -> None:
    report = build_report(command, project.input_hashes, arguments, result, decimal)
    text = json.dumps(report, sort_keys=True, indent=2, ensure_ascii=False)
    if out is None:
        typer.echo(text)
    else:
        out.write_text(text + "\n", encoding="utf-8")
        console.print(f"[green]Report saved to {out}[/green]")


def require_within_budget(filled: FillResult) -> None:
    if filled.status == BUDGET_EXCEEDED:
        raise BudgetExceededError("fill LP exceeds the variable budget", filled.sizes)


def parse_slack(text: str) -> Fraction:
    try:
        value = parse_rational(text)
    except ValueError as e:
        raise ConfigError(f"--slack: {e}", field="slack") from None
    if value < 0:
        raise ConfigError("--slack must be nonnegative", field="slack")
    return value


def parse_list(text: str) -> tuple:
    items = tuple(a.strip() for a in text.split(",") if a.strip())
    if not items:
        raise ConfigError(f"empty attribute list {text!r}", field="cell")
    return items


def parse_overlap(text: str) -> tuple:
    """'1,4:1,3' -> ([1, 4], [1, 3]); ':' is the empty overlap."""
    if text.count(":") != 1:
        raise ConfigError(f"--overlap needs LEFT:RIGHT, got {text!r}", field="overlap")
    try:
        left, right = ([int(v) for v in side.split(",") if v.strip()] for side in text.split(":"))
    except ValueError:
        raise ConfigError(f"--overlap indices must be integers, got {text!r}", field="overlap") from None
    return left, right


def cell_section(project: Project, cell: Sequence[str]) -> DataSection:
    if len(cell) < 2:
        raise ConfigError(f"cell {list(cell)} needs at least two attributes", field="cell")
    return section_from_complex(project.complex, len(cell) - 2, include_degenerate=not is_nondegenerate(cell))


def section_and_cells(project: Project, dim: int, cells: Optional[List[str]]):
    if dim < 1:
        raise ConfigError("--dim must be at least 1", field="dim")
    if not cells:
        section = section_from_complex(project.complex, dim - 1)
        return section, default_cells(section, dim)
    chosen = [parse_list(text) for text in cells]
    for cell in chosen:
        if len(cell) != dim + 1:
            raise ConfigError(f"cell {list(cell)} is not of dimension {dim}", field="cell")
    # faces of a degenerate cell may repeat attributes too
    degenerate = any(not is_nondegenerate(cell) for cell in chosen)
    return section_from_complex(project.complex, dim - 1, include_degenerate=degenerate), chosen


# --------------------------------
# CLI 1 : validate project
# --------------------------------
@app.command()
def validate(config: Path = CONFIG_OPTION, out: Optional[Path] = OUT_OPTION, decimal: bool = DECIMAL_OPTION):
    """Load schema and tables and check that the generators fit together."""
    with reporting_errors():
        project = load_project(config)
        c = project.complex
        longest = max(len(t.attributes) for t in c.generators)
        alignment = is_well_aligned(c, longest)
        result: Dict[str, Any] = {
            "valid": True,
            "tables": {
                name: {"list": list(t.attributes), "atoms": len(t.atoms),
                       "mass": format_rational(total_mass(t))}
                for name, t in project.tables.items()
            },
            "path_connected": is_path_connected(c),
            "components": path_components(c),
            "well_aligned": alignment.aligned,
        }
        if alignment.witness is not None:
            w = alignment.witness
            result["misalignment"] = {
                "list": list(w.attributes),
                "left": w.left.to_dict(),
                "right": w.right.to_dict(),
                "left_source": w.left_source[0] if w.left_source else None,
                "right_source": w.right_source[0] if w.right_source else None,
            }
        emit("validate", project, {}, result, out, decimal)


# --------------------------------
# CLI 2 : marginal
# --------------------------------
@app.command()
def marginal(
    table: str,
    drop: int = typer.Option(..., "--drop", help="Position to marginalize"),
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    decimal: bool = DECIMAL_OPTION,
):
    """Marginalize one position of a table."""
    with reporting_errors():
        project = load_project(config)
        result = {"table": marginalize(project.table(table), drop).to_dict()}
        emit("marginal", project, {"table": table, "drop": drop}, result, out, decimal)


# --------------------------------
# CLI 3 : Wasserstein distance
# --------------------------------
@app.command()
def wasserstein(
    first: str,
    second: str,
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    decimal: bool = DECIMAL_OPTION,
):
    """Exact W1 distance between two tables on one list, with an optimal coupling."""
    with reporting_errors():
        project = load_project(config)
        with project_settings(project):
            coupling = optimal_coupling(project.schema, project.table(first), project.table(second))
        result = {"distance": format_rational(coupling.cost(project.schema)), "coupling": coupling.to_dict()}
        emit("wasserstein", project, {"first": first, "second": second}, result, out, decimal)


# --------------------------------
# CLI 4 : conditional glue
# --------------------------------
@app.command()
def glue(
    first: str,
    second: str,
    overlap: str = typer.Option(..., "--overlap", help="Index maps LEFT:RIGHT, e.g. 1,4:1,3"),
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    decimal: bool = DECIMAL_OPTION,
):
    """Join two tables over a shared sub-list. An inconsistent overlap is a finding."""
    with reporting_errors():
        project = load_project(config)
        left, right = parse_overlap(overlap)
        problem = JoinProblem.over(project.table(first), project.table(second), left, right)
        result: Dict[str, Any] = {
            "overlap": list(problem.overlap),
            "merge": problem.merge().to_dict(),
            "consistent": overlap_consistent(problem),
        }
        if result["consistent"]:
            result["table"] = conditional_glue(problem).to_dict()
        emit("glue", project, {"first": first, "second": second, "overlap": overlap}, result, out, decimal)


# --------------------------------
# CLI 5 : horns and boundaries
# --------------------------------
@app.command("fill-horn")
def fill_horn(
    cell: str = typer.Option(..., "--cell", help="Full attribute list, e.g. X,Y,Z"),
    missing: int = typer.Option(..., "--missing", help="Index of the face to leave out"),
    method: str = typer.Option("lp", "--method", help="lp or constructive"),
    slack: str = typer.Option("0", "--slack", help="Face slack (lp method only)"),
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    decimal: bool = DECIMAL_OPTION,
):
    """Fill the horn of a cell whose faces come from the project's closure."""
    with reporting_errors():
        if method not in ("lp", "constructive"):
            raise ConfigError(f"unknown method {method!r}", field="method")
        project = load_project(config)
        full_list = parse_list(cell)
        section = cell_section(project, full_list)
        faces = {i: section.table(face_list(full_list, i)) for i in range(len(full_list)) if i != missing}
        if len(faces) != len(full_list) - 1:
            raise ConfigError(f"--missing {missing} is not a face of {list(full_list)}", field="missing")
        horn = HornProblem(full_list, faces, parse_slack(slack))
        with project_settings(project):
            filled = fill_horn_constructive(project.schema, horn) if method == "constructive" \
                else fill_horn_lp(project.schema, horn)
        arguments = {"cell": list(full_list), "missing": missing, "method": method, "slack": slack}
        require_within_budget(filled)
        emit("fill-horn", project, arguments, filled.to_dict(), out, decimal)


@app.command("fill-boundary")
def fill_boundary_cmd(
    cell: str = typer.Option(..., "--cell", help="Full attribute list, e.g. X,Y,Z"),
    slack: str = typer.Option("0", "--slack", help="Allowed W1 error on every face"),
    minimize: bool = typer.Option(False, "--minimize", help="Report the smallest slack that fills"),
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    decimal: bool = DECIMAL_OPTION,
):
    """Fill a full boundary within a slack, or find the minimal slack."""
    with reporting_errors():
        project = load_project(config)
        full_list = parse_list(cell)
        section = cell_section(project, full_list)
        faces = {i: section.table(face_list(full_list, i)) for i in range(len(full_list))}
        horn = HornProblem(full_list, faces)
        with project_settings(project):
            if minimize:
                filled = minimize_boundary_slack(project.schema, horn)
            else:
                filled = fill_boundary(project.schema, horn, parse_slack(slack))
        arguments = {"cell": list(full_list), "slack": None if minimize else slack, "minimize": minimize}
        require_within_budget(filled)
        emit("fill-boundary", project, arguments, filled.to_dict(), out, decimal)


# --------------------------------
# CLI 6 : obstruction
# --------------------------------
@app.command()
def cocycle(
    dim: int = typer.Option(..., "--dim", help="Level n of the cells"),
    slack: str = typer.Option("0", "--slack"),
    cell: Optional[List[str]] = typer.Option(None, "--cell", help="Restrict to these cells (repeatable)"),
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    decimal: bool = DECIMAL_OPTION,
):
    """Evaluate the obstruction cocycle of the project's section at a slack."""
    with reporting_errors():
        project = load_project(config)
        section, cells = section_and_cells(project, dim, cell)
        with project_settings(project):
            report = evaluate_cocycle(section, project.complex, cells, parse_slack(slack))
        arguments = {"dim": dim, "slack": slack, "cells": [list(x) for x in cells]}
        emit("cocycle", project, arguments, report.to_dict(), out, decimal)


@app.command()
def trichotomy(
    dim: int = typer.Option(..., "--dim"),
    slack: str = typer.Option("0", "--slack"),
    cell: Optional[List[str]] = typer.Option(None, "--cell", help="Restrict to these cells (repeatable)"),
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    decimal: bool = DECIMAL_OPTION,
):
    """Case 1: extends. Case 2: extends after repairing the previous level. Case 3: neither."""
    with reporting_errors():
        project = load_project(config)
        section, cells = section_and_cells(project, dim, cell)
        with project_settings(project):
            verdict = classify_trichotomy(section, project.complex, cells, parse_slack(slack))
        arguments = {"dim": dim, "slack": slack, "cells": [list(x) for x in cells]}
        emit("trichotomy", project, arguments, verdict.to_dict(), out, decimal)


@app.command()
def persistence(
    dim: int = typer.Option(..., "--dim"),
    cell: Optional[List[str]] = typer.Option(None, "--cell", help="Restrict to these cells (repeatable)"),
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    decimal: bool = DECIMAL_OPTION,
):
    """Slacks at which the obstruction vanishes (t_n) and becomes a coboundary (t'_n)."""
    with reporting_errors():
        project = load_project(config)
        section, cells = section_and_cells(project, dim, cell)
        with project_settings(project):
            levels = run_persistence(section, project.complex, cells)
            case_at_0 = classify_trichotomy(section, project.complex, cells, 0).case
        result = levels.to_dict()
        result["case_at_0"] = case_at_0
        emit("persistence", project, {"dim": dim, "cells": [list(x) for x in cells]}, result, out, decimal)


# --------------------------------
# CLI 7 : homology of the list complex
# --------------------------------
@app.command()
def homology(
    dim: int = typer.Option(..., "--dim", help="Degree k"),
    config: Path = CONFIG_OPTION,
    out: Optional[Path] = OUT_OPTION,
    decimal: bool = DECIMAL_OPTION,
):
    """Z/2 Betti number of the complex of attribute lists the tables generate."""
    with reporting_errors():
        if dim < 0:
            raise ConfigError("--dim must be nonnegative", field="dim")
        project = load_project(config)
        lists = face_closure(t.attributes for t in closure_up_to(project.complex, dim + 2) if t.attributes)
        result = {"dim": dim, "rank": homology_rank(lists, dim), "lists": len(lists)}
        emit("homology", project, {"dim": dim}, result, out, decimal)


def run(args: Sequence[str]) -> int:
    """Runs one command in-process and returns its exit code."""
    try:
        code = app(list(args), standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    return code or 0


# --------------------------------
# Entry-point
# --------------------------------
if __name__ == "__main__":
    app()
