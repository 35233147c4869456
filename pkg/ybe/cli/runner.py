"""Run a configured command, map errors to exit codes, render the report."""
import json
import time
from concurrent.futures import ProcessPoolExecutor
from typing import List, Tuple

from ybe.cli.commands import check_params, dispatch
from ybe.models.reports import GridRow, Report, Section
from ybe.models.run import RunConfig
from ybe.services.family import build, dump_params, load_grid, parse_params
from ybe.utils.errors import YBEError
from ybe.utils.logging import log_error_with_context, log_timing, setup_logger

logger = setup_logger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_IO = 3


def _fail_section(error: Exception) -> Section:
    context = getattr(error, "context", {})
    witnesses = {
        key: value
        for key, value in context.items()
        if isinstance(value, (int, str, list, tuple, dict, bool)) or value is None
    }
    return Section(
        verdict="not-applicable" if getattr(error, "exit_code", None) == 4 else "error",
        witnesses=witnesses,
        details={"error": type(error).__name__, "message": str(error)},
    )


def finish(report: Report) -> Report:
    """Set the exit code from the first failing section."""
    if report.exit_code == EXIT_PASS and report.first_failure is not None:
        report.exit_code = EXIT_FAIL
    return report


def run(config: RunConfig) -> Report:
    report = Report(command=config.command, source=config.source)
    started = time.perf_counter()
    try:
        if config.command == "grid":
            run_grid(config, report)
        else:
            dispatch(config, report)
    except YBEError as exc:
        log_error_with_context(logger, exc, f"ybe {config.command}", source=config.source)
        report.add(type(exc).__name__, _fail_section(exc))
        report.first_failure = report.first_failure or type(exc).__name__
        report.exit_code = exc.exit_code
    except OSError as exc:
        log_error_with_context(logger, exc, f"ybe {config.command}", source=config.source)
        report.add("io", _fail_section(exc))
        report.exit_code = EXIT_IO
    log_timing(
        logger,
        f"ybe {config.command} finished",
        (time.perf_counter() - started) * 1000,
        exit_code=report.exit_code,
    )
    return finish(report)


# ---------------------------------------------------------------------------
# Grid sweeps
# ---------------------------------------------------------------------------


def grid_row(job: Tuple[int, str, str]) -> GridRow:
    """Check one grid block; params travel as text so workers re-parse them."""
    index, text, source = job
    report = Report(command="check", source=f"{source}#{index}")
    try:
        params = parse_params(text, report.source)
        s = build(params)
        report.add(
            "validate",
            Section(verdict="pass", details={"size": s.size, "params": params.describe()}),
        )
        check_params(params, s, report)
    except YBEError as exc:
        log_error_with_context(logger, exc, "grid row", index=index)
        report.add(type(exc).__name__, _fail_section(exc))
        report.exit_code = exc.exit_code
    return GridRow(index=index, report=finish(report))


def grid_rows(config: RunConfig) -> List[GridRow]:
    jobs = [
        (i, dump_params(params), config.params_path)
        for i, params in enumerate(load_grid(config.params_path))
    ]
    if config.workers <= 1:
        return [grid_row(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        # map keeps grid order regardless of completion order
        return list(pool.map(grid_row, jobs))


def run_grid(config: RunConfig, report: Report) -> None:
    for row in grid_rows(config):
        r = row.report
        verdict = "pass" if r.exit_code == EXIT_PASS else "fail"
        report.add(
            f"row {row.index}",
            Section(
                verdict=verdict,
                details={
                    "first_failure": r.first_failure,
                    "exit_code": r.exit_code,
                    "sections": {name: s.verdict for name, s in r.sections.items()},
                },
                timing_ms=sum(s.timing_ms for s in r.sections.values()),
            ),
        )


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------


def render(report: Report, output: str) -> str:
    if output == "structured":
        return report.model_dump_json(indent=2)
    lines = [f"ybe {report.command} {report.source}"]
    for name, section in report.sections.items():
        lines.append(f"[{section.verdict}] {name} ({section.timing_ms:.1f} ms)")
        for key, value in section.details.items():
            if key == "lines":
                lines += [f"  {line}" for line in value]
            else:
                lines.append(f"  {key}: {json.dumps(value, default=str)}")
        for key, value in section.witnesses.items():
            lines.append(f"  witness {key}: {json.dumps(value, default=str)}")
    if report.first_failure:
        lines.append(f"first failure: {report.first_failure}")
    lines.append(f"exit {report.exit_code}")
    return "\n".join(lines)
