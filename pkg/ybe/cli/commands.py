"""One handler per ``ybe`` command; each fills sections of a Report."""
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from ybe.models.reports import Report, Section
from ybe.models.run import RunConfig
from ybe.services.brace import (
    build_brace,
    lagrange_check,
    phi_H_ideal_check,
    socle,
    verify_brace_axioms,
)
from ybe.services.family import (
    FamilyParams,
    blocks,
    build,
    conjecture_witness,
    load_params,
    predict,
)
from ybe.services.permgroup import (
    analyze,
    det_Nk,
    enumerate_group,
    generator_orbits,
    wreath_check,
)
from ybe.services.retraction import tower
from ybe.services.solution import (
    FiniteSolution,
    check_strong_twisted_union,
    dump_solution,
    find_isomorphism,
    is_square_free,
    load_solution,
    parse_solution_table,
    restrict,
    validate,
)
from ybe.services.structgroup import (
    StructureGroup,
    kernel_lattice_check,
    probe_center_H,
    quotient_rank_check,
)
from ybe.utils.errors import InvariantSubsetError, NotApplicableError, ParseError
from ybe.utils.logging import log_timing, setup_logger

logger = setup_logger(__name__)

Handler = Callable[[RunConfig, Report], None]


def _elapsed(started: float) -> float:
    return round((time.perf_counter() - started) * 1000, 3)


def _verdict(ok: bool) -> str:
    return "pass" if ok else "fail"


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path=path) from exc


def load_input(path: str, as_params: bool) -> Tuple[Optional[FamilyParams], FiniteSolution]:
    if as_params:
        params = load_params(path)
        return params, build(params)
    return None, load_solution(path)


def _source(config: RunConfig) -> Tuple[Optional[FamilyParams], FiniteSolution]:
    return load_input(config.source, config.params_path is not None)


# ---------------------------------------------------------------------------
# build / check / tower
# ---------------------------------------------------------------------------


def cmd_build(config: RunConfig, report: Report) -> None:
    started = time.perf_counter()
    params = load_params(config.params_path)
    s = build(params)
    text = dump_solution(s)
    details: Dict[str, object] = {"params": params.describe(), "size": s.size}
    if config.out_path:
        try:
            Path(config.out_path).write_text(text)
        except OSError as exc:
            raise ParseError(f"cannot write file: {exc.strerror}", path=config.out_path) from exc
        details["written"] = config.out_path
    else:
        details["lines"] = text.splitlines()
    report.add("build", Section(verdict="info", details=details, timing_ms=_elapsed(started)))
    _validate_section(report, s.sigma)


def _validate_section(report: Report, table) -> bool:
    started = time.perf_counter()
    result = validate(table)
    report.add(
        "validate",
        Section(
            verdict=_verdict(result.accepted),
            witnesses=result.witnesses,
            details=result.model_dump(exclude={"witnesses"}),
            timing_ms=_elapsed(started),
        ),
    )
    return result.accepted


def cmd_check(config: RunConfig, report: Report) -> None:
    if config.params_path is not None:
        params = load_params(config.params_path)
        s = build(params)
        _validate_section(report, s.sigma)
        check_params(params, s, report)
        return

    table, labels = parse_solution_table(
        _read_text(config.solution_path), config.solution_path
    )
    if not _validate_section(report, table):
        return
    s = FiniteSolution.from_table(table, labels)
    started = time.perf_counter()
    result = tower(s)
    report.add(
        "tower",
        Section(verdict="info", details=result.to_report().model_dump(), timing_ms=_elapsed(started)),
    )


def check_params(params: FamilyParams, s: FiniteSolution, report: Report) -> None:
    """The property battery of a family instance against its predictions."""
    started = time.perf_counter()
    prediction = predict(params)
    measured = tower(s)
    kind = measured.classification.kind
    square_free_ok = prediction.square_free == is_square_free(s)
    irretractable_ok = not prediction.irretractable_sufficient or kind == "irretractable"
    report.add(
        "prediction",
        Section(
            verdict=_verdict(square_free_ok and irretractable_ok),
            details={
                **prediction.model_dump(),
                "square_free_matches": square_free_ok,
                "irretractable_implication": irretractable_ok,
            },
            timing_ms=_elapsed(started),
        ),
    )
    report.add(
        "tower",
        Section(verdict="info", details=measured.to_report().model_dump(), timing_ms=0.0),
    )

    started = time.perf_counter()
    parts = blocks(params)
    levels: List[Optional[int]] = []
    invariant = True
    try:
        for part in parts:
            c = tower(restrict(s, part)).classification
            levels.append(c.level if c.kind == "multipermutation" else None)
    except InvariantSubsetError as exc:
        invariant = False
        report.add(
            "blocks",
            Section(verdict="fail", witnesses={"pair": list(exc.pair)}, timing_ms=_elapsed(started)),
        )
    if invariant:
        bounded = all(level is not None and level <= 2 for level in levels)
        exact = not params.phi1.kernel_trivial or all(level == 2 for level in levels)
        report.add(
            "blocks",
            Section(
                verdict=_verdict(bounded and exact),
                details={"levels": levels, "at_most_two": bounded, "exactly_two": exact},
                timing_ms=_elapsed(started),
            ),
        )
        started = time.perf_counter()
        stu = check_strong_twisted_union(s, parts)
        report.add(
            "strong_twisted_union",
            Section(verdict=_verdict(stu), details={"blocks": len(parts)}, timing_ms=_elapsed(started)),
        )

    started = time.perf_counter()
    measured_orbits = generator_orbits(s.sigma)
    equal = sorted(measured_orbits) == sorted(sorted(p) for p in parts)
    if prediction.orbits_are_blocks_sufficient:
        verdict = _verdict(equal)
    else:
        verdict = "info"
    report.add(
        "orbits",
        Section(
            verdict=verdict,
            details={"orbits": len(measured_orbits), "equal_to_blocks": equal},
            timing_ms=_elapsed(started),
        ),
    )

    if invariant:
        started = time.perf_counter()
        witness = conjecture_witness(params)
        report.add(
            "conjecture",
            Section(verdict="info", details=witness.model_dump(), timing_ms=_elapsed(started)),
        )


def cmd_tower(config: RunConfig, report: Report) -> None:
    _, s = _source(config)
    started = time.perf_counter()
    result = tower(s)
    lines = [f"step {k}: size={size}" for k, size in enumerate(result.sizes[1:])]
    lines.append(str(result.classification))
    report.add(
        "tower",
        Section(
            verdict="info",
            witnesses={"separating": result.separating} if result.separating else {},
            details={**result.to_report().model_dump(), "lines": lines},
            timing_ms=_elapsed(started),
        ),
    )


# ---------------------------------------------------------------------------
# group / brace
# ---------------------------------------------------------------------------


def cmd_group(config: RunConfig, report: Report) -> None:
    params, s = _source(config)
    started = time.perf_counter()
    g = enumerate_group(s, config.cap)
    analysis = analyze(g)
    report.add(
        "group",
        Section(
            verdict=_verdict(analysis.orbits_consistent),
            details=analysis.model_dump(),
            timing_ms=_elapsed(started),
        ),
    )
    if params is None:
        return

    started = time.perf_counter()
    check = wreath_check(params, g, analysis)
    report.add(
        "wreath",
        Section(
            verdict=_verdict(check.matches),
            details=check.model_dump(),
            timing_ms=_elapsed(started),
        ),
    )
    if check.applicable:
        k = params.A.moduli[0]
        started = time.perf_counter()
        report.add(
            "det_N",
            Section(verdict="pass", details={"k": k, "det": det_Nk(k)}, timing_ms=_elapsed(started)),
        )


def cmd_brace(config: RunConfig, report: Report) -> None:
    params, s = _source(config)
    started = time.perf_counter()
    g = enumerate_group(s, config.cap)
    b = build_brace(g)
    details: Dict[str, object] = {
        "order": b.order,
        "lattice_index": b.lattice.determinant(),
        "pivots": list(b.radices),
        "lagrange": lagrange_check(b),
    }
    if config.dump_hnf:
        details["lines"] = [" ".join(map(str, row)) for row in b.K_basis]
    report.add(
        "lattice",
        Section(
            verdict=_verdict(b.lattice.determinant() == g.order and details["lagrange"]),
            details=details,
            timing_ms=_elapsed(started),
        ),
    )

    started = time.perf_counter()
    kernel = kernel_lattice_check(s, b.lattice, samples=config.samples, seed=config.seed)
    report.add(
        "kernel",
        Section(
            verdict=_verdict(kernel.passed),
            details=kernel.model_dump(),
            timing_ms=_elapsed(started),
        ),
    )

    started = time.perf_counter()
    soc = socle(b)
    classification = tower(s).classification
    # trivial socle is forced for irretractable inputs
    ok = soc.order == 1 or classification.kind != "irretractable"
    report.add(
        "socle",
        Section(
            verdict=_verdict(ok),
            details={**soc.model_dump(), "classification": str(classification)},
            timing_ms=_elapsed(started),
        ),
    )

    started = time.perf_counter()
    axioms = verify_brace_axioms(
        b,
        sample=config.axiom_sample,
        seed=config.seed,
        exhaustive_limit=config.axiom_exhaustive_limit,
    )
    report.add(
        "axioms",
        Section(verdict="pass", details=axioms.model_dump(), timing_ms=_elapsed(started)),
    )

    if params is None:
        return
    started = time.perf_counter()
    try:
        ideal = phi_H_ideal_check(params, b)
    except NotApplicableError as exc:
        report.add(
            "ideal",
            Section(
                verdict="not-applicable",
                details={"hypothesis": exc.hypothesis},
                timing_ms=_elapsed(started),
            ),
        )
        return
    report.add(
        "ideal",
        Section(verdict=_verdict(ideal.passed), details=ideal.model_dump(), timing_ms=_elapsed(started)),
    )


# ---------------------------------------------------------------------------
# sg / iso
# ---------------------------------------------------------------------------


def cmd_sg(config: RunConfig, report: Report) -> None:
    params, s = _source(config)
    sg = StructureGroup(s)
    orbit_list = sg.orbits()

    if config.word is not None:
        started = time.perf_counter()
        g = sg.from_word(sg.parse_word(config.word))
        product = sg.orbit_decompose(g, orbit_list, "product")
        total = sg.orbit_decompose(g, orbit_list, "sum")
        report.add(
            "word",
            Section(
                verdict="info",
                details={
                    "word": config.word,
                    "v": list(g.v),
                    "perm": list(g.perm),
                    "deg": g.degree,
                    "orbit_degrees": list(sg.orbit_degrees(g, orbit_list)),
                    "product_factors": [[i, list(f.v)] for i, f in product.factors],
                    "sum_factors": [[i, list(f.v)] for i, f in total.factors],
                    "in_H": sg.in_ideal_H(g, orbit_list),
                    "labels": {x: s.labels[x] for x, c in enumerate(g.v) if c},
                },
                timing_ms=_elapsed(started),
            ),
        )

    started = time.perf_counter()
    rank = quotient_rank_check(s, orbit_list, samples=config.samples, seed=config.seed)
    report.add(
        "quotient_rank",
        Section(verdict=_verdict(rank.passed), details=rank.model_dump(), timing_ms=_elapsed(started)),
    )

    if config.probe_center:
        started = time.perf_counter()
        probe = probe_center_H(params, config.radius)
        report.add(
            "center_probe",
            Section(
                verdict=_verdict(probe.passed),
                witnesses={"centralizing": probe.centralizing} if probe.centralizing else {},
                details=probe.model_dump(exclude={"centralizing"}),
                timing_ms=_elapsed(started),
            ),
        )


def cmd_iso(config: RunConfig, report: Report) -> None:
    as_params = config.params_path is not None
    _, s1 = _source(config)
    _, s2 = load_input(config.other_path, as_params)
    started = time.perf_counter()
    eta = find_isomorphism(s1, s2)
    details: Dict[str, object] = {"sizes": [s1.size, s2.size], "found": eta is not None}
    if eta is not None:
        details["map"] = {s1.labels[x]: s2.labels[y] for x, y in enumerate(eta)}
    report.add(
        "isomorphism",
        Section(verdict=_verdict(eta is not None), details=details, timing_ms=_elapsed(started)),
    )


HANDLERS: Dict[str, Handler] = {
    "build": cmd_build,
    "check": cmd_check,
    "tower": cmd_tower,
    "group": cmd_group,
    "brace": cmd_brace,
    "sg": cmd_sg,
    "iso": cmd_iso,
}


def dispatch(config: RunConfig, report: Report) -> None:
    started = time.perf_counter()
    HANDLERS[config.command](config, report)
    log_timing(logger, f"ybe {config.command}", _elapsed(started), source=config.source)

