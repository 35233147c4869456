"""The X(A, B, I) family of square-free irretractable solutions.

Points (a, b, i) are indexed block-major: i, then the coordinates of a, then
those of b, so each block X_i is a contiguous slice. The left actions are

    sigma_{(a,b,i)}(c,d,j) = (c, d + phi1(a - c), j)   if i == j
                             (c + phi2(b), d, j)        otherwise
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Tuple, Union

from ybe.models.reports import ConjectureWitness, PropertyPrediction
from ybe.services.abgroup import (
    AbElement,
    AbHom,
    EvenMap,
    FiniteAbelianGroup,
    ValidatedEvenMap,
    ValidatedHom,
    evenmap_validate,
    hom_validate,
)
from ybe.services.retraction import tower
from ybe.services.solution import (
    FiniteSolution,
    check_strong_twisted_union,
    is_square_free,
    restrict,
)
from ybe.utils.errors import ConsistencyError, ParseError, StructuralError, YBEError
from ybe.utils.logging import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class FamilyParams:
    A: FiniteAbelianGroup
    B: FiniteAbelianGroup
    i_count: int
    phi1: ValidatedEvenMap
    phi2: ValidatedHom

    def __post_init__(self) -> None:
        if not (self.A.is_nontrivial and self.B.is_nontrivial):
            raise StructuralError("A and B must be nontrivial groups")
        if self.i_count < 2:
            raise StructuralError(f"|I| must be at least 2, got {self.i_count}")
        if self.phi1.source != self.A or self.phi1.target != self.B:
            raise StructuralError("phi1 must map A to B")
        if self.phi2.source != self.B or self.phi2.target != self.A:
            raise StructuralError("phi2 must map B to A")

    @property
    def block_size(self) -> int:
        return self.A.order * self.B.order

    @property
    def size(self) -> int:
        return self.i_count * self.block_size

    def describe(self) -> Dict[str, object]:
        return {
            "A": str(self.A),
            "B": str(self.B),
            "I": self.i_count,
            "phi1": self.phi1.even_map.lines(),
            "phi2": str(self.phi2.hom),
        }


def make_params(
    A: FiniteAbelianGroup,
    B: FiniteAbelianGroup,
    i_count: int,
    phi1: EvenMap,
    phi2: AbHom,
) -> FamilyParams:
    return FamilyParams(A, B, i_count, evenmap_validate(phi1), hom_validate(phi2))


def indicator_map(A: FiniteAbelianGroup, B: FiniteAbelianGroup) -> EvenMap:
    """0 -> 0 and every a != 0 -> the first basis vector of B."""
    one = B.element((1,) + (0,) * (B.rank - 1))
    return EvenMap.from_function(A, B, lambda a: B.zero if a == A.zero else one)


def cyclic_params(k: int, i_count: int = 2, phi2_unit: int = 1) -> FamilyParams:
    """A = B = Z/k with phi1 the indicator map and phi2 = multiplication by a unit."""
    Zk = FiniteAbelianGroup.cyclic(k)
    return make_params(Zk, Zk, i_count, indicator_map(Zk, Zk), AbHom(Zk, Zk, ((phi2_unit,),)))


def identity_params(
    A: FiniteAbelianGroup, i_count: int = 2
) -> FamilyParams:
    return make_params(
        A, A, i_count, EvenMap.from_function(A, A, lambda a: a), AbHom.identity(A)
    )


# ---------------------------------------------------------------------------
# Points
# ---------------------------------------------------------------------------


def point_index(params: FamilyParams, a: AbElement, b: AbElement, i: int) -> int:
    """Index of (a, b, i) with i 0-based."""
    if not 0 <= i < params.i_count:
        raise StructuralError(f"block {i} out of range")
    return i * params.block_size + params.A.index(a) * params.B.order + params.B.index(b)


def point_coords(params: FamilyParams, index: int) -> Tuple[AbElement, AbElement, int]:
    i, rest = divmod(index, params.block_size)
    a_idx, b_idx = divmod(rest, params.B.order)
    return params.A.elements[a_idx], params.B.elements[b_idx], i


def point_label(params: FamilyParams, index: int) -> str:
    a, b, i = point_coords(params, index)
    return f"({params.A.format(a)},{params.B.format(b)},{i + 1})"


def blocks(params: FamilyParams) -> List[List[int]]:
    n = params.block_size
    return [list(range(i * n, (i + 1) * n)) for i in range(params.i_count)]


# ---------------------------------------------------------------------------
# Construction
# ---------------------------------------------------------------------------


def _tables(params: FamilyParams):
    A, B = params.A, params.B
    add_a, neg_a, add_b, neg_b = A.add_table, A.neg_table, B.add_table, B.neg_table
    phi1 = [B.index(params.phi1(a)) for a in A.elements]
    phi2 = [A.index(params.phi2(b)) for b in B.elements]
    return add_a, neg_a, add_b, neg_b, phi1, phi2


def build(params: FamilyParams) -> FiniteSolution:
    """Build the solution and check the derived gamma against its closed form."""
    add_a, neg_a, add_b, neg_b, phi1, phi2 = _tables(params)
    nB, blk = params.B.order, params.block_size
    n = params.size

    def idx(c: int, d: int, j: int) -> int:
        return j * blk + c * nB + d

    coords = [(rest // nB, rest % nB, i) for i in range(params.i_count) for rest in range(blk)]

    sigma = [[0] * n for _ in range(n)]
    expected_gamma = [[0] * n for _ in range(n)]
    for x, (a, b, i) in enumerate(coords):
        row = sigma[x]
        for y, (c, d, j) in enumerate(coords):
            if i == j:
                row[y] = idx(c, add_b[d][phi1[add_a[a][neg_a[c]]]], j)
            else:
                row[y] = idx(add_a[c][phi2[b]], d, j)
    # gamma_{(c,d,j)}(a,b,i) = sigma^-1_{(c,d,j)}(a,b,i)
    for z, (c, d, j) in enumerate(coords):
        row = expected_gamma[z]
        for x, (a, b, i) in enumerate(coords):
            if i == j:
                row[x] = idx(a, add_b[b][neg_b[phi1[add_a[c][neg_a[a]]]]], i)
            else:
                row[x] = idx(add_a[a][neg_a[phi2[d]]], b, i)

    labels = [point_label(params, x) for x in range(n)]
    solution = FiniteSolution.from_table(sigma, labels)
    if solution.gamma != tuple(tuple(row) for row in expected_gamma):
        raise ConsistencyError("derived gamma differs from its closed form")
    logger.info(
        "Built X(%s, %s, %d) with %d points", params.A, params.B, params.i_count, n
    )
    return solution


def predict(params: FamilyParams) -> PropertyPrediction:
    return PropertyPrediction(
        square_free=params.phi1.zero_to_zero,
        irretractable_sufficient=params.phi1.kernel_trivial and params.phi2.injective,
        orbits_are_blocks_sufficient=params.phi1.generates_target and params.phi2.surjective,
    )


def vendramin_params() -> FamilyParams:
    return identity_params(FiniteAbelianGroup.cyclic(2), 2)


def vendramin_instance() -> FiniteSolution:
    """The 8-point irretractable square-free solution, A = B = Z/2, |I| = 2."""
    return build(vendramin_params())


def conjecture_witness(params: FamilyParams) -> ConjectureWitness:
    s = build(params)
    square_free = is_square_free(s)
    multiperm = tower(s).classification.kind == "multipermutation"
    parts = blocks(params)
    stu = check_strong_twisted_union(s, parts)
    blocks_mp = all(
        tower(restrict(s, part)).classification.kind == "multipermutation"
        for part in parts
    )
    counterexample = square_free and not multiperm
    return ConjectureWitness(
        square_free=square_free,
        multipermutation=multiperm,
        strong_twisted_union=stu,
        blocks_multipermutation=blocks_mp,
        two_blocks=params.i_count == 2,
        counterexample=counterexample,
        answers_question=counterexample and stu and blocks_mp and params.i_count == 2,
    )


# ---------------------------------------------------------------------------
# Params files
# ---------------------------------------------------------------------------

_ASSIGN = re.compile(r"^(A|B|I|phi1|phi2)\s*=\s*(.+)$")
_PHI1_LINE = re.compile(r"^phi1\s*:\s*(.+)$")


def _error_reason(exc: Exception) -> str:
    return getattr(exc, "reason", str(exc))


def _phi1_shorthand(A: FiniteAbelianGroup, B: FiniteAbelianGroup, name: str) -> EvenMap:
    if name == "identity":
        if A != B:
            raise StructuralError("phi1 = identity needs A == B")
        return EvenMap.from_function(A, B, lambda a: a)
    if name == "zero":
        return EvenMap.from_function(A, B, lambda a: B.zero)
    if name == "indicator":
        return indicator_map(A, B)
    raise ParseError(f"unknown phi1 shorthand {name!r}")


def _phi2_value(A: FiniteAbelianGroup, B: FiniteAbelianGroup, value: str) -> AbHom:
    if value == "identity":
        if A != B:
            raise StructuralError("phi2 = identity needs A == B")
        return AbHom.identity(B)
    if value == "zero":
        return AbHom.zero(B, A)
    return AbHom.parse(B, A, value)


def parse_params(text: str, path: str = "<text>", first_line: int = 1) -> FamilyParams:
    """Parse one params block.

    Besides the explicit ``phi1: a -> b`` lines, ``phi1 = identity | zero |
    indicator`` and ``phi2 = identity | zero`` are accepted as shorthands.
    """
    fields: Dict[str, Tuple[str, int]] = {}
    phi1_lines: List[Tuple[str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=first_line):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        match = _PHI1_LINE.match(line)
        if match:
            phi1_lines.append((match.group(1), lineno))
            continue
        match = _ASSIGN.match(line)
        if not match:
            raise ParseError(f"unrecognized line {line!r}", line=lineno, path=path)
        key, value = match.group(1), match.group(2).strip()
        if key in fields:
            raise ParseError(f"{key} given twice", line=lineno, path=path)
        fields[key] = (value, lineno)

    for key in ("A", "B", "I", "phi2"):
        if key not in fields:
            raise ParseError(f"missing {key} = ...", path=path)
    if "phi1" in fields and phi1_lines:
        raise ParseError("phi1 given both as a table and a shorthand", path=path)
    if "phi1" not in fields and not phi1_lines:
        raise ParseError("missing phi1", path=path)

    def at(key: str, fn):
        value, lineno = fields[key]
        try:
            return fn(value)
        except (YBEError, ValueError) as exc:
            raise ParseError(_error_reason(exc), line=lineno, path=path) from exc

    A = at("A", FiniteAbelianGroup.parse)
    B = at("B", FiniteAbelianGroup.parse)
    i_count = at("I", int)

    if "phi1" in fields:
        phi1_raw = at("phi1", lambda v: _phi1_shorthand(A, B, v))
    else:
        table: Dict[AbElement, AbElement] = {}
        for line, lineno in phi1_lines:
            try:
                table.update(EvenMap.parse_lines(A, B, [line]).table)
            except YBEError as exc:
                raise ParseError(_error_reason(exc), line=lineno, path=path) from exc
        phi1_raw = EvenMap(A, B, table)
    phi2_raw = at("phi2", lambda v: _phi2_value(A, B, v))

    try:
        return make_params(A, B, i_count, phi1_raw, phi2_raw)
    except YBEError as exc:
        raise ParseError(_error_reason(exc), line=first_line, path=path) from exc


def parse_grid(text: str, path: str = "<text>") -> List[FamilyParams]:
    """Params blocks separated by ``---`` lines."""
    grid: List[FamilyParams] = []
    chunk: List[str] = []
    start = 1
    for lineno, line in enumerate(text.splitlines() + ["---"], start=1):
        if line.strip() == "---":
            if any(l.split("#", 1)[0].strip() for l in chunk):
                grid.append(parse_params("\n".join(chunk), path, first_line=start))
            chunk, start = [], lineno + 1
        else:
            chunk.append(line)
    if not grid:
        raise ParseError("grid file holds no params blocks", path=path)
    return grid


def _read(source: Union[str, Path]) -> str:
    try:
        return Path(source).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path=str(source)) from exc


def load_params(source: Union[str, Path]) -> FamilyParams:
    return parse_params(_read(source), str(source))


def load_grid(source: Union[str, Path]) -> List[FamilyParams]:
    return parse_grid(_read(source), str(source))


def dump_params(params: FamilyParams) -> str:
    lines = [f"A = {params.A}", f"B = {params.B}", f"I = {params.i_count}"]
    lines += [f"phi1: {line}" for line in params.phi1.even_map.lines()]
    lines.append(f"phi2 = {params.phi2.hom}")
    return "\n".join(lines) + "\n"

