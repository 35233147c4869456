"""Finite involutive non-degenerate set-theoretic solutions of the YBE.

A solution on {0..n-1} is stored through its left actions: ``sigma[x][y]``
is sigma_x(y). The right actions are derived as
gamma_y(x) = sigma^-1_{sigma_x(y)}(x) so that r(x, y) = (sigma_x(y), gamma_y(x)).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ybe.models.reports import ValidationReport
from ybe.utils.errors import (
    ConsistencyError,
    InvariantSubsetError,
    ParseError,
    StructuralError,
)
from ybe.utils.logging import log_check_result, setup_logger

logger = setup_logger(__name__)

Table = Tuple[Tuple[int, ...], ...]


def _is_bijection(row: Sequence[int], n: int) -> bool:
    return sorted(row) == list(range(n))


def _inverse(row: Sequence[int]) -> Tuple[int, ...]:
    inv = [0] * len(row)
    for i, j in enumerate(row):
        inv[j] = i
    return tuple(inv)


def _normalize(sigma_table: Iterable[Iterable[int]]) -> Table:
    table = tuple(tuple(int(v) for v in row) for row in sigma_table)
    n = len(table)
    if n == 0:
        raise StructuralError("a solution needs at least one point")
    for x, row in enumerate(table):
        if len(row) != n:
            raise StructuralError(f"row {x} has {len(row)} entries, expected {n}", row=x)
        for v in row:
            if not 0 <= v < n:
                raise StructuralError(f"row {x} has out-of-range entry {v}", row=x)
    return table


@dataclass(frozen=True)
class FiniteSolution:
    labels: Tuple[str, ...]
    sigma: Table
    sigma_inv: Table
    gamma: Table  # gamma[y][x] = gamma_y(x)

    @classmethod
    def from_table(
        cls, sigma_table: Iterable[Iterable[int]], labels: Optional[Sequence[str]] = None
    ) -> "FiniteSolution":
        """Validate ``sigma_table`` and build the solution, or raise."""
        sigma = _normalize(sigma_table)
        report = validate(sigma)
        if not report.accepted:
            failed = [
                flag
                for flag in ("involutive", "non_degenerate", "braid")
                if not getattr(report, flag)
            ]
            raise StructuralError(
                f"table is not a solution: {', '.join(failed)} failed",
                report=report.model_dump(),
            )
        n = len(sigma)
        labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(n))
        if len(labels) != n or len(set(labels)) != n:
            raise StructuralError("labels must be distinct, one per point")
        sigma_inv = tuple(_inverse(row) for row in sigma)
        return cls(labels, sigma, sigma_inv, _gamma(sigma, sigma_inv))

    @classmethod
    def trivial(cls, n: int) -> "FiniteSolution":
        return cls.from_table([list(range(n)) for _ in range(n)])

    @property
    def size(self) -> int:
        return len(self.sigma)

    def r(self, x: int, y: int) -> Tuple[int, int]:
        return self.sigma[x][y], self.gamma[y][x]

    def relabel(self, perm: Sequence[int]) -> "FiniteSolution":
        """The isomorphic copy with point x renamed perm[x]."""
        n = self.size
        table = [[0] * n for _ in range(n)]
        for x in range(n):
            for y in range(n):
                table[perm[x]][perm[y]] = perm[self.sigma[x][y]]
        labels = [""] * n
        for x in range(n):
            labels[perm[x]] = self.labels[x]
        return FiniteSolution.from_table(table, labels)


def _gamma(sigma: Table, sigma_inv: Table) -> Table:
    n = len(sigma)
    return tuple(
        tuple(sigma_inv[sigma[x][y]][x] for x in range(n)) for y in range(n)
    )


def _braid_triples(sigma: Table, gamma: Table) -> Optional[Tuple[int, int, int]]:
    """First triple where r12 r23 r12 and r23 r12 r23 differ, if any."""
    n = len(sigma)

    def r(x: int, y: int) -> Tuple[int, int]:
        return sigma[x][y], gamma[y][x]

    for x in range(n):
        for y in range(n):
            for z in range(n):
                a, b = r(x, y)
                b, c = r(b, z)
                a, b = r(a, b)
                left = (a, b, c)
                b, c = r(y, z)
                a, b = r(x, b)
                b, c = r(b, c)
                if left != (a, b, c):
                    return x, y, z
    return None


def _braid_pairwise(sigma: Table, sigma_inv: Table) -> Optional[Tuple[int, int]]:
    """First pair violating sigma_x sigma_{sigma_x^-1(y)} = sigma_y sigma_{sigma_y^-1(x)}."""
    n = len(sigma)
    for x in range(n):
        for y in range(x + 1, n):
            left, right = sigma[x], sigma[y]
            inner_l = sigma[sigma_inv[x][y]]
            inner_r = sigma[sigma_inv[y][x]]
            for z in range(n):
                if left[inner_l[z]] != right[inner_r[z]]:
                    return x, y
    return None


def validate(sigma_table: Iterable[Iterable[int]]) -> ValidationReport:
    """Evaluate every solution axiom by exhaustion.

    Mathematical failures are reported, not raised; only a malformed table
    (ragged rows, out-of-range entries) is a StructuralError. Braid is
    decided on triples and, independently, by the pairwise criterion.
    """
    sigma = _normalize(sigma_table)
    n = len(sigma)
    witnesses: Dict[str, object] = {}

    bad_row = next((x for x, row in enumerate(sigma) if not _is_bijection(row, n)), None)
    trivial = all(row == tuple(range(n)) for row in sigma)
    square_free = all(sigma[x][x] == x for x in range(n))
    if not square_free:
        witnesses["square_free"] = next(x for x in range(n) if sigma[x][x] != x)
    if not trivial:
        witnesses["trivial"] = next(x for x, row in enumerate(sigma) if row != tuple(range(n)))

    if bad_row is not None:
        reason = {"row": bad_row, "reason": "sigma row is not a bijection"}
        for flag in ("non_degenerate", "involutive", "braid", "braid_pairwise", "lri"):
            witnesses[flag] = reason
        report = ValidationReport(
            size=n,
            involutive=False,
            non_degenerate=False,
            braid=False,
            braid_pairwise=False,
            square_free=square_free,
            lri=False,
            trivial=trivial,
            witnesses=witnesses,
        )
        log_check_result(logger, "validate", False, size=n, row=bad_row)
        return report

    sigma_inv = tuple(_inverse(row) for row in sigma)
    gamma = _gamma(sigma, sigma_inv)

    bad_gamma = next(
        (y for y in range(n) if not _is_bijection(gamma[y], n)), None
    )
    non_degenerate = bad_gamma is None
    if not non_degenerate:
        witnesses["non_degenerate"] = {"gamma": bad_gamma}

    involutive = True
    for x in range(n):
        for y in range(n):
            u, v = sigma[x][y], gamma[y][x]
            if (sigma[u][v], gamma[v][u]) != (x, y):
                involutive = False
                witnesses["involutive"] = [x, y]
                break
        if not involutive:
            break

    triple = _braid_triples(sigma, gamma)
    pair = _braid_pairwise(sigma, sigma_inv)
    braid, braid_pairwise = triple is None, pair is None
    if triple is not None:
        witnesses["braid"] = list(triple)
    if pair is not None:
        witnesses["braid_pairwise"] = list(pair)
    if involutive and non_degenerate and braid != braid_pairwise:
        raise ConsistencyError(
            "braid triple check and pairwise criterion disagree",
            triple=triple,
            pair=pair,
        )

    lri_bad = next((z for z in range(n) if gamma[z] != sigma_inv[z]), None)
    if lri_bad is not None:
        witnesses["lri"] = lri_bad

    report = ValidationReport(
        size=n,
        involutive=involutive,
        non_degenerate=non_degenerate,
        braid=braid,
        braid_pairwise=braid_pairwise,
        square_free=square_free,
        lri=lri_bad is None,
        trivial=trivial,
        witnesses=witnesses,
    )
    log_check_result(logger, "validate", report.accepted, size=n)
    return report


def is_square_free(s: FiniteSolution) -> bool:
    return all(s.r(x, x) == (x, x) for x in range(s.size))


def check_lri(s: FiniteSolution) -> bool:
    return all(s.gamma[z] == s.sigma_inv[z] for z in range(s.size))


# ---------------------------------------------------------------------------
# Isomorphism search
# ---------------------------------------------------------------------------


def _cycle_type(row: Sequence[int]) -> Tuple[int, ...]:
    seen = [False] * len(row)
    lengths = []
    for start in range(len(row)):
        if seen[start]:
            continue
        length, x = 0, start
        while not seen[x]:
            seen[x] = True
            x = row[x]
            length += 1
        lengths.append(length)
    return tuple(sorted(lengths))


def _fingerprints(s: FiniteSolution) -> List[Tuple]:
    return [(_cycle_type(s.sigma[x]), s.sigma[x][x] == x) for x in range(s.size)]


def find_isomorphism(
    s1: FiniteSolution, s2: FiniteSolution
) -> Optional[Tuple[int, ...]]:
    """Backtracking search for eta with eta(sigma_x(y)) = sigma'_{eta(x)}(eta(y)).

    Candidates are pruned by the cycle type of sigma_x; every assignment
    forces the images of sigma-products among assigned points.
    """
    n = s1.size
    if n != s2.size:
        return None
    fp1, fp2 = _fingerprints(s1), _fingerprints(s2)
    if Counter(fp1) != Counter(fp2):
        return None

    eta = [-1] * n
    eta_inv = [-1] * n
    assigned: List[int] = []

    def assign(x: int, y: int, trail: List[int]) -> bool:
        """Assign x -> y and propagate; records new assignments on trail."""
        queue = [(x, y)]
        while queue:
            p, q = queue.pop()
            if eta[p] != -1:
                if eta[p] != q:
                    return False
                continue
            if eta_inv[q] != -1 or fp1[p] != fp2[q]:
                return False
            eta[p], eta_inv[q] = q, p
            assigned.append(p)
            trail.append(p)
            for u in list(assigned):
                for a, b in ((p, u), (u, p)):
                    img = s1.sigma[a][b]
                    target = s2.sigma[eta[a]][eta[b]]
                    if eta[img] == -1:
                        queue.append((img, target))
                    elif eta[img] != target:
                        return False
        return True

    def undo(trail: List[int]) -> None:
        for p in reversed(trail):
            eta_inv[eta[p]] = -1
            eta[p] = -1
            assigned.remove(p)

    def search() -> bool:
        x = next((p for p in range(n) if eta[p] == -1), None)
        if x is None:
            return True
        for y in range(n):
            if eta_inv[y] != -1 or fp2[y] != fp1[x]:
                continue
            trail: List[int] = []
            if assign(x, y, trail) and search():
                return True
            undo(trail)
        return False

    if not search():
        return None
    result = tuple(eta)
    if not is_isomorphism(s1, s2, result):
        raise ConsistencyError("isomorphism search returned a non-isomorphism", eta=result)
    return result


def is_isomorphism(s1: FiniteSolution, s2: FiniteSolution, eta: Sequence[int]) -> bool:
    n = s1.size
    if s2.size != n or sorted(eta) != list(range(n)):
        return False
    for x in range(n):
        for y in range(n):
            u, v = s1.r(x, y)
            if s2.r(eta[x], eta[y]) != (eta[u], eta[v]):
                return False
    return True


# ---------------------------------------------------------------------------
# Restriction and strong twisted unions
# ---------------------------------------------------------------------------


def restrict(s: FiniteSolution, subset: Iterable[int]) -> FiniteSolution:
    points = sorted(set(subset))
    if not points or any(not 0 <= p < s.size for p in points):
        raise StructuralError("subset must be a nonempty set of points")
    position = {p: i for i, p in enumerate(points)}
    for x in points:
        for y in points:
            if s.sigma[x][y] not in position or s.gamma[x][y] not in position:
                raise InvariantSubsetError(
                    f"subset is not invariant: ({s.labels[x]}, {s.labels[y]}) escapes",
                    pair=(x, y),
                )
    table = [[position[s.sigma[x][y]] for y in points] for x in points]
    return FiniteSolution.from_table(table, [s.labels[p] for p in points])


def check_strong_twisted_union(
    s: FiniteSolution, partition: Sequence[Sequence[int]]
) -> bool:
    blocks = [sorted(set(block)) for block in partition]
    if len(blocks) < 2:
        raise StructuralError("a strong twisted union needs at least two blocks")
    covered = [p for block in blocks for p in block]
    if sorted(covered) != list(range(s.size)) or any(not b for b in blocks):
        raise StructuralError("partition blocks must be nonempty, disjoint and cover X")

    block_of = {p: j for j, block in enumerate(blocks) for p in block}
    for j, block in enumerate(blocks):
        for x in range(s.size):
            for y in block:
                if block_of[s.sigma[x][y]] != j:
                    raise InvariantSubsetError(
                        f"block {j} is not invariant under sigma_{s.labels[x]}",
                        pair=(x, y),
                    )

    for x in range(s.size):
        for z in range(s.size):
            if block_of[x] == block_of[z]:
                continue
            # sigma_{gamma_x(z)} = sigma_z on the block of x
            moved = s.sigma[s.gamma[x][z]]
            for y in blocks[block_of[x]]:
                if moved[y] != s.sigma[z][y]:
                    return False
            # gamma_{sigma_z(x)} = gamma_x on the block of z
            g_new, g_old = s.gamma[s.sigma[z][x]], s.gamma[x]
            for t in blocks[block_of[z]]:
                if g_new[t] != g_old[t]:
                    return False
    return True


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------


def dump_solution(s: FiniteSolution) -> str:
    lines = [f"n={s.size}"]
    lines += [" ".join(map(str, row)) for row in s.sigma]
    lines += [
        f"# label {i} {label}"
        for i, label in enumerate(s.labels)
        if label != str(i)
    ]
    return "\n".join(lines) + "\n"


def parse_solution_table(
    text: str, path: str = "<text>"
) -> Tuple[Table, Optional[List[str]]]:
    """Parse the solution text format into a raw table and optional labels."""
    lines = text.splitlines()
    if not lines or not lines[0].strip().startswith("n="):
        raise ParseError("first line must be n=<int>", line=1, path=path)
    try:
        n = int(lines[0].strip()[2:])
    except ValueError as exc:
        raise ParseError(f"bad size: {exc}", line=1, path=path) from exc
    if n < 1:
        raise ParseError("n must be >= 1", line=1, path=path)

    rows: List[Tuple[int, ...]] = []
    labels: Dict[int, str] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("# label"):
            parts = line.split(maxsplit=3)
            if len(parts) != 4 or not parts[2].isdigit() or int(parts[2]) >= n:
                raise ParseError(f"bad label line {line!r}", line=lineno, path=path)
            labels[int(parts[2])] = parts[3]
            continue
        if line.startswith("#"):
            continue
        if len(rows) == n:
            raise ParseError(f"more than {n} rows", line=lineno, path=path)
        try:
            row = tuple(int(v) for v in line.split())
        except ValueError as exc:
            raise ParseError(f"bad row: {exc}", line=lineno, path=path) from exc
        if len(row) != n or any(not 0 <= v < n for v in row):
            raise ParseError(
                f"row must hold {n} indices in [0, {n})", line=lineno, path=path
            )
        rows.append(row)
    if len(rows) != n:
        raise ParseError(f"expected {n} rows, found {len(rows)}", path=path)
    label_list = [labels.get(i, str(i)) for i in range(n)] if labels else None
    return tuple(rows), label_list


def load_solution(source: Union[str, Path]) -> FiniteSolution:
    path = Path(source)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path=str(path)) from exc
    table, labels = parse_solution_table(text, str(path))
    return FiniteSolution.from_table(table, labels)
