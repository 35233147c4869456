"""Retraction of a solution, retraction towers and multipermutation level."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ybe.models.reports import Classification, TowerReport
from ybe.services.solution import FiniteSolution
from ybe.utils.errors import ConsistencyError
from ybe.utils.logging import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class RetractStep:
    quotient: FiniteSolution
    projection: Tuple[int, ...]  # parent point -> quotient point


@dataclass
class TowerResult:
    steps: List[RetractStep]
    classification: Classification
    input_size: int = 0
    separating: Optional[Dict[str, int]] = field(default=None)
    # (x, y) -> least z with sigma_x(z) != sigma_y(z), every pair x < y
    separating_pairs: Dict[Tuple[int, int], int] = field(default_factory=dict)

    @property
    def sizes(self) -> List[int]:
        return [self.input_size] + [step.quotient.size for step in self.steps]

    def to_report(self) -> TowerReport:
        return TowerReport(
            sizes=self.sizes,
            classification=self.classification,
            separating=self.separating,
            separated_pairs=len(self.separating_pairs),
        )


def retract(s: FiniteSolution) -> RetractStep:
    """Collapse points with equal sigma rows; representatives are least indices."""
    classes: Dict[Tuple[int, ...], int] = {}
    projection = []
    reps: List[int] = []
    for x, row in enumerate(s.sigma):
        if row not in classes:
            classes[row] = len(reps)
            reps.append(x)
        projection.append(classes[row])

    m = len(reps)
    table = [[projection[s.sigma[reps[c]][reps[d]]] for d in range(m)] for c in range(m)]
    for x in range(s.size):
        for y in range(s.size):
            px, py = projection[x], projection[y]
            if projection[s.sigma[x][y]] != table[px][py]:
                raise ConsistencyError(
                    "induced sigma depends on the representative", pair=(x, y)
                )

    quotient = FiniteSolution.from_table(table, [s.labels[r] for r in reps])
    for x in range(s.size):
        for y in range(s.size):
            if projection[s.gamma[y][x]] != quotient.gamma[projection[y]][projection[x]]:
                raise ConsistencyError(
                    "induced gamma depends on the representative", pair=(x, y)
                )
    return RetractStep(quotient, tuple(projection))


def separating_point(s: FiniteSolution, x: int, y: int) -> Optional[int]:
    """Least z with sigma_x(z) != sigma_y(z), or None when sigma_x == sigma_y."""
    return next(
        (z for z in range(s.size) if s.sigma[x][z] != s.sigma[y][z]), None
    )


def separate_all(s: FiniteSolution) -> Dict[Tuple[int, int], int]:
    """A separating point for every pair x < y; raises if two rows coincide."""
    found: Dict[Tuple[int, int], int] = {}
    for x in range(s.size):
        for y in range(x + 1, s.size):
            z = separating_point(s, x, y)
            if z is None:
                raise ConsistencyError(
                    "equal sigma rows in an irretractable solution", pair=(x, y)
                )
            found[x, y] = z
    return found


def tower(s: FiniteSolution, max_steps: Optional[int] = None) -> TowerResult:
    """Iterate ``retract`` until a 1-point solution or a fixed point."""
    max_steps = s.size if max_steps is None else max_steps
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")

    if s.size == 1:
        return TowerResult([], Classification(kind="multipermutation", level=0), 1)

    steps: List[RetractStep] = []
    current = s
    classification = Classification(kind="undetermined", at_step=max_steps)
    for k in range(max_steps):
        step = retract(current)
        steps.append(step)
        if step.quotient.size == current.size:
            classification = (
                Classification(kind="irretractable")
                if k == 0
                else Classification(kind="stabilized", at_step=k)
            )
            break
        if step.quotient.size == 1:
            classification = Classification(kind="multipermutation", level=k + 1)
            break
        current = step.quotient

    result = TowerResult(steps, classification, s.size)
    if classification.kind == "irretractable":
        result.separating_pairs = separate_all(s)
        result.separating = {"x": 0, "y": 1, "z": result.separating_pairs[0, 1]}
    logger.info("Tower of %d points: %s", s.size, classification)
    return result
