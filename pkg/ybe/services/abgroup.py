"""Finite abelian groups Z/m_1 x ... x Z/m_t, homomorphisms and even maps.

Elements are plain tuples of residues. Everything here is exact integer
arithmetic and immutable once built.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

from ybe.utils.errors import (
    EvennessError,
    NotAHomomorphismError,
    ParseError,
    StructuralError,
)
from ybe.utils.logging import setup_logger

logger = setup_logger(__name__)

AbElement = Tuple[int, ...]

_CYCLIC_TOKEN = re.compile(r"^Z/(\d+)$")


@dataclass(frozen=True)
class FiniteAbelianGroup:
    moduli: Tuple[int, ...]

    def __post_init__(self) -> None:
        moduli = tuple(int(m) for m in self.moduli)
        if not moduli:
            raise StructuralError("a group needs at least one cyclic factor")
        for m in moduli:
            if m < 1:
                raise StructuralError(f"modulus must be >= 1, got {m}")
        object.__setattr__(self, "moduli", moduli)

    @classmethod
    def cyclic(cls, m: int) -> "FiniteAbelianGroup":
        return cls((m,))

    @classmethod
    def parse(cls, text: str) -> "FiniteAbelianGroup":
        """Parse ``Z/2 x Z/4`` style text."""
        tokens = [t.strip() for t in re.split(r"\s+x\s+|\s*×\s*", text.strip())]
        moduli = []
        for token in tokens:
            match = _CYCLIC_TOKEN.match(token)
            if not match:
                raise ParseError(f"bad group factor {token!r}, expected Z/<m>")
            moduli.append(int(match.group(1)))
        return cls(tuple(moduli))

    def __str__(self) -> str:
        return " x ".join(f"Z/{m}" for m in self.moduli)

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @property
    def order(self) -> int:
        return math.prod(self.moduli)

    @property
    def is_nontrivial(self) -> bool:
        return self.order > 1

    @property
    def zero(self) -> AbElement:
        return (0,) * self.rank

    @cached_property
    def elements(self) -> List[AbElement]:
        """All elements, lexicographic in the coordinates."""
        return [tuple(e) for e in product(*(range(m) for m in self.moduli))]

    def index(self, x: AbElement) -> int:
        """Position of ``x`` in :attr:`elements` (mixed radix)."""
        self._check(x)
        idx = 0
        for c, m in zip(x, self.moduli):
            idx = idx * m + c
        return idx

    def element(self, coords: Sequence[int]) -> AbElement:
        """Reduce arbitrary integer coordinates into the group."""
        if len(coords) != self.rank:
            raise StructuralError(
                f"element {tuple(coords)} has {len(coords)} coordinates, group {self} has rank {self.rank}"
            )
        return tuple(int(c) % m for c, m in zip(coords, self.moduli))

    def contains(self, x: Sequence[int]) -> bool:
        return len(x) == self.rank and all(0 <= c < m for c, m in zip(x, self.moduli))

    def _check(self, x: Sequence[int]) -> None:
        if len(x) != self.rank:
            raise StructuralError(
                f"element {tuple(x)} has {len(x)} coordinates, group {self} has rank {self.rank}"
            )

    def add(self, x: AbElement, y: AbElement) -> AbElement:
        self._check(x)
        self._check(y)
        return tuple((a + b) % m for a, b, m in zip(x, y, self.moduli))

    def neg(self, x: AbElement) -> AbElement:
        self._check(x)
        return tuple((-a) % m for a, m in zip(x, self.moduli))

    @cached_property
    def add_table(self) -> List[List[int]]:
        """add_table[i][j] = index(elements[i] + elements[j])."""
        els = self.elements
        return [[self.index(self.add(x, y)) for y in els] for x in els]

    @cached_property
    def neg_table(self) -> List[int]:
        return [self.index(self.neg(x)) for x in self.elements]

    def generated_subgroup(self, gens: Sequence[AbElement]) -> frozenset:
        """The subgroup generated by ``gens``, by closure under addition."""
        members = {self.zero}
        frontier = [self.zero]
        gens = [self.element(g) for g in gens]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.add(x, g)
                    if y not in members:
                        members.add(y)
                        nxt.append(y)
            frontier = nxt
        return frozenset(members)

    def format(self, x: AbElement) -> str:
        return str(x[0]) if self.rank == 1 else "(" + ",".join(map(str, x)) + ")"


def ab_add(g: FiniteAbelianGroup, x: AbElement, y: AbElement) -> AbElement:
    return g.add(x, y)


def ab_neg(g: FiniteAbelianGroup, x: AbElement) -> AbElement:
    return g.neg(x)


# ---------------------------------------------------------------------------
# Homomorphisms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AbHom:
    """Integer matrix (t_target x t_source) acting on coordinate vectors."""

    source: FiniteAbelianGroup
    target: FiniteAbelianGroup
    matrix: Tuple[Tuple[int, ...], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "matrix", tuple(tuple(int(c) for c in row) for row in self.matrix)
        )

    @classmethod
    def identity(cls, g: FiniteAbelianGroup) -> "AbHom":
        return cls(
            g, g, tuple(tuple(int(i == j) for j in range(g.rank)) for i in range(g.rank))
        )

    @classmethod
    def zero(cls, source: FiniteAbelianGroup, target: FiniteAbelianGroup) -> "AbHom":
        return cls(source, target, tuple((0,) * source.rank for _ in range(target.rank)))

    @classmethod
    def parse(
        cls, source: FiniteAbelianGroup, target: FiniteAbelianGroup, text: str
    ) -> "AbHom":
        """Parse a row-major matrix such as ``[[1,0],[0,1]]``."""
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"bad matrix {text!r}: {exc.msg}") from exc
        if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
            raise ParseError(f"bad matrix {text!r}: expected a list of rows")
        return cls(source, target, tuple(tuple(r) for r in rows))

    def raw_apply(self, x: Sequence[int]) -> AbElement:
        """Matrix times coordinate vector, reduced into the target."""
        return tuple(
            sum(c * xi for c, xi in zip(row, x)) % m
            for row, m in zip(self.matrix, self.target.moduli)
        )

    def __str__(self) -> str:
        return json.dumps([list(r) for r in self.matrix], separators=(",", ":"))


@dataclass(frozen=True)
class ValidatedHom:
    hom: AbHom
    injective: bool
    surjective: bool

    @property
    def source(self) -> FiniteAbelianGroup:
        return self.hom.source

    @property
    def target(self) -> FiniteAbelianGroup:
        return self.hom.target

    @property
    def is_isomorphism(self) -> bool:
        return self.injective and self.surjective

    def __call__(self, x: AbElement) -> AbElement:
        self.source._check(x)
        return self.hom.raw_apply(x)


def hom_validate(h: AbHom) -> ValidatedHom:
    """Check the well-definedness congruences and record (in/sur)jectivity."""
    if len(h.matrix) != h.target.rank or any(
        len(row) != h.source.rank for row in h.matrix
    ):
        raise StructuralError(
            f"matrix shape {len(h.matrix)}x{len(h.matrix[0]) if h.matrix else 0} "
            f"does not match {h.source} -> {h.target}"
        )
    for j, m_j in enumerate(h.source.moduli):
        image = tuple(
            (row[j] * m_j) % m for row, m in zip(h.matrix, h.target.moduli)
        )
        if any(image):
            raise NotAHomomorphismError(j, image)

    images = {h.raw_apply(x) for x in h.source.elements}
    injective = len(images) == h.source.order
    surjective = len(images) == h.target.order
    logger.debug(
        "Validated hom %s -> %s: injective=%s surjective=%s",
        h.source,
        h.target,
        injective,
        surjective,
    )
    return ValidatedHom(h, injective, surjective)


# ---------------------------------------------------------------------------
# Even maps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvenMap:
    source: FiniteAbelianGroup
    target: FiniteAbelianGroup
    table: Mapping[AbElement, AbElement] = field(hash=False)

    @classmethod
    def from_function(
        cls,
        source: FiniteAbelianGroup,
        target: FiniteAbelianGroup,
        fn: Callable[[AbElement], Sequence[int]],
    ) -> "EvenMap":
        return cls(source, target, {a: target.element(fn(a)) for a in source.elements})

    @classmethod
    def parse_lines(
        cls, source: FiniteAbelianGroup, target: FiniteAbelianGroup, lines: Sequence[str]
    ) -> "EvenMap":
        """Parse ``a -> b`` lines, coordinates comma separated."""
        table: Dict[AbElement, AbElement] = {}
        for line in lines:
            if "->" not in line:
                raise ParseError(f"bad map line {line!r}, expected 'a -> b'")
            lhs, rhs = (part.strip() for part in line.split("->", 1))
            try:
                a = tuple(int(c) for c in lhs.split(","))
                b = tuple(int(c) for c in rhs.split(","))
            except ValueError as exc:
                raise ParseError(f"bad map line {line!r}: {exc}") from exc
            table[source.element(a)] = target.element(b)
        return cls(source, target, table)

    def lines(self) -> List[str]:
        return [
            f"{','.join(map(str, a))} -> {','.join(map(str, self.table[a]))}"
            for a in self.source.elements
        ]


@dataclass(frozen=True)
class ValidatedEvenMap:
    even_map: EvenMap
    zero_to_zero: bool  # f(0) = 0
    kernel_trivial: bool  # f^-1(0) = {0}
    generates_target: bool  # <f(A)> = B

    @property
    def source(self) -> FiniteAbelianGroup:
        return self.even_map.source

    @property
    def target(self) -> FiniteAbelianGroup:
        return self.even_map.target

    def __call__(self, a: AbElement) -> AbElement:
        return self.even_map.table[a]

    def is_indicator(self) -> bool:
        """True for the 0 -> 0, a != 0 -> 1 map on Z/k."""
        if self.source.rank != 1 or self.target.rank != 1:
            return False
        one = self.target.element((1,))
        return all(
            self(a) == (self.target.zero if a == self.source.zero else one)
            for a in self.source.elements
        )


def evenmap_validate(f: EvenMap) -> ValidatedEvenMap:
    table: Dict[AbElement, AbElement] = {}
    for a in f.source.elements:
        if a not in f.table:
            raise StructuralError(f"even map has no entry for {a}", element=a)
        b = tuple(f.table[a])
        if not f.target.contains(b):
            raise StructuralError(f"even map sends {a} to {b}, not an element of {f.target}")
        table[a] = b
    for a in f.source.elements:
        if table[f.source.neg(a)] != table[a]:
            raise EvennessError(a)

    zero_a, zero_b = f.source.zero, f.target.zero
    kernel = [a for a, b in table.items() if b == zero_b]
    generated = f.target.generated_subgroup(list(set(table.values())))
    return ValidatedEvenMap(
        even_map=EvenMap(f.source, f.target, table),
        zero_to_zero=table[zero_a] == zero_b,
        kernel_trivial=kernel == [zero_a],
        generates_target=len(generated) == f.target.order,
    )
