"""Exact arithmetic in the structure group G(X, r).

An element is its additive form v in Z^X (the additive group of G(X, r) is
free abelian on X). The permutation phi(g) = lambda_g restricted to X is
cached next to v. Products use

    (v, p) . (w, q) = (v + p.w, p o q),   (p.w)[p(y)] = w[y]

and phi of a bare vector is rebuilt intrinsically, one basis vector at a time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from ybe.models.reports import (
    CenterProbeReport,
    KernelLatticeReport,
    QuotientRankReport,
)
from ybe.services.family import FamilyParams, build
from ybe.services.lattice import Lattice
from ybe.services.permgroup import generator_orbits
from ybe.services.solution import FiniteSolution
from ybe.utils.errors import (
    ConsistencyError,
    NotApplicableError,
    ParseError,
    StructuralError,
)
from ybe.utils.logging import log_check_result, setup_logger

logger = setup_logger(__name__)

Letter = Tuple[int, int]
Perm = Tuple[int, ...]


@dataclass(frozen=True)
class SGElement:
    v: Tuple[int, ...]
    perm: Perm = field(compare=False)

    @property
    def degree(self) -> int:
        return sum(self.v)

    def is_identity(self) -> bool:
        return not any(self.v)


@dataclass(frozen=True)
class OrbitDecomposition:
    mode: Literal["product", "sum"]
    factors: Tuple[Tuple[int, SGElement], ...]  # (orbit index, factor)


def _compose(p: Perm, q: Perm) -> Perm:
    return tuple(p[y] for y in q)


def _invert(p: Perm) -> Perm:
    inv = [0] * len(p)
    for x, y in enumerate(p):
        inv[y] = x
    return tuple(inv)


def permute(p: Perm, w: Sequence[int]) -> Tuple[int, ...]:
    """The coordinate action of p on Z^X: (p.w)[p(y)] = w[y]."""
    out = [0] * len(w)
    for y, c in enumerate(w):
        out[p[y]] = c
    return tuple(out)


class StructureGroup:
    def __init__(self, s: FiniteSolution):
        self.solution = s
        self.n = s.size
        self.sigma: List[Perm] = [tuple(row) for row in s.sigma]
        self.sigma_inv: List[Perm] = [tuple(row) for row in s.sigma_inv]
        self.identity_perm: Perm = tuple(range(self.n))
        # -e_z is the additive form of w^-1 where sigma_w^-1(w) = z
        neg: Dict[int, int] = {}
        for w in range(self.n):
            neg[self.sigma_inv[w][w]] = w
        if len(neg) != self.n:
            raise ConsistencyError("x -> sigma_x^-1(x) is not a bijection")
        self._neg_letter = [neg[z] for z in range(self.n)]

    # elements ----------------------------------------------------------------

    def identity(self) -> SGElement:
        return SGElement((0,) * self.n, self.identity_perm)

    def generator(self, x: int, sign: int = 1) -> SGElement:
        v = [0] * self.n
        if sign > 0:
            v[x] = 1
            return SGElement(tuple(v), self.sigma[x])
        v[self.sigma_inv[x][x]] = -1
        return SGElement(tuple(v), self.sigma_inv[x])

    def from_word(self, word: Sequence[Letter]) -> SGElement:
        """Additive expansion g = x1^e1 + lambda_{x1^e1}(x2^e2) + ..."""
        v = [0] * self.n
        perm = self.identity_perm
        for x, e in word:
            if e > 0:
                v[perm[x]] += 1
                perm = _compose(perm, self.sigma[x])
            else:
                v[perm[self.sigma_inv[x][x]]] -= 1
                perm = _compose(perm, self.sigma_inv[x])
        return SGElement(tuple(v), perm)

    def parse_word(self, text: str) -> List[Letter]:
        """Parse ``x3 x5^-1 x0`` (0-based point indices)."""
        word: List[Letter] = []
        for token in text.split():
            body, _, exp = token.partition("^")
            if not body.startswith("x") or not body[1:].isdigit():
                raise ParseError(f"bad letter {token!r}, expected x<index>[^-1]")
            x = int(body[1:])
            if x >= self.n:
                raise ParseError(f"letter {token!r} is outside X (size {self.n})")
            if exp not in ("", "1", "-1"):
                raise ParseError(f"bad exponent in {token!r}")
            word.append((x, -1 if exp == "-1" else 1))
        return word

    def phi(self, v: Sequence[int]) -> Perm:
        """phi of the element with additive form v.

        The element is rebuilt as a product, consuming one signed basis
        vector at a time: with prefix s, +e_x appends y = phi(s)^-1(x) and
        -e_x appends w^-1 where sigma_w^-1(w) = phi(s)^-1(x).
        """
        perm = self.identity_perm
        for x, c in enumerate(v):
            for _ in range(abs(c)):
                y = _invert(perm)[x]
                if c > 0:
                    perm = _compose(perm, self.sigma[y])
                else:
                    perm = _compose(perm, self.sigma_inv[self._neg_letter[y]])
        return perm

    def element(self, v: Sequence[int]) -> SGElement:
        return SGElement(tuple(int(c) for c in v), self.phi(v))

    # operations --------------------------------------------------------------

    def mul(self, a: SGElement, b: SGElement) -> SGElement:
        return sg_mul(a, b)

    def inv(self, a: SGElement) -> SGElement:
        return sg_inv(a)

    def add(self, a: SGElement, b: SGElement) -> SGElement:
        v = tuple(x + y for x, y in zip(a.v, b.v))
        return SGElement(v, self.phi(v))

    def neg(self, a: SGElement) -> SGElement:
        return self.element([-c for c in a.v])

    def sub(self, a: SGElement, b: SGElement) -> SGElement:
        return self.add(a, self.neg(b))

    def lambda_(self, a: SGElement, b: SGElement) -> SGElement:
        """lambda_a(b) = a.b - a."""
        return self.element(permute(a.perm, b.v))

    def lambda_inv(self, a: SGElement, b: SGElement) -> SGElement:
        return self.element(permute(_invert(a.perm), b.v))

    def add_via_product(self, a: SGElement, b: SGElement) -> SGElement:
        """a + b computed as a . lambda_a^-1(b)."""
        return self.mul(a, self.lambda_inv(a, b))

    def lambda_via_difference(self, a: SGElement, b: SGElement) -> SGElement:
        """lambda_a(b) computed as (a.b) . lambda_{ab}^-1(-a)."""
        ab = self.mul(a, b)
        return self.mul(ab, self.lambda_inv(ab, self.neg(a)))

    def add_checked(self, a: SGElement, b: SGElement) -> SGElement:
        direct, other = self.add(a, b), self.add_via_product(a, b)
        if direct != other or direct.perm != other.perm:
            raise ConsistencyError("a + b disagrees with a . lambda_a^-1(b)", a=a.v, b=b.v)
        return direct

    def lambda_checked(self, a: SGElement, b: SGElement) -> SGElement:
        direct, other = self.lambda_(a, b), self.lambda_via_difference(a, b)
        if direct != other or direct.perm != other.perm:
            raise ConsistencyError("lambda_a(b) disagrees with a.b - a", a=a.v, b=b.v)
        return direct

    # orbits and H ------------------------------------------------------------

    def orbits(self) -> List[List[int]]:
        return generator_orbits(self.sigma)

    @staticmethod
    def orbit_degrees(g: SGElement, orbits: Sequence[Sequence[int]]) -> Tuple[int, ...]:
        return tuple(sum(g.v[x] for x in orbit) for orbit in orbits)

    def in_ideal_H(self, g: SGElement, orbits: Sequence[Sequence[int]]) -> bool:
        return not any(self.orbit_degrees(g, orbits))

    def _restrict(self, g: SGElement, orbit: Sequence[int]) -> Tuple[int, ...]:
        v = [0] * self.n
        for x in orbit:
            v[x] = g.v[x]
        return tuple(v)

    def orbit_decompose(
        self,
        g: SGElement,
        orbits: Sequence[Sequence[int]],
        mode: Literal["product", "sum"] = "product",
    ) -> OrbitDecomposition:
        """Split g by orbit support, in orbit order.

        Sum mode splits v directly. Product mode recovers g_j from the sum
        parts h_j via g_j = lambda^-1_{g_1...g_{j-1}}(h_j).
        """
        parts = [
            (i, self.element(self._restrict(g, orbit)))
            for i, orbit in enumerate(orbits)
            if any(g.v[x] for x in orbit)
        ]
        if mode == "sum":
            total = self.identity()
            for _, h in parts:
                total = self.add(total, h)
            if total != g or total.perm != g.perm:
                raise ConsistencyError("sum decomposition does not reassemble", v=g.v)
            return OrbitDecomposition("sum", tuple(parts))

        factors = []
        prefix = self.identity()
        for i, h in parts:
            gj = self.lambda_inv(prefix, h)
            support = set(orbits[i])
            if any(gj.v[x] for x in range(self.n) if x not in support):
                raise ConsistencyError("product factor leaves its orbit", orbit=i)
            factors.append((i, gj))
            prefix = self.mul(prefix, gj)
        if prefix != g or prefix.perm != g.perm:
            raise ConsistencyError("product decomposition does not reassemble", v=g.v)
        return OrbitDecomposition("product", tuple(factors))

    def reassemble(self, d: OrbitDecomposition) -> SGElement:
        total = self.identity()
        for _, f in d.factors:
            total = self.mul(total, f) if d.mode == "product" else self.add(total, f)
        return total

    # random words ------------------------------------------------------------

    def random_word(self, rng: np.random.Generator, length: int) -> List[Letter]:
        xs = rng.integers(0, self.n, size=length)
        signs = rng.choice(np.array([-1, 1]), size=length)
        return [(int(x), int(e)) for x, e in zip(xs, signs)]

    def random_h_word(
        self, rng: np.random.Generator, length: int, orbits: Sequence[Sequence[int]]
    ) -> List[Letter]:
        """A word with zero exponent sum on every orbit."""
        word: List[Letter] = []
        for _ in range(max(1, length // 2)):
            orbit = orbits[int(rng.integers(0, len(orbits)))]
            x, y = (int(orbit[i]) for i in rng.integers(0, len(orbit), size=2))
            word += [(x, 1), (y, -1)]
        order = rng.permutation(len(word))
        return [word[i] for i in order]


def sg_from_word(s: FiniteSolution, word: Sequence[Letter]) -> SGElement:
    return StructureGroup(s).from_word(word)


def sg_mul(a: SGElement, b: SGElement) -> SGElement:
    w = permute(a.perm, b.v)
    return SGElement(tuple(x + y for x, y in zip(a.v, w)), _compose(a.perm, b.perm))


def sg_inv(a: SGElement) -> SGElement:
    p_inv = _invert(a.perm)
    return SGElement(tuple(-c for c in permute(p_inv, a.v)), p_inv)


# ---------------------------------------------------------------------------
# Bounded evidence about H
# ---------------------------------------------------------------------------


def center_hypothesis(params: FamilyParams) -> Optional[str]:
    if not params.phi1.zero_to_zero:
        return "phi1(0) = 0"
    if not params.phi1.generates_target:
        return "phi1(A) generates B"
    if not params.phi2.is_isomorphism:
        return "phi2 is an isomorphism"
    return None


def probe_center_H(params: FamilyParams, radius: int) -> CenterProbeReport:
    """Look for nontrivial elements of H, up to word length ``radius``, central in H.

    Bounded evidence only: finding none does not prove Z(H) = 1.
    """
    failing = center_hypothesis(params)
    if failing is not None:
        raise NotApplicableError(failing)
    if radius < 1:
        raise ValueError("radius must be at least 1")

    sg = StructureGroup(build(params))
    orbits = sg.orbits()
    letters = [sg.generator(x, e) for x in range(sg.n) for e in (1, -1)]

    seen: Dict[Tuple[int, ...], SGElement] = {sg.identity().v: sg.identity()}
    frontier = [sg.identity()]
    for _ in range(radius):
        nxt = []
        for g in frontier:
            for letter in letters:
                h = sg.mul(g, letter)
                if h.v not in seen:
                    seen[h.v] = h
                    nxt.append(h)
        frontier = nxt
    candidates = [h for h in seen.values() if not h.is_identity() and sg.in_ideal_H(h, orbits)]

    base: Dict[Tuple[int, ...], SGElement] = {}
    for orbit in orbits:
        for x in orbit:
            for y in orbit:
                if x != y:
                    p = sg.mul(sg.generator(x), sg.inv(sg.generator(y)))
                    base[p.v] = p
    probes = dict(base)
    for z in range(sg.n):
        for p in base.values():
            q = sg.lambda_(sg.generator(z), p)
            probes[q.v] = q

    centralizing = [
        list(h.v)
        for h in candidates
        if all(sg.mul(h, p) == sg.mul(p, h) for p in probes.values())
    ]
    report = CenterProbeReport(
        radius=radius,
        elements_explored=len(seen),
        candidates=len(candidates),
        probe_set="x.y^-1 (x != y in one orbit) and their lambda_z translates",
        probe_size=len(probes),
        centralizing=sorted(centralizing),
    )
    log_check_result(
        logger, "center probe", report.passed, radius=radius, candidates=len(candidates)
    )
    return report


def quotient_rank_check(
    s: FiniteSolution,
    orbits: Optional[Sequence[Sequence[int]]] = None,
    samples: int = 100,
    seed: int = 0,
    word_length: int = 8,
) -> QuotientRankReport:
    """g -> orbit-degree vector is onto Z^m with kernel H, on random words.

    H members are built from their definition, g_1 ... g_m with g_l a
    degree-zero word on orbit l, and must land in the kernel. Random words
    in the kernel must split into degree-zero factors supported on their
    orbits that multiply back to the word.
    """
    sg = StructureGroup(s)
    orbits = list(orbits) if orbits is not None else sg.orbits()
    m = len(orbits)
    rng = np.random.default_rng(seed)

    orbit_of = {x: i for i, orbit in enumerate(orbits) for x in orbit}
    units = all(
        sg.orbit_degrees(sg.generator(x), orbits)
        == tuple(int(i == orbit_of[x]) for i in range(m))
        for x in range(sg.n)
    )

    homomorphic = inverse_negates = kernel_ok = True
    for _ in range(samples):
        a = sg.from_word(sg.random_word(rng, word_length))
        b = sg.from_word(sg.random_word(rng, word_length))
        da, db = sg.orbit_degrees(a, orbits), sg.orbit_degrees(b, orbits)
        if sg.orbit_degrees(sg.mul(a, b), orbits) != tuple(x + y for x, y in zip(da, db)):
            homomorphic = False
        if sg.orbit_degrees(sg.inv(a), orbits) != tuple(-x for x in da):
            inverse_negates = False

        h = sg.identity()
        for orbit in orbits:
            h = sg.mul(h, sg.from_word(sg.random_h_word(rng, word_length, [orbit])))
        if not sg.in_ideal_H(h, orbits):
            kernel_ok = False

        if not sg.in_ideal_H(a, orbits):
            continue
        try:
            factors = sg.orbit_decompose(a, orbits, "product").factors
        except ConsistencyError:
            kernel_ok = False
            continue
        for i, factor in factors:
            outside = any(factor.v[x] for x in range(sg.n) if orbit_of[x] != i)
            if outside or factor.degree != 0:
                kernel_ok = False

    report = QuotientRankReport(
        orbit_count=m,
        generators_are_units=units,
        homomorphic=homomorphic,
        inverse_negates=inverse_negates,
        kernel_is_H=kernel_ok,
        samples=samples,
        seed=seed,
    )
    log_check_result(logger, "quotient rank", report.passed, orbits=m)
    return report


def kernel_lattice_check(
    s: FiniteSolution,
    lattice: Lattice,
    samples: int = 100,
    seed: int = 0,
    word_length: int = 8,
) -> KernelLatticeReport:
    """v lies in K exactly when the element acts trivially on X.

    Each random word g is tested, and so is g^k with k the order of phi(g),
    which always acts trivially.
    """
    sg = StructureGroup(s)
    if lattice.N != sg.n:
        raise StructuralError(
            f"lattice lives in Z^{lattice.N}, the solution has {sg.n} points"
        )
    rng = np.random.default_rng(seed)
    kernel_in = outside_out = True
    kernel_elements = 0
    for _ in range(samples):
        g = sg.from_word(sg.random_word(rng, word_length))
        power = g
        while power.perm != sg.identity_perm:
            if list(power.v) in lattice:
                outside_out = False
            power = sg.mul(power, g)
        kernel_elements += 1
        if list(power.v) not in lattice:
            kernel_in = False

    report = KernelLatticeReport(
        samples=samples,
        seed=seed,
        kernel_elements=kernel_elements,
        kernel_in_lattice=kernel_in,
        others_outside_lattice=outside_out,
    )
    log_check_result(logger, "kernel lattice", report.passed, samples=samples)
    return report
