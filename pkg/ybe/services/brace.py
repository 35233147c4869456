"""The left brace on the permutation group of a solution.

The additive group is realized as Z^X / K: every element gets an additive
lift by expanding a witness word (x^-1 contributes -e_{sigma_x^-1(x)}
twisted by the current prefix), K is the lattice spanned by differences of
lifts of equal elements, and HNF-reduced vectors are the canonical coset
representatives. Multiplication is composition of permutations.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import List, Sequence, Tuple, Union

import numpy as np

from ybe.models.reports import BraceAxiomReport, IdealReport, SocleReport
from ybe.services.family import FamilyParams, point_index
from ybe.services.lattice import Lattice
from ybe.services.permgroup import (
    PermGroupData,
    Permutation,
    cyclic_hypothesis,
    generator_orders,
    normal_closure,
    orbits,
)
from ybe.services.solution import FiniteSolution
from ybe.utils.errors import ConsistencyError, NotApplicableError, StructuralError
from ybe.utils.logging import log_check_result, log_timing, setup_logger

logger = setup_logger(__name__)

_BATCH = 1 << 16
ASSOCIATED_SOLUTION_LIMIT = 1024


@dataclass
class BraceData:
    group: PermGroupData
    lattice: Lattice  # K, in Hermite normal form
    lifts: np.ndarray  # lifts[i] = additive lift of element i
    reps: np.ndarray  # reps[i] = reduced coset representative of element i
    code_to_element: np.ndarray  # mixed-radix code of a representative -> element index
    radices: Tuple[int, ...]

    @property
    def order(self) -> int:
        return self.group.order

    @property
    def K_basis(self) -> List[List[int]]:
        return self.lattice.matrix()

    def element(self, i: int) -> "BraceElement":
        return BraceElement(
            tuple(int(v) for v in self.reps[i]), self.group.permutation(i), i
        )

    def coset_map(self, rep: Sequence[int]) -> Permutation:
        return self.group.permutation(self.element_of(np.asarray([rep]))[0])

    def element_of(self, vectors: np.ndarray) -> np.ndarray:
        """Element indices of arbitrary lift vectors (reduced mod K first)."""
        reduced = self.lattice.reduce_batch(np.atleast_2d(vectors))
        return self.code_to_element[self._codes(reduced)]

    def _codes(self, reduced: np.ndarray) -> np.ndarray:
        codes = np.zeros(len(reduced), dtype=np.int64)
        for j, d in zip(self.lattice.pivot_location_in_row, self.radices):
            codes = codes * d + reduced[:, j]
        return codes

    # vectorized operations on element indices

    def add_idx(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.element_of(self.reps[u] + self.reps[v])

    def neg_idx(self, u: np.ndarray) -> np.ndarray:
        return self.element_of(-self.reps[u])

    def mul_idx(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.group.mul_rows(u, v)

    def lambda_idx(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        """lambda_u(v) = u.v - u, with u.v taken in the group."""
        uv = self.mul_idx(u, v)
        return self.element_of(self.reps[uv] - self.reps[u])


@dataclass(frozen=True)
class BraceElement:
    rep: Tuple[int, ...]
    perm: Permutation
    index: int


def _letter_vectors(g: PermGroupData) -> np.ndarray:
    """Coordinate hit by each letter: x for sigma_x, sigma_x^-1(x) for its inverse."""
    inv = np.argsort(g.generators, axis=1)
    out = np.empty(2 * g.n, dtype=np.int64)
    out[0::2] = np.arange(g.n)
    out[1::2] = inv[np.arange(g.n), np.arange(g.n)]
    return out


def compute_lifts(g: PermGroupData) -> np.ndarray:
    """Additive lift of every element along its BFS witness word.

    Appending letter sigma_x^e to a prefix with permutation p adds
    e * e_{p(z)}, z = x or sigma_x^-1(x).
    """
    lifts = np.zeros((g.order, g.n), dtype=np.int64)
    coord = _letter_vectors(g)
    for i in range(1, g.order):
        parent, code = int(g.parent[i]), int(g.letter[i])
        lifts[i] = lifts[parent]
        sign = -1 if code % 2 else 1
        lifts[i, int(g.elements[parent][coord[code]])] += sign
    return lifts


def build_brace(g: PermGroupData) -> BraceData:
    started = time.perf_counter()
    n = g.n
    lifts = compute_lifts(g)
    lattice = Lattice(n)

    # sigma_x^o = id gives sum_{t < o} e_{sigma_x^t(x)} in K
    for x, o in enumerate(generator_orders(g)):
        rel = [0] * n
        y = x
        for _ in range(o):
            rel[y] += 1
            y = int(g.generators[x][y])
        lattice.add_vector(rel)

    def settled() -> bool:
        return lattice.is_full_rank and lattice.determinant() == g.order

    coord = _letter_vectors(g)
    letters = g.letters.astype(np.intp)
    if not settled():
        for lo in range(0, g.order, _BATCH):
            rows = g.elements[lo : lo + _BATCH]
            for code, letter in enumerate(letters):
                children = g.lookup_rows(rows[:, letter])
                step = lifts[lo : lo + _BATCH].copy()
                hit = rows[:, coord[code]].astype(np.intp)
                step[np.arange(len(rows)), hit] += -1 if code % 2 else 1
                diffs = step - lifts[children]
                for diff in diffs[np.any(diffs != 0, axis=1)]:
                    if lattice.add_vector(diff) and settled():
                        break
                if settled():
                    break
            if settled():
                break

    if not lattice.is_full_rank:
        raise ConsistencyError(f"lattice K has rank {lattice.rank} < {n}")
    if lattice.determinant() != g.order:
        raise ConsistencyError(
            f"|Z^X/K| = {lattice.determinant()} but the group has order {g.order}"
        )
    lattice.hnf()
    radices = tuple(lattice.pivots)

    brace = BraceData(
        group=g,
        lattice=lattice,
        lifts=lifts,
        reps=lattice.reduce_batch(lifts),
        code_to_element=np.full(g.order, -1, dtype=np.int64),
        radices=radices,
    )
    codes = brace._codes(brace.reps)
    if len(np.unique(codes)) != g.order or codes.min() < 0 or codes.max() >= g.order:
        raise ConsistencyError("coset map is not a bijection")
    brace.code_to_element[codes] = np.arange(g.order)
    log_timing(
        logger,
        f"Built brace of order {g.order}",
        (time.perf_counter() - started) * 1000,
        pivots=list(radices),
    )
    return brace


# ---------------------------------------------------------------------------
# Element-level operations
# ---------------------------------------------------------------------------


def brace_add(b: BraceData, u: BraceElement, v: BraceElement) -> BraceElement:
    return b.element(int(b.add_idx(np.array([u.index]), np.array([v.index]))[0]))


def brace_neg(b: BraceData, u: BraceElement) -> BraceElement:
    return b.element(int(b.neg_idx(np.array([u.index]))[0]))


def brace_mul(b: BraceData, u: BraceElement, v: BraceElement) -> BraceElement:
    return b.element(b.group.index_of((u.perm * v.perm).images))


def brace_lambda(b: BraceData, u: BraceElement, v: BraceElement) -> BraceElement:
    return b.element(int(b.lambda_idx(np.array([u.index]), np.array([v.index]))[0]))


def generator_element(b: BraceData, x: int) -> BraceElement:
    return b.element(b.group.index_of(b.group.generators[x]))


def socle(b: BraceData) -> SocleReport:
    """Elements u with lambda_u = id, tested on the additive generators sigma_x."""
    g = b.group
    gens = np.array([g.index_of(row) for row in g.generators], dtype=np.int64)
    keep = np.ones(b.order, dtype=bool)
    for lo in range(0, b.order, _BATCH):
        u = np.arange(lo, min(lo + _BATCH, b.order))
        for x_elem in gens:
            v = np.full(len(u), x_elem)
            keep[lo : lo + len(u)] &= b.lambda_idx(u, v) == x_elem
    members = np.flatnonzero(keep)
    return SocleReport(order=len(members), elements=[int(i) for i in members[:64]])


def lambda_is_identity(b: BraceData, u: int) -> bool:
    """Exhaustive test of lambda_u = id over all elements."""
    v = np.arange(b.order)
    return bool((b.lambda_idx(np.full(b.order, u), v) == v).all())


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------


def verify_brace_axioms(
    b: BraceData,
    sample: Union[str, int] = "all",
    seed: int = 0,
    exhaustive_limit: int = 1_000_000,
) -> BraceAxiomReport:
    """a(b + c) + a = ab + ac over all triples, or a seeded sample.

    Every triple within ``exhaustive_limit`` is checked whatever ``sample``
    says; above it ``sample`` triples are drawn ("all" means the limit).
    Additive and multiplicative associativity run on the same triples.
    Pairs cover commutativity and the links ab = a + lambda_a(b),
    a + b = a lambda_a^-1(b), lambda_{ab} = lambda_a lambda_b.
    """
    started = time.perf_counter()
    N = b.order
    exhaustive = N**3 <= exhaustive_limit
    if not exhaustive and sample == "all":
        sample = exhaustive_limit
    rng = np.random.default_rng(seed)

    def triples():
        if exhaustive:
            flat = np.arange(N**3, dtype=np.int64)
            for lo in range(0, len(flat), _BATCH):
                chunk = flat[lo : lo + _BATCH]
                yield chunk // (N * N), (chunk // N) % N, chunk % N
        else:
            remaining = int(sample)
            while remaining > 0:
                size = min(_BATCH, remaining)
                yield tuple(rng.integers(0, N, size=(3, size)))
                remaining -= size

    checked = 0
    for a, x, y in triples():
        left = b.add_idx(b.mul_idx(a, b.add_idx(x, y)), a)
        right = b.add_idx(b.mul_idx(a, x), b.mul_idx(a, y))
        _fail_triple("brace compatibility", a, x, y, left != right)
        _check_associativity(b, a, x, y)
        checked += len(a)

    pairs = _pairs(N, rng, limit=exhaustive_limit)
    additive = _check_additive(b, *pairs)
    multiplicative = _check_multiplicative(b, *pairs)
    links = _check_links(b, *pairs)

    report = BraceAxiomReport(
        order=N,
        triples_checked=checked,
        exhaustive=exhaustive,
        seed=None if exhaustive else seed,
        compatibility=True,
        additive_group=additive,
        multiplicative_group=multiplicative,
        lambda_links=links,
    )
    log_check_result(logger, "brace axioms", True, order=N, triples=checked)
    log_timing(logger, "Brace axioms", (time.perf_counter() - started) * 1000)
    return report


def _fail_triple(
    check: str, a: np.ndarray, x: np.ndarray, y: np.ndarray, mask: np.ndarray
) -> None:
    bad = np.flatnonzero(mask)
    if bad.size:
        k = bad[0]
        raise ConsistencyError(
            f"{check} fails", triple=(int(a[k]), int(x[k]), int(y[k]))
        )


def _check_associativity(
    b: BraceData, a: np.ndarray, x: np.ndarray, y: np.ndarray
) -> None:
    mask = b.add_idx(b.add_idx(a, x), y) != b.add_idx(a, b.add_idx(x, y))
    _fail_triple("additive associativity", a, x, y, mask)
    mask = b.mul_idx(b.mul_idx(a, x), y) != b.mul_idx(a, b.mul_idx(x, y))
    _fail_triple("multiplicative associativity", a, x, y, mask)


def _pairs(N: int, rng: np.random.Generator, limit: int) -> Tuple[np.ndarray, np.ndarray]:
    if N * N <= limit:
        grid = np.arange(N * N, dtype=np.int64)
        return grid // N, grid % N
    u, v = rng.integers(0, N, size=(2, min(limit, 1 << 17)))
    return u, v


def _batched(fn, u: np.ndarray, v: np.ndarray) -> bool:
    return all(fn(u[lo : lo + _BATCH], v[lo : lo + _BATCH]) for lo in range(0, len(u), _BATCH))


def _fail(check: str, u: np.ndarray, v: np.ndarray, mask: np.ndarray) -> None:
    k = int(np.flatnonzero(mask)[0])
    raise ConsistencyError(f"{check} fails", pair=(int(u[k]), int(v[k])))


def _check_additive(b: BraceData, u: np.ndarray, v: np.ndarray) -> bool:
    everything = np.arange(b.order)
    if (b.add_idx(everything, np.zeros_like(everything)) != everything).any():
        raise ConsistencyError("the identity is not the additive zero")
    if (b.add_idx(everything, b.neg_idx(everything)) != 0).any():
        raise ConsistencyError("additive inverses fail")

    def check(u, v):
        mask = b.add_idx(u, v) != b.add_idx(v, u)
        if mask.any():
            _fail("additive commutativity", u, v, mask)
        return True

    return _batched(check, u, v)


def _check_multiplicative(b: BraceData, u: np.ndarray, v: np.ndarray) -> bool:
    everything = np.arange(b.order)
    if (b.mul_idx(everything, np.zeros_like(everything)) != everything).any():
        raise ConsistencyError("the identity is not the multiplicative one")

    def check(u, v):
        b.mul_idx(u, v)  # raises if the product leaves the set
        return True

    return _batched(check, u, v)


def _inverse_idx(b: BraceData, u: np.ndarray) -> np.ndarray:
    return b.group.lookup_rows(np.argsort(b.group.elements[u], axis=1))


def _check_links(b: BraceData, u: np.ndarray, v: np.ndarray) -> bool:
    def check(u, v):
        lam = b.lambda_idx(u, v)
        mask = b.mul_idx(u, v) != b.add_idx(u, lam)
        if mask.any():
            _fail("ab = a + lambda_a(b)", u, v, mask)
        # lambda_a^-1 = lambda_{a^-1}
        mask = b.add_idx(u, v) != b.mul_idx(u, b.lambda_idx(_inverse_idx(b, u), v))
        if mask.any():
            _fail("a + b = a lambda_a^-1(b)", u, v, mask)
        # lambda_{uv}(w) = lambda_u(lambda_v(w)) on w = v + u
        w = b.add_idx(u, v)
        mask = b.lambda_idx(b.mul_idx(u, v), w) != b.lambda_idx(u, b.lambda_idx(v, w))
        if mask.any():
            _fail("lambda_{ab} = lambda_a lambda_b", u, v, mask)
        return True

    return _batched(check, u, v)


# ---------------------------------------------------------------------------
# The ideal phi(H)
# ---------------------------------------------------------------------------


def phi_H_ideal_check(params: FamilyParams, b: BraceData) -> IdealReport:
    """phi(H) is a nontrivial proper ideal on the cyclic instances.

    phi(H) is the normal closure of {sigma_x sigma_y^-1 : x, y in one orbit}.
    """
    failing = cyclic_hypothesis(params)
    if failing is not None:
        raise NotApplicableError(failing)
    g = b.group
    if g.n != params.size:
        raise StructuralError("brace does not belong to these params")
    k = params.A.moduli[0]
    gens = [g.index_of(row) for row in g.generators]
    seeds = []
    for orbit in orbits(g):
        for x in orbit:
            for y in orbit:
                if x != y:
                    seeds.append(g.mul(gens[x], g.inv(gens[y])))
    ideal = normal_closure(g, seeds, g.generator_indices)

    one = params.A.element((1,))
    p1 = point_index(params, one, params.B.zero, 0)
    p0 = point_index(params, params.A.zero, params.B.zero, 0)
    witness = g.mul(g.inv(gens[p1]), gens[p0])

    members = ideal.members
    conj_ok = True
    lam_ok = True
    for x in range(g.n):
        c = np.full(len(members), gens[x])
        inv_c = np.full(len(members), g.inv(gens[x]))
        conj = g.mul_rows(g.mul_rows(inv_c, members), c)
        conj_ok &= bool(np.isin(conj, members).all())
        lam_ok &= bool(np.isin(b.lambda_idx(c, members), members).all())

    orders = generator_orders(g)
    report = IdealReport(
        group_order=g.order,
        ideal_order=ideal.order,
        witness_in_ideal=ideal.contains(witness),
        witness_nontrivial=witness != 0,
        generator_outside=not ideal.contains(gens[p0]),
        normal=conj_ok,
        lambda_invariant=lam_ok,
        proper_nontrivial=1 < ideal.order < g.order,
        max_generator_order=max(orders),
        generator_orders_divide_k=all(k % o == 0 for o in orders),
    )
    log_check_result(logger, "phi(H) ideal", report.passed, ideal_order=ideal.order)
    return report


# ---------------------------------------------------------------------------
# The solution attached to a brace
# ---------------------------------------------------------------------------


def associated_solution(b: BraceData) -> FiniteSolution:
    """Solution on the brace itself with sigma_a = lambda_a."""
    N = b.order
    if N > ASSOCIATED_SOLUTION_LIMIT:
        raise StructuralError(
            f"brace of order {N} is too large for its associated solution "
            f"(limit {ASSOCIATED_SOLUTION_LIMIT})"
        )
    u = np.repeat(np.arange(N), N)
    v = np.tile(np.arange(N), N)
    table = b.lambda_idx(u, v).reshape(N, N)
    return FiniteSolution.from_table(table.tolist(), [f"g{i}" for i in range(N)])


def lagrange_check(b: BraceData) -> bool:
    """Additive order of every element divides |B|."""
    reps = b.reps
    N = b.order
    for lo in range(0, N, _BATCH):
        chunk = reps[lo : lo + _BATCH]
        scaled = b.element_of(chunk * N)
        if (scaled != 0).any():
            return False
    return math.prod(b.radices) == N
