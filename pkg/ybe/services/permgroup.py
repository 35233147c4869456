"""The permutation group generated by the sigma_x of a finite solution.

Elements are rows of a 2-D numpy array of images, hashed bytewise. Index 0
is the identity. Every element remembers the BFS parent and the letter that
reached it, so a generator word witnessing it can be rebuilt. A letter is a
pair (x, e) with e = +1 for sigma_x and -1 for its inverse; products follow
``(p * q)(y) = p(q(y))`` and a word x1^e1 ... xk^ek evaluates to
sigma_x1^e1 o ... o sigma_xk^ek.
"""
from __future__ import annotations

import math
import time
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sympy import Matrix, eye, factorint

from ybe.models.reports import GroupAnalysis, WreathCheck
from ybe.services.family import FamilyParams
from ybe.services.solution import FiniteSolution
from ybe.utils.errors import ConsistencyError, EnumerationCapExceeded
from ybe.utils.logging import log_enumeration_progress, log_timing, setup_logger

logger = setup_logger(__name__)

Letter = Tuple[int, int]
Word = List[Letter]

_BATCH = 1 << 16


@dataclass(frozen=True)
class Permutation:
    images: Tuple[int, ...]

    def __post_init__(self) -> None:
        images = tuple(int(v) for v in self.images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        object.__setattr__(self, "images", images)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    def __call__(self, x: int) -> int:
        return self.images[x]

    def __mul__(self, other: "Permutation") -> "Permutation":
        return Permutation(tuple(self.images[y] for y in other.images))

    def inverse(self) -> "Permutation":
        inv = [0] * len(self.images)
        for x, y in enumerate(self.images):
            inv[y] = x
        return Permutation(tuple(inv))

    @property
    def is_identity(self) -> bool:
        return all(x == y for x, y in enumerate(self.images))

    def cycle_lengths(self) -> List[int]:
        seen = [False] * len(self.images)
        lengths = []
        for start in range(len(self.images)):
            length, x = 0, start
            while not seen[x]:
                seen[x] = True
                x = self.images[x]
                length += 1
            if length:
                lengths.append(length)
        return lengths

    def order(self) -> int:
        return math.lcm(*self.cycle_lengths()) if self.images else 1


class UnionFind:
    def __init__(self, points: Iterable[int]):
        self.parent = {x: x for x in points}
        self.rank = {x: 0 for x in self.parent}

    def find(self, x: int) -> int:
        y = self.parent[x]
        if self.parent[y] != y:
            y = self.parent[x] = self.find(y)
        return y

    def union(self, x: int, y: int) -> None:
        x, y = self.find(x), self.find(y)
        if x == y:
            return
        if self.rank[x] < self.rank[y]:
            x, y = y, x
        elif self.rank[x] == self.rank[y]:
            self.rank[x] += 1
        self.parent[y] = x


def _canonical(parts: Iterable[Iterable[int]]) -> List[List[int]]:
    return sorted((sorted(p) for p in parts), key=lambda p: p[0])


@dataclass
class PermGroupData:
    n: int
    generators: np.ndarray  # generators[x] = sigma_x
    elements: np.ndarray
    parent: np.ndarray  # BFS parent index, -1 for the identity
    letter: np.ndarray  # letter code 2x (sigma_x) or 2x + 1 (inverse), -1 for the identity
    cap: int
    index: Dict[bytes, int] = field(repr=False, default_factory=dict)

    @property
    def order(self) -> int:
        return len(self.elements)

    @cached_property
    def letters(self) -> np.ndarray:
        """Row 2x is sigma_x, row 2x + 1 its inverse."""
        out = np.empty((2 * self.n, self.n), dtype=self.elements.dtype)
        out[0::2] = self.generators
        out[1::2] = np.argsort(self.generators, axis=1)
        return out

    @cached_property
    def generator_indices(self) -> List[int]:
        """Distinct nonidentity generator elements, by index."""
        found = {self.index_of(row) for row in self.generators}
        found.discard(0)
        return sorted(found)

    def _key(self, images: Sequence[int]) -> bytes:
        return np.asarray(images, dtype=self.elements.dtype).tobytes()

    def lookup(self, images: Sequence[int]) -> Optional[int]:
        return self.index.get(self._key(images))

    def index_of(self, images: Sequence[int]) -> int:
        idx = self.lookup(images)
        if idx is None:
            raise ConsistencyError("permutation is not in the group", images=list(map(int, images)))
        return idx

    def contains(self, perm: Permutation) -> bool:
        return len(perm.images) == self.n and self.lookup(perm.images) is not None

    def lookup_rows(self, rows: np.ndarray) -> np.ndarray:
        rows = np.ascontiguousarray(rows, dtype=self.elements.dtype)
        width = self.n * rows.dtype.itemsize
        buf = rows.tobytes()
        index = self.index
        try:
            return np.fromiter(
                (index[buf[r * width : (r + 1) * width]] for r in range(len(rows))),
                dtype=np.int64,
                count=len(rows),
            )
        except KeyError as exc:
            raise ConsistencyError("product left the enumerated set") from exc

    def permutation(self, i: int) -> Permutation:
        return Permutation(tuple(int(v) for v in self.elements[i]))

    def mul(self, i: int, j: int) -> int:
        return self.index_of(self.elements[i][self.elements[j]])

    def inv(self, i: int) -> int:
        return self.index_of(np.argsort(self.elements[i]))

    def mul_rows(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Indices of elements[left] o elements[right], elementwise."""
        prod = np.take_along_axis(self.elements[left], self.elements[right].astype(np.intp), axis=1)
        return self.lookup_rows(prod)

    def witness(self, i: int) -> Word:
        word: Word = []
        while self.parent[i] >= 0:
            code = int(self.letter[i])
            word.append((code // 2, -1 if code % 2 else 1))
            i = int(self.parent[i])
        word.reverse()
        return word

    def evaluate(self, word: Sequence[Letter]) -> np.ndarray:
        result = np.arange(self.n)
        for x, e in word:
            result = result[self.letters[2 * x + (e < 0)]]
        return result


def enumerate_group(s: FiniteSolution, cap: int) -> PermGroupData:
    """Breadth-first closure of the sigma_x under composition.

    Raises EnumerationCapExceeded as soon as a (cap + 1)-th element appears.
    """
    if cap < 1:
        raise ValueError("cap must be at least 1")
    started = time.perf_counter()
    n = s.size
    dtype = np.dtype(np.uint8 if n <= 256 else np.uint16 if n <= 65536 else np.int64)
    generators = np.array(s.sigma, dtype=dtype)
    letters = np.empty((2 * n, n), dtype=dtype)
    letters[0::2] = generators
    letters[1::2] = np.argsort(generators, axis=1)

    identity = np.arange(n, dtype=dtype)
    width = n * dtype.itemsize
    index: Dict[bytes, int] = {identity.tobytes(): 0}
    parents: List[int] = [-1]
    codes: List[int] = [-1]
    chunks = [identity[None, :]]
    frontier = identity[None, :]
    frontier_idx = [0]

    while len(frontier):
        start = len(index)
        new_keys: List[bytes] = []
        for code, g in enumerate(letters):
            buf = frontier[:, g].tobytes()
            for r in range(len(frontier)):
                key = buf[r * width : (r + 1) * width]
                if key in index:
                    continue
                if len(index) >= cap:
                    raise EnumerationCapExceeded(len(index) + 1, cap)
                index[key] = len(index)
                parents.append(frontier_idx[r])
                codes.append(code)
                new_keys.append(key)
        if not new_keys:
            break
        frontier = np.frombuffer(b"".join(new_keys), dtype=dtype).reshape(-1, n)
        frontier_idx = list(range(start, start + len(new_keys)))
        chunks.append(frontier)
        log_enumeration_progress(logger, len(index), len(new_keys))

    group = PermGroupData(
        n=n,
        generators=generators,
        elements=np.concatenate(chunks),
        parent=np.array(parents, dtype=np.int64),
        letter=np.array(codes, dtype=np.int64),
        cap=cap,
        index=index,
    )
    log_timing(
        logger,
        f"Enumerated group of order {group.order}",
        (time.perf_counter() - started) * 1000,
        degree=n,
    )
    return group


# ---------------------------------------------------------------------------
# Orbits
# ---------------------------------------------------------------------------


def generator_orbits(sigma: Sequence[Sequence[int]]) -> List[List[int]]:
    n = len(sigma)
    uf = UnionFind(range(n))
    for row in sigma:
        for x in range(n):
            uf.union(x, int(row[x]))
    parts: Dict[int, List[int]] = {}
    for x in range(n):
        parts.setdefault(uf.find(x), []).append(x)
    return _canonical(parts.values())


def orbits(g: PermGroupData) -> List[List[int]]:
    """Orbit partition, ordered by least point."""
    return generator_orbits(g.generators)


def orbits_from_elements(g: PermGroupData) -> List[List[int]]:
    seen = set()
    parts = []
    for x in range(g.n):
        if x in seen:
            continue
        orbit = {int(v) for v in np.unique(g.elements[:, x])}
        seen |= orbit
        parts.append(orbit)
    return _canonical(parts)


def generator_orders(g: PermGroupData) -> List[int]:
    return [Permutation(tuple(row)).order() for row in g.generators]


# ---------------------------------------------------------------------------
# Subgroups and series
# ---------------------------------------------------------------------------


@dataclass
class Subgroup:
    members: np.ndarray  # sorted element indices
    gens: List[int]

    @property
    def order(self) -> int:
        return len(self.members)

    def contains(self, i: int) -> bool:
        pos = np.searchsorted(self.members, i)
        return bool(pos < len(self.members) and self.members[pos] == i)


def closure(g: PermGroupData, gens: Sequence[int]) -> Subgroup:
    """The subgroup generated by the given elements."""
    members = np.zeros(g.order, dtype=bool)
    members[0] = True
    gen_rows = g.elements[list(gens)].astype(np.intp)
    frontier = np.array([0], dtype=np.int64)
    while frontier.size:
        rows = g.elements[frontier]
        found = [g.lookup_rows(rows[:, h]) for h in gen_rows]
        if not found:
            break
        candidates = np.unique(np.concatenate(found))
        frontier = candidates[~members[candidates]]
        members[frontier] = True
    return Subgroup(np.flatnonzero(members), list(gens))


def conjugate(g: PermGroupData, s: int, c: int) -> int:
    """c^-1 s c."""
    return g.mul(g.mul(g.inv(c), s), c)


def commutator(g: PermGroupData, a: int, b: int) -> int:
    """a^-1 b^-1 a b."""
    return g.mul(g.mul(g.inv(a), g.inv(b)), g.mul(a, b))


def normal_closure(g: PermGroupData, seeds: Iterable[int], conj_by: Sequence[int]) -> Subgroup:
    gens: List[int] = []
    current = Subgroup(np.array([0], dtype=np.int64), [])
    queue = deque(seeds)
    while queue:
        s = queue.popleft()
        if current.contains(s):
            continue
        gens.append(s)
        current = closure(g, gens)
        queue.extend(conjugate(g, s, c) for c in conj_by)
    return current


def whole_group(g: PermGroupData) -> Subgroup:
    return Subgroup(np.arange(g.order, dtype=np.int64), g.generator_indices)


def derived_series(g: PermGroupData) -> List[Subgroup]:
    top = whole_group(g)
    series = [top]
    while series[-1].order > 1:
        cur = series[-1]
        comms = [commutator(g, a, b) for a in cur.gens for b in cur.gens if a < b]
        nxt = normal_closure(g, comms, top.gens)
        if nxt.order == cur.order:
            break
        series.append(nxt)
    return series


def lower_central_series(g: PermGroupData) -> List[Subgroup]:
    top = whole_group(g)
    series = [top]
    while series[-1].order > 1:
        cur = series[-1]
        comms = [commutator(g, s, t) for s in cur.gens for t in top.gens]
        nxt = normal_closure(g, comms, top.gens)
        if nxt.order == cur.order:
            break
        series.append(nxt)
    return series


def center(g: PermGroupData) -> np.ndarray:
    """Indices of elements commuting with every generator."""
    keep = np.ones(g.order, dtype=bool)
    E = g.elements
    for h in g.generators.astype(np.intp):
        for lo in range(0, g.order, _BATCH):
            block = E[lo : lo + _BATCH]
            keep[lo : lo + _BATCH] &= (block[:, h] == h[block]).all(axis=1)
    return np.flatnonzero(keep)


def analyze(g: PermGroupData) -> GroupAnalysis:
    started = time.perf_counter()
    derived = derived_series(g)
    lcs = lower_central_series(g)
    gen_orbits = orbits(g)
    analysis = GroupAnalysis(
        order=g.order,
        orbits=gen_orbits,
        orbits_consistent=gen_orbits == orbits_from_elements(g),
        derived_series=[h.order for h in derived],
        lower_central_series=[h.order for h in lcs],
        derived_length=len(derived) - 1 if derived[-1].order == 1 else None,
        nilpotency_class=len(lcs) - 1 if lcs[-1].order == 1 else None,
        center_order=len(center(g)),
        generator_orders=generator_orders(g),
    )
    log_timing(logger, "Analyzed group", (time.perf_counter() - started) * 1000, order=g.order)
    return analysis


# ---------------------------------------------------------------------------
# Embedding into the |I|-fold product of wreath products
# ---------------------------------------------------------------------------


def predicted_class(k: int) -> Optional[int]:
    """Nilpotency class of Z/k wr Z/k: (a(p-1)+1)p^(a-1) for k = p^a, else None."""
    factors = factorint(k)
    if len(factors) != 1:
        return None
    (p, a), = factors.items()
    return (a * (p - 1) + 1) * p ** (a - 1)


def _prime_of(order: int) -> Optional[int]:
    factors = factorint(order)
    return next(iter(factors)) if len(factors) == 1 else None


def cyclic_hypothesis(params: FamilyParams) -> Optional[str]:
    """Name of the first failing hypothesis of the cyclic case, or None."""
    A, B = params.A, params.B
    if A.rank != 1 or B.rank != 1 or A.moduli != B.moduli:
        return "A = B = Z/k"
    k = A.moduli[0]
    if k < 2:
        return "k > 1"
    if math.gcd(params.i_count - 1, k) != 1:
        return "gcd(|I| - 1, k) = 1"
    if not params.phi2.surjective:
        return "phi2 surjective"
    if not params.phi1.is_indicator():
        return "phi1(0) = 0 and phi1(x) = 1 for x != 0"
    return None


class _Wreath:
    """Index tables for reading an element of G as a tuple of wreath elements.

    On block j every group element acts as (c, d) -> (c + t, d + F(c)); it is
    sent to (x -> F(x - t), t). The image of a group element is the
    concatenation over blocks of |A| function values then the translation.
    """

    def __init__(self, params: FamilyParams):
        self.params = params
        self.nA, self.nB = params.A.order, params.B.order
        self.blk = params.block_size
        self.width = self.nA + 1
        self.add_a = np.array(params.A.add_table, dtype=np.intp)
        self.add_b = np.array(params.B.add_table, dtype=np.intp)
        neg_a = np.array(params.A.neg_table, dtype=np.intp)
        # sub_a[t, x] = x - t
        self.sub_a = self.add_a[:, neg_a].T
        self.cs = np.repeat(np.arange(self.nA), self.nB)
        self.ds = np.tile(np.arange(self.nB), self.nA)

    def read(self, rows: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(affine form holds per row, image codes)."""
        N = len(rows)
        ok = np.ones(N, dtype=bool)
        parts = []
        for j in range(self.params.i_count):
            base = j * self.blk
            block = rows[:, base : base + self.blk].astype(np.int64) - base
            ok &= ((block >= 0) & (block < self.blk)).all(axis=1)
            block = np.clip(block, 0, self.blk - 1)
            a_img, b_img = np.divmod(block, self.nB)
            t = a_img[:, 0]
            f = b_img[:, :: self.nB]
            ok &= (a_img == self.add_a[self.cs[None, :], t[:, None]]).all(axis=1)
            ok &= (b_img == self.add_b[self.ds[None, :], f[:, self.cs]]).all(axis=1)
            parts.append(np.take_along_axis(f, self.sub_a[t], axis=1))
            parts.append(t[:, None])
        return ok, np.concatenate(parts, axis=1)

    def multiply(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """(f, s)(g, t) = (f + g(. - s), s + t), blockwise; ``right`` is one code."""
        out = np.empty_like(left)
        w = self.width
        for j in range(self.params.i_count):
            f, s = left[:, j * w : j * w + self.nA], left[:, j * w + self.nA]
            g, t = right[j * w : j * w + self.nA], right[j * w + self.nA]
            out[:, j * w : j * w + self.nA] = self.add_b[f, g[self.sub_a[s]]]
            out[:, j * w + self.nA] = self.add_a[s, t]
        return out

    def by_definition(self, x: int) -> np.ndarray:
        """Image of sigma_(a,b,i): f_a(y) = phi1(a - y) at slot i, translation phi2(b) elsewhere."""
        params = self.params
        i, rest = divmod(x, self.blk)
        a, b = divmod(rest, self.nB)
        phi1 = [params.B.index(params.phi1(e)) for e in params.A.elements]
        phi2_b = params.A.index(params.phi2(params.B.elements[b]))
        code = np.zeros(params.i_count * self.width, dtype=np.int64)
        for j in range(params.i_count):
            if j == i:
                code[j * self.width : j * self.width + self.nA] = [
                    phi1[self.sub_a[y, a]] for y in range(self.nA)
                ]
            else:
                code[j * self.width + self.nA] = phi2_b
        return code


def wreath_check(
    params: FamilyParams, g: PermGroupData, analysis: Optional[GroupAnalysis] = None
) -> WreathCheck:
    started = time.perf_counter()
    if g.n != params.size:
        raise ConsistencyError("group degree does not match the family size")
    analysis = analysis or analyze(g)
    wreath = _Wreath(params)

    gen_ok, gen_codes = wreath.read(g.generators)
    definition = np.array([wreath.by_definition(x) for x in range(g.n)])
    matches_definition = bool(gen_ok.all() and (gen_codes == definition).all())

    affine = True
    homomorphic = True
    letter_codes = wreath.read(g.letters)[1]
    codes = []
    for lo in range(0, g.order, _BATCH):
        rows = g.elements[lo : lo + _BATCH]
        ok, code = wreath.read(rows)
        affine &= bool(ok.all())
        codes.append(code)
        for letter, letter_code in zip(g.letters.astype(np.intp), letter_codes):
            child_ok, child_code = wreath.read(rows[:, letter])
            affine &= bool(child_ok.all())
            homomorphic &= bool((child_code == wreath.multiply(code, letter_code)).all())
    all_codes = np.concatenate(codes)
    injective = len(np.unique(all_codes, axis=0)) == g.order

    failing = cyclic_hypothesis(params)
    k = params.A.moduli[0]
    prime = _prime_of(params.A.order)
    if prime is not None and _prime_of(params.B.order) != prime:
        prime = None

    check = WreathCheck(
        applicable=failing is None,
        failing_hypothesis=failing,
        predicted_order=(k**k * k) ** params.i_count if failing is None else None,
        measured_order=g.order,
        wreath_order=(params.B.order ** params.A.order * params.A.order) ** params.i_count,
        predicted_class=predicted_class(k) if failing is None else None,
        measured_class=analysis.nilpotency_class,
        measured_derived_length=analysis.derived_length,
        nu_affine=affine,
        nu_matches_definition=matches_definition,
        nu_homomorphic=homomorphic,
        nu_injective=injective,
        p_group_prime=prime,
        order_is_p_power=(
            None if prime is None else g.order == 1 or _prime_of(g.order) == prime
        ),
    )
    log_timing(
        logger,
        f"Wreath check (applicable={check.applicable}, matches={check.matches})",
        (time.perf_counter() - started) * 1000,
    )
    return check


def det_Nk(k: int) -> int:
    """Determinant of the k x k all-ones-minus-identity matrix, fraction free."""
    if k < 2:
        raise ValueError("k must be at least 2")
    det = int((Matrix.ones(k, k) - eye(k)).det(method="bareiss"))
    if det != (-1) ** (k - 1) * (k - 1):
        raise ConsistencyError(f"det(N_{k}) = {det} disagrees with the closed form")
    return det
