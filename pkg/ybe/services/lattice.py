"""Mutable integer lattices in Z^N kept in row echelon form.

Rows are Python int lists (arbitrary precision). Vectors are folded in one
at a time with extended-gcd row operations; :meth:`Lattice.hnf` then reduces
the entries above each pivot so the basis is the unique row Hermite normal
form with positive pivots.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ybe.utils.errors import ConsistencyError


def xgcd(a: int, b: int) -> Tuple[int, int, int]:
    """(x, y, g) with x*a + y*b == g == gcd(a, b) >= 0."""
    x, next_x = 1, 0
    y, next_y = 0, 1
    g, next_g = a, b
    while next_g:
        q = g // next_g
        x, next_x = next_x, x - q * next_x
        y, next_y = next_y, y - q * next_y
        g, next_g = next_g, g - q * next_g
    if g < 0:
        x, y, g = -x, -y, -g
    return x, y, g


class Lattice:
    __slots__ = ["N", "basis", "pivot_location_in_column", "pivot_location_in_row"]

    def __init__(self, ambient_dimension: int):
        self.N = ambient_dimension
        self.basis: List[List[int]] = []
        self.pivot_location_in_column: List[Optional[int]] = [None] * ambient_dimension
        self.pivot_location_in_row: List[int] = []

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def is_full_rank(self) -> bool:
        return self.rank == self.N

    @property
    def pivots(self) -> List[int]:
        return [row[j] for row, j in zip(self.basis, self.pivot_location_in_row)]

    def determinant(self) -> Optional[int]:
        """Index of the lattice in Z^N, or None below full rank."""
        return math.prod(self.pivots) if self.is_full_rank else None

    def __contains__(self, vec: Sequence[int]) -> bool:
        vec = list(vec)
        for j in range(self.N):
            if not vec[j]:
                continue
            p = self.pivot_location_in_column[j]
            if p is None:
                return False
            row = self.basis[p]
            q, rem = divmod(vec[j], row[j])
            if rem:
                return False
            for jj in range(j, self.N):
                vec[jj] -= q * row[jj]
        return True

    def _insert(self, vec: List[int], j: int) -> None:
        if vec[j] < 0:
            vec = [-v for v in vec]
        where = bisect_left(self.pivot_location_in_row, j)
        self.basis.insert(where, vec)
        self.pivot_location_in_row.insert(where, j)
        for ii in range(where, len(self.basis)):
            self.pivot_location_in_column[self.pivot_location_in_row[ii]] = ii

    def add_vector(self, vec0: Sequence[int]) -> bool:
        """Add a vector to the span; True when the lattice grew."""
        if len(vec0) != self.N:
            raise ValueError(f"expected a vector of length {self.N}")
        vec = [int(v) for v in vec0]
        N = self.N
        grew = False
        for j in range(N):
            if not vec[j]:
                continue
            p = self.pivot_location_in_column[j]
            if p is None:
                self._insert(vec, j)
                return True
            row = self.basis[p]
            a, b = row[j], vec[j]
            if b % a == 0:
                q = b // a
                for jj in range(j, N):
                    vec[jj] -= q * row[jj]
                continue
            x, y, g = xgcd(a, b)
            ag, mbg = a // g, -b // g
            for jj in range(j, N):
                aa, bb = row[jj], vec[jj]
                row[jj] = x * aa + y * bb
                vec[jj] = mbg * aa + ag * bb
            grew = True  # pivot shrank from a to g
        return grew

    def hnf(self) -> "Lattice":
        """Reduce entries above pivots into [0, pivot). Returns self."""
        for p, j in enumerate(self.pivot_location_in_row):
            pivot_row = self.basis[p]
            d = pivot_row[j]
            for above in self.basis[:p]:
                q = above[j] // d
                if q:
                    for jj in range(j, self.N):
                        above[jj] -= q * pivot_row[jj]
        return self

    def reduce_batch(self, vectors: np.ndarray) -> np.ndarray:
        """Canonical representatives of the rows mod the lattice (full rank, after hnf)."""
        if not self.is_full_rank:
            raise ConsistencyError("reduction needs a full-rank lattice")
        out = np.array(vectors, dtype=np.int64, copy=True)
        basis = np.array(self.basis, dtype=np.int64)
        for row, j in zip(basis, self.pivot_location_in_row):
            q = np.floor_divide(out[:, j], row[j])
            out -= q[:, None] * row[None, :]
        return out

    def matrix(self) -> List[List[int]]:
        return [list(row) for row in self.basis]
