"""Matrix stuffing and Birkhoff-von Neumann decomposition."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FLUSH = 1e-12


class DecompositionError(RuntimeError):
    pass


@dataclass(frozen=True)
class BvnDecomposition:
    terms: tuple[tuple[tuple[int, ...], float], ...]   # (perm, weight); perm[i] = column of row i
    stuffing: np.ndarray

    def reconstruct(self) -> np.ndarray:
        n = self.stuffing.shape[0]
        out = np.zeros((n, n))
        rows = np.arange(n)
        for perm, w in self.terms:
            out[rows, list(perm)] += w
        return out


def stuff_matrix(demand) -> tuple[np.ndarray, np.ndarray]:
    """Pad a non-negative matrix so every row and column sums to its max line sum."""
    d = np.asarray(demand, dtype=float)
    if not np.any(d > 0):
        raise ValueError("all-zero matrix needs no stuffing")
    target = max(d.sum(axis=1).max(), d.sum(axis=0).max())
    row_def = target - d.sum(axis=1)
    col_def = target - d.sum(axis=0)
    scale = FLUSH * target
    row_def[row_def <= scale] = 0.0
    col_def[col_def <= scale] = 0.0
    stuffing = np.zeros_like(d)
    c = 0
    n = d.shape[0]
    for r in range(n):
        while row_def[r] > 0:
            while c < n and col_def[c] <= 0:
                c += 1
            if c == n:
                break
            amount = min(row_def[r], col_def[c])
            stuffing[r, c] += amount
            row_def[r] -= amount
            col_def[c] -= amount
            if row_def[r] <= scale:
                row_def[r] = 0.0
            if col_def[c] <= scale:
                col_def[c] = 0.0
    return d + stuffing, stuffing


def _augment(row, support, match_col, seen) -> bool:
    for col in support[row]:
        if seen[col]:
            continue
        seen[col] = True
        if match_col[col] < 0 or _augment(match_col[col], support, match_col, seen):
            match_col[col] = row
            return True
    return False


def perfect_matching(mat: np.ndarray, prev: list[int] | None = None) -> list[int]:
    """Row -> column perfect matching on the positive support (Kuhn, ascending order).

    ``prev`` seeds the search with a previous matching; edges that vanished are dropped.
    """
    n = mat.shape[0]
    support = [list(np.nonzero(mat[r] > 0)[0]) for r in range(n)]
    match_col = [-1] * n
    if prev is not None:
        for r, c in enumerate(prev):
            if c >= 0 and mat[r, c] > 0:
                match_col[c] = r
    matched_rows = {r for r in match_col if r >= 0}
    for r in range(n):
        if r in matched_rows:
            continue
        if not _augment(r, support, match_col, [False] * n):
            raise DecompositionError(f"no perfect matching covering row {r}")
    perm = [0] * n
    for c, r in enumerate(match_col):
        perm[r] = c
    return perm


def birkhoff_decompose(mat) -> BvnDecomposition:
    """Peel permutations off a matrix whose line sums are all equal."""
    b = np.array(mat, dtype=float)
    n = b.shape[0]
    if b.shape != (n, n) or np.any(b < 0):
        raise ValueError("expected a square non-negative matrix")
    rho = b.sum(axis=1).max()
    if rho <= 0:
        return BvnDecomposition((), np.zeros_like(b))
    lines = np.concatenate([b.sum(axis=1), b.sum(axis=0)])
    if np.max(np.abs(lines - rho)) > 1e-9 * rho:
        raise DecompositionError("row/column sums are not all equal")
    flush = FLUSH * rho
    residual = b.copy()
    residual[residual <= flush] = 0.0
    rows = np.arange(n)
    terms = []
    perm = None
    while np.any(residual > 0):
        try:
            perm = perfect_matching(residual, perm)
        except DecompositionError:
            # float residue left by unequal line sums; anything real would be larger
            if residual.max() <= 1e-9 * rho:
                break
            raise
        w = float(residual[rows, perm].min())
        residual[rows, perm] -= w
        residual[residual <= flush] = 0.0
        terms.append((tuple(int(c) for c in perm), w))
    return BvnDecomposition(tuple(terms), np.zeros_like(b))


def decompose(demand) -> BvnDecomposition:
    """Stuff then decompose; the result reconstructs demand + stuffing."""
    stuffed, stuffing = stuff_matrix(demand)
    dec = birkhoff_decompose(stuffed)
    return BvnDecomposition(dec.terms, stuffing)
