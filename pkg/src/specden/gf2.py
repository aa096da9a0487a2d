"""Small dense linear algebra over GF(2).

Vectors are Python ints used as bit vectors (bit ``i`` is coordinate ``i``).
A matrix is a tuple of column vectors, so ``A[j]`` is the image of the
``j``-th standard basis vector.
"""

from __future__ import annotations

from functools import lru_cache

Matrix = tuple[int, ...]


def identity(n: int) -> Matrix:
    return tuple(1 << j for j in range(n))


def apply(a: Matrix, v: int) -> int:
    out = 0
    j = 0
    while v:
        if v & 1:
            out ^= a[j]
        v >>= 1
        j += 1
    return out


def matmul(a: Matrix, b: Matrix) -> Matrix:
    """Return the matrix of ``a`` after ``b``."""
    return tuple(apply(a, col) for col in b)


def rank(vectors) -> int:
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def is_invertible(a: Matrix) -> bool:
    return rank(a) == len(a)


def inverse(a: Matrix) -> Matrix:
    n = len(a)
    # Gauss-Jordan on rows of [A | I]; rows are stored as ints of width 2n.
    rows = []
    for i in range(n):
        row = 0
        for j in range(n):
            if (a[j] >> i) & 1:
                row |= 1 << j
        rows.append(row | (1 << (n + i)))
    for col in range(n):
        pivot = next((r for r in range(col, n) if (rows[r] >> col) & 1), None)
        if pivot is None:
            raise ValueError("matrix is singular over GF(2)")
        rows[col], rows[pivot] = rows[pivot], rows[col]
        for r in range(n):
            if r != col and (rows[r] >> col) & 1:
                rows[r] ^= rows[col]
    inv_rows = [row >> n for row in rows]
    return tuple(
        sum(((inv_rows[i] >> j) & 1) << i for i in range(n)) for j in range(n)
    )


def _complete_basis(v: int, n: int) -> list[int]:
    basis = [v]
    for j in range(n):
        e = 1 << j
        if rank(basis + [e]) == len(basis) + 1:
            basis.append(e)
        if len(basis) == n:
            break
    return basis


def _complete_basis_reversed(v: int, n: int) -> list[int]:
    basis = [v]
    for j in reversed(range(n)):
        e = 1 << j
        if rank(basis + [e]) == len(basis) + 1:
            basis.append(e)
    return basis


COMPLETIONS = {"forward": _complete_basis, "reverse": _complete_basis_reversed}


@lru_cache(maxsize=None)
def completion(x: int, y: int, n: int, order: str = "forward") -> Matrix:
    """Deterministic invertible matrix sending ``x`` to ``y``.

    Both vectors are extended to a basis by greedily appending standard basis
    vectors (in increasing index order for ``"forward"``, decreasing for
    ``"reverse"``) and the first basis is mapped onto the second.
    """
    if x == 0 or y == 0:
        raise ValueError("automorphisms fix zero")
    if x == y:
        return identity(n)
    complete = COMPLETIONS[order]
    bx, by = complete(x, n), complete(y, n)
    # A = By * Bx^{-1}
    return matmul(tuple(by), inverse(tuple(bx)))


@lru_cache(maxsize=None)
def permutation(a: Matrix) -> tuple[int, ...]:
    """Permutation of ``range(2**n)`` induced by ``a``."""
    return tuple(apply(a, v) for v in range(1 << len(a)))


def permute_mask(a: Matrix, mask: int) -> int:
    perm = permutation(a)
    out = 0
    v = 0
    while mask:
        if mask & 1:
            out |= 1 << perm[v]
        mask >>= 1
        v += 1
    return out
