"""Division-free characteristic polynomial (Berkowitz) over a commutative ring."""

from __future__ import annotations

from typing import Sequence, TypeVar

R = TypeVar("R")


def berkowitz(
    matrix: Sequence[Sequence[R]],
    one: R,
    zero: R,
    max_degree: int | None = None,
) -> list[R]:
    """Coefficients ``c_0 = 1, c_1, ..., c_n`` of ``det(1 - s*A) = sum c_i s^i``.

    Only ring operations ``+``, ``-`` and ``*`` are used. With ``max_degree``
    the coefficients above that power of ``s`` are never formed.
    """
    n = len(matrix)
    top = n if max_degree is None else min(n, max_degree)
    coeffs: list[R] = [one]
    for k in range(n):
        a = matrix[k][k]
        row = matrix[k][:k]
        col = [matrix[i][k] for i in range(k)]
        toeplitz = [one, zero - a]
        vec = col
        for _ in range(min(k, top - 1)):
            acc = zero
            for x, y in zip(row, vec):
                acc = acc + x * y
            toeplitz.append(zero - acc)
            vec = [_dot(matrix[i][:k], vec, zero) for i in range(k)]
        new = []
        for i in range(min(k + 1, top) + 1):
            acc = zero
            for j in range(min(i, len(coeffs) - 1) + 1):
                if i - j < len(toeplitz):
                    acc = acc + toeplitz[i - j] * coeffs[j]
            new.append(acc)
        coeffs = new
    return coeffs


def _dot(a, b, zero):
    acc = zero
    for x, y in zip(a, b):
        acc = acc + x * y
    return acc
