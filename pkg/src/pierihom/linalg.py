"""Dense complex linear algebra kernels.

Everything at desk scale is small (matrices up to roughly 12x12), so the
factorizations favour explicit control over raw speed: LU with partial
max-modulus pivoting is assembled here directly, exposing the permutation
sign, the determinant, and the pivot magnitudes that the singularity
threshold and the start-regularity diagnostics need.  The one hot path,
batched minor determinants for gradient rows, is delegated to LAPACK
through ``numpy.linalg.det`` on stacked matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: A pivot below PIVOT_RTOL * (largest input entry modulus) counts as zero.
PIVOT_RTOL = 1e-14


class SingularMatrixError(ValueError):
    """A linear solve met a numerically singular matrix."""


@dataclass(frozen=True)
class LUFactors:
    """Combined LU factors of a row-permuted square matrix.

    ``lu`` holds the strict lower factor below the diagonal (unit diagonal
    implied) and the upper factor on and above it.  Row ``i`` of the
    factored matrix came from input row ``perm[i]``.
    """

    lu: np.ndarray
    perm: np.ndarray
    det: complex
    scale: float
    min_pivot: float

    @property
    def singular(self) -> bool:
        return self.min_pivot <= PIVOT_RTOL * self.scale


def lu_decompose(a) -> LUFactors:
    """Factor a square complex matrix with partial (max-modulus) pivoting."""
    lu = np.array(a, dtype=np.complex128)
    if lu.ndim != 2 or lu.shape[0] != lu.shape[1] or lu.shape[0] == 0:
        raise ValueError(f"nonempty square matrix required, got shape {lu.shape}")
    n = lu.shape[0]
    scale = float(np.max(np.abs(lu)))
    perm = np.arange(n)
    sign = 1
    for k in range(n):
        piv = k + int(np.argmax(np.abs(lu[k:, k])))
        if piv != k:
            lu[[k, piv]] = lu[[piv, k]]
            perm[[k, piv]] = perm[[piv, k]]
            sign = -sign
        pivot = lu[k, k]
        if pivot != 0:  # pivot == 0 means the whole subcolumn is zero already
            lu[k + 1 :, k] /= pivot
            lu[k + 1 :, k + 1 :] -= np.outer(lu[k + 1 :, k], lu[k, k + 1 :])
    diag = np.diagonal(lu)
    return LUFactors(
        lu=lu,
        perm=perm,
        det=sign * complex(np.prod(diag)),
        scale=scale,
        min_pivot=float(np.min(np.abs(diag))),
    )


def det(a) -> complex:
    """Determinant via LU (product of pivots times the permutation sign)."""
    return lu_decompose(a).det


def solve_factored(f: LUFactors, b) -> np.ndarray:
    """Forward/back substitution against an existing factorization."""
    x = np.array(np.asarray(b, dtype=np.complex128)[f.perm])
    n = x.shape[0]
    for k in range(1, n):
        x[k] -= f.lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - f.lu[k, k + 1 :] @ x[k + 1 :]) / f.lu[k, k]
    return x


def solve_linear(a, b) -> np.ndarray:
    """Solve ``a @ x = b``, raising SingularMatrixError on rank deficiency."""
    f = lu_decompose(a)
    if f.singular:
        raise SingularMatrixError(
            f"pivot {f.min_pivot:.3e} below {PIVOT_RTOL:.0e} * scale {f.scale:.3e}"
        )
    return solve_factored(f, b)


def cofactor(a, row: int, col: int) -> complex:
    """Signed cofactor (-1)^(row+col) * det(minor), row/col zero-based.

    Computed from the explicit minor so it stays meaningful when ``a``
    itself is singular (the usual case at a determinant-equation solution).
    """
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[0]
    if n == 1:
        return 1 + 0j
    minor = np.delete(np.delete(a, row, axis=0), col, axis=1)
    sign = -1 if (row + col) % 2 else 1
    return sign * det(minor)


def cofactors_at(a, rows, cols) -> np.ndarray:
    """Signed cofactors of ``a`` at paired (rows, cols) positions, batched.

    Builds all requested minors with one fancy-indexing expression and runs
    a single stacked determinant call; positions may repeat.
    """
    a = np.asarray(a, dtype=np.complex128)
    n = a.shape[0]
    rows = np.asarray(rows, dtype=np.intp)
    cols = np.asarray(cols, dtype=np.intp)
    keep = np.arange(n - 1)
    rowsel = np.where(keep[None, :] < rows[:, None], keep, keep + 1)
    colsel = np.where(keep[None, :] < cols[:, None], keep, keep + 1)
    minors = a[rowsel[:, :, None], colsel[:, None, :]]
    signs = np.where((rows + cols) % 2, -1.0, 1.0)
    return signs * np.linalg.det(minors)
