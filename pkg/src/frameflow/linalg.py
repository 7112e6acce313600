"""Core matrix operations: sign-fixed QR, the triangular bracket used by
QR-style calculus, Hilbert-Schmidt inner products and tangent projections."""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (
    NonSquare,
    NotUnitaryFrame,
    OddAmbient,
    RankDeficient,
    ShapeMismatch,
)


@dataclass(frozen=True)
class Tolerance:
    absolute: float = 1e-10
    relative: float = 1e-8


DEFAULT_TOL = Tolerance()


class QRPair(NamedTuple):
    q: np.ndarray
    r: np.ndarray


def _as_matrix(x, name="x"):
    m = np.asarray(x, dtype=float)
    if m.ndim != 2:
        raise ShapeMismatch(f"{name} must be a 2-d array, got ndim={m.ndim}")
    return m


def qr_positive(x, tol=DEFAULT_TOL):
    """Thin QR factorization normalized so the triangular factor has a
    strictly positive diagonal.  Returns (q, r) with x = q @ r.

    Raises RankDeficient when some diagonal entry is negligible relative to
    the corresponding input column.
    """
    x = _as_matrix(x)
    n, k = x.shape
    if k > n:
        raise ShapeMismatch(f"need at least as many rows as columns, got {n}x{k}")
    q, r = np.linalg.qr(x)
    d = np.diag(r).copy()
    col_scale = np.maximum(1.0, np.linalg.norm(x, axis=0))
    bad = np.abs(d) < tol.absolute * col_scale
    if np.any(bad):
        raise RankDeficient(f"columns {np.nonzero(bad)[0].tolist()} numerically dependent")
    sign = np.where(d < 0.0, -1.0, 1.0)
    return QRPair(q * sign, r * sign[:, None])


def tri_left(x):
    """Triangular bracket: keep the diagonal, symmetrize above it, zero below.

    For square x this is triu(x + x^T, 1) + diag(x); it satisfies
    t + t^T = x + x^T and vanishes on skew-symmetric input.
    """
    x = _as_matrix(x)
    if x.shape[0] != x.shape[1]:
        raise NonSquare(f"triangular bracket needs a square matrix, got {x.shape}")
    return np.triu(x + x.T, 1) + np.diag(np.diag(x))


def tangent_qr(x, v, tol=DEFAULT_TOL):
    """Split a direction v at full-rank x into QR-factor derivatives.

    With x = q r the thin positive QR, returns (v0, v1) such that
    v = v0 @ r + q @ v1, where v0 is the derivative of the Q-factor map
    along v (tangent at q: q^T v0 skew) and v1 is upper triangular.
    """
    x = _as_matrix(x)
    v = _as_matrix(v, "v")
    if v.shape != x.shape:
        raise ShapeMismatch(f"direction shape {v.shape} != base shape {x.shape}")
    q, r = qr_positive(x, tol)
    # y = v r^{-1} via a triangular solve on the transposed system
    y = np.linalg.solve(r.T, v.T).T
    g = tri_left(q.T @ y)
    v0 = y - q @ g
    v1 = g @ r
    return v0, v1


def hs_inner(e, f):
    """Trace inner product scaled by the number of columns, so that every
    orthonormal frame has norm one."""
    e = _as_matrix(e, "e")
    f = _as_matrix(f, "f")
    if e.shape != f.shape:
        raise ShapeMismatch(f"shapes differ: {e.shape} vs {f.shape}")
    return float(np.tensordot(e, f)) / e.shape[1]


def hs_norm(e):
    return float(np.sqrt(max(hs_inner(e, e), 0.0)))


def proj_tangent_orth(x, b):
    """Orthogonal projection of an ambient matrix b onto the tangent space
    of the orthonormal-frame manifold at the frame x."""
    x = _as_matrix(x)
    b = _as_matrix(b, "b")
    if b.shape != x.shape:
        raise ShapeMismatch(f"shapes differ: {x.shape} vs {b.shape}")
    xtb = x.T @ b
    return 0.5 * x @ (xtb - xtb.T) + b - x @ xtb


def proj_normal_orth(x, b):
    """Complementary projection onto the normal space at x."""
    return _as_matrix(b, "b") - proj_tangent_orth(x, b)


def symplectic_j(n):
    """Standard skew form on 2n coordinates: block [[0, -I], [I, 0]]."""
    if n < 1:
        raise ShapeMismatch("n must be positive")
    j = np.zeros((2 * n, 2 * n))
    j[:n, n:] = -np.eye(n)
    j[n:, :n] = np.eye(n)
    return j


def proj_tangent_unitary(x, b, tol=DEFAULT_TOL):
    """Orthogonal projection onto the tangent space of the isotropic
    (unitary-group) frame manifold at x.

    Requires x to have orthonormal, pairwise isotropic columns in an
    even-dimensional ambient space.
    """
    x = _as_matrix(x)
    b = _as_matrix(b, "b")
    if b.shape != x.shape:
        raise ShapeMismatch(f"shapes differ: {x.shape} vs {b.shape}")
    n2, k = x.shape
    if n2 % 2:
        raise OddAmbient(f"ambient dimension {n2} is odd")
    j = symplectic_j(n2 // 2)
    gram = x.T @ x
    iso = x.T @ j @ x
    if not (np.allclose(gram, np.eye(k), atol=1e-8) and np.allclose(iso, 0.0, atol=1e-8)):
        raise NotUnitaryFrame("columns must be orthonormal and pairwise isotropic")
    xtb = x.T @ b
    xjb = x.T @ j @ b
    skew = 0.5 * (xtb - xtb.T)
    sym = -0.5 * (xjb + xjb.T)
    rest = b - x @ xtb + j @ x @ (x.T @ (j @ b))
    return x @ skew + j @ x @ sym + rest
