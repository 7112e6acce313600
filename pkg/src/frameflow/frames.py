"""Orthonormal frames, the QR compression of the linear group action on
them, truncation to shorter frames, and the induced flags."""

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadIndex,
    NotUnitaryFrame,
    OddAmbient,
    ShapeMismatch,
    SignatureMismatch,
    Singular,
    ValidationError,
)
from .linalg import DEFAULT_TOL, hs_norm, qr_positive, symplectic_j

KIND_ORTHOGONAL = "orthogonal"
KIND_UNITARY = "unitary"
_KINDS = (KIND_ORTHOGONAL, KIND_UNITARY)

_FRAME_ATOL = 1e-8


class Frame:
    """A tuple of orthonormal columns in n-space.

    kind "orthogonal" is a point of the real frame manifold; kind "unitary"
    additionally requires the columns to be pairwise isotropic for the
    standard skew form (even ambient dimension).
    """

    __slots__ = ("_mat", "_kind")

    def __init__(self, mat, kind=KIND_ORTHOGONAL):
        m = np.array(mat, dtype=float)
        if m.ndim != 2:
            raise ShapeMismatch(f"frame matrix must be 2-d, got ndim={m.ndim}")
        n, k = m.shape
        if not 1 <= k <= n:
            raise ShapeMismatch(f"need 1 <= columns <= rows, got {n}x{k}")
        if kind not in _KINDS:
            raise ValidationError(f"unknown frame kind {kind!r}")
        gram = m.T @ m
        if not np.allclose(gram, np.eye(k), atol=_FRAME_ATOL):
            raise ValidationError("columns are not orthonormal")
        if kind == KIND_UNITARY:
            if n % 2:
                raise OddAmbient(f"unitary frames need even ambient dimension, got {n}")
            j = symplectic_j(n // 2)
            if np.max(np.abs(m.T @ j @ m)) > _FRAME_ATOL:
                raise NotUnitaryFrame("columns are not pairwise isotropic")
        m.setflags(write=False)
        self._mat = m
        self._kind = kind

    @property
    def mat(self):
        return self._mat

    @property
    def kind(self):
        return self._kind

    @property
    def n(self):
        return self._mat.shape[0]

    @property
    def k(self):
        return self._mat.shape[1]

    def __repr__(self):
        return f"Frame(n={self.n}, k={self.k}, kind={self._kind!r})"


def act(a, x, tol=DEFAULT_TOL):
    """Move the frame x by the invertible matrix a: orthonormalize the
    columns of a @ x by thin QR and keep the Q factor.

    This is a left action: act(b, act(a, x)) == act(b @ a, x).
    """
    a = np.asarray(a, dtype=float)
    if a.shape != (x.n, x.n):
        raise ShapeMismatch(f"need a {x.n}x{x.n} matrix, got {a.shape}")
    sv = np.linalg.svd(a, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] <= tol.relative * sv[0]:
        raise Singular("matrix is numerically singular")
    q, _ = qr_positive(a @ x.mat, tol)
    return Frame(q, x.kind)


def truncate(x, k2):
    """Keep the first k2 columns of the frame."""
    if not 1 <= k2 <= x.k:
        raise BadIndex(f"k2 must be in 1..{x.k}, got {k2}")
    return Frame(x.mat[:, :k2], x.kind)


@dataclass(frozen=True)
class Signature:
    """Strictly increasing subspace dimensions of a flag."""

    parts: tuple

    def __post_init__(self):
        p = tuple(int(v) for v in self.parts)
        object.__setattr__(self, "parts", p)
        if not p:
            raise ValidationError("signature needs at least one part")
        if p[0] < 1 or any(a >= b for a, b in zip(p, p[1:])):
            raise ValidationError(f"signature must increase strictly from >= 1, got {p}")


@dataclass(frozen=True)
class Flag:
    """Nested subspaces spanned by leading columns of a frame."""

    mat: np.ndarray
    signature: Signature

    @property
    def n(self):
        return self.mat.shape[0]


def to_flag(x, signature):
    """Forget the frame down to the flag of its leading-column spans."""
    top = signature.parts[-1]
    if top > x.k:
        raise ShapeMismatch(f"signature needs {top} columns, frame has {x.k}")
    return Flag(x.mat[:, :top], signature)


def flag_distance(u, v):
    """Largest Hilbert-Schmidt distance between matching subspace
    projectors of two flags with the same signature."""
    if u.signature != v.signature:
        raise SignatureMismatch(f"{u.signature.parts} vs {v.signature.parts}")
    if u.n != v.n:
        raise ShapeMismatch(f"ambient dimensions differ: {u.n} vs {v.n}")
    worst = 0.0
    for part in u.signature.parts:
        a = u.mat[:, :part]
        b = v.mat[:, :part]
        worst = max(worst, hs_norm(a @ a.T - b @ b.T))
    return worst


def is_isotropic(x, atol=_FRAME_ATOL):
    """Whether the columns pairwise annihilate under the standard skew form."""
    m = np.asarray(x.mat if isinstance(x, Frame) else x, dtype=float)
    n = m.shape[0]
    if n % 2:
        raise OddAmbient(f"ambient dimension {n} is odd")
    j = symplectic_j(n // 2)
    return bool(np.max(np.abs(m.T @ j @ m)) <= atol)


def frame_to_json(x):
    """Serialize a frame to a deterministic JSON document (17 significant
    digits, row-major entries)."""
    entries = ", ".join(f"{v:.17g}" for v in x.mat.ravel())
    return (
        f'{{"n": {x.n}, "k": {x.k}, "kind": "{x.kind}", "entries": [{entries}]}}'
    )


def frame_from_json(text):
    try:
        doc = json.loads(text)
        n = int(doc["n"])
        k = int(doc["k"])
        kind = doc["kind"]
        entries = [float(v) for v in doc["entries"]]
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise ValidationError(f"malformed frame document: {exc}") from exc
    if len(entries) != n * k:
        raise ShapeMismatch(f"expected {n * k} entries, got {len(entries)}")
    return Frame(np.array(entries).reshape(n, k), kind)
