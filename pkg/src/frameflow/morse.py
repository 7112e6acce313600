"""Rest-point audit for the frame flows.

Every rest point of the matrix action is a frame of eigenvectors selected
by a word.  This module enumerates the rest points, evaluates closed-form
spectra for the linearized action and for the Hessian of the quadratic
energy at each one, and packages the certificate that the grading
histogram over rest points matches the cell-count polynomial of the frame
space coefficient by coefficient.
"""

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadSizes,
    NonPositiveEigenvalue,
    NotSimpleSpectrum,
    OutOfRange,
    PreconditionViolated,
    ShapeMismatch,
    SizeLimit,
    ValidationError,
    WeightsNotStrict,
)
from .flows import SpectralData, Weights, _retract, default_spectral
from .frames import KIND_ORTHOGONAL, KIND_UNITARY, Frame
from .skeleton import Perm, _conj, _rank, index_h

__all__ = [
    "Certificate",
    "CriticalReport",
    "Polynomial",
    "counting_bijection",
    "counting_inverse",
    "critical_report",
    "eigenframe",
    "fixed_points",
    "hessian_spectrum",
    "jacobian_spectrum",
    "morse_poly",
    "perfectness_certificate",
    "poincare_poly",
]

# paired eigenvalues must multiply to one before the paired action exists
_RECIPROCAL_ATOL = 1e-8


@dataclass(frozen=True)
class Polynomial:
    """Polynomial with nonnegative integer coefficients, constant term first."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(self.coeffs)
        if not c:
            raise ValidationError("a polynomial needs at least one coefficient")
        for v in c:
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)):
                raise ValidationError(f"coefficients must be integers, got {v!r}")
            if v < 0:
                raise ValidationError(f"coefficients must be nonnegative, got {v!r}")
        if len(c) > 1 and c[-1] == 0:
            raise ValidationError("leading coefficient of a nonconstant polynomial is zero")
        object.__setattr__(self, "coeffs", tuple(int(v) for v in c))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    def __call__(self, t):
        out = 0
        for v in reversed(self.coeffs):
            out = out * t + v
        return out


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return tuple(out)


def _check_nk(n, k):
    if not isinstance(n, int) or not isinstance(k, int) or not 1 <= k <= n:
        raise BadSizes(f"need 1 <= k <= n, got n={n!r}, k={k!r}")


def _grading_span(n, k, symplectic):
    # top grading = dimension of the frame space
    return k * (2 * n - k) if symplectic else k * (2 * n - k - 1) // 2


def fixed_points(n, k, symplectic=False, max_points=100000):
    """All rest points of the matrix action on (n, k) frames, as words in
    lexicographic order.

    Raises SizeLimit before enumerating more than max_points words.
    """
    _check_nk(n, k)
    if symplectic:
        count = 1
        for i in range(k):
            count *= 2 * (n - i)
    else:
        count = math.perm(n, k)
    if count > max_points:
        raise SizeLimit(f"{count} rest points exceed the budget of {max_points}")
    top = 2 * n if symplectic else n
    out = []
    for word in itertools.permutations(range(1, top + 1), k):
        if symplectic and len({(v - 1) % n for v in word}) < k:
            continue
        out.append(Perm(n, word, symplectic=symplectic))
    return tuple(out)


def eigenframe(a, p):
    """The frame whose i-th column is the eigenvector selected by word entry i."""
    if not isinstance(a, SpectralData):
        raise ValidationError("eigenframe needs SpectralData")
    if not isinstance(p, Perm):
        raise ValidationError("eigenframe needs a Perm")
    amb = 2 * p.n if p.symplectic else p.n
    if a.n != amb:
        raise ShapeMismatch(f"spectral data is {a.n}-dimensional, the word needs {amb}")
    cols = [v - 1 for v in p.word]
    kind = KIND_UNITARY if p.symplectic else KIND_ORTHOGONAL
    return Frame(a.evecs[:, cols], kind)


def _checked_evals(a, p, reciprocal):
    if not isinstance(a, SpectralData):
        raise ValidationError("expected SpectralData")
    if not isinstance(p, Perm):
        raise ValidationError("expected a Perm")
    amb = 2 * p.n if p.symplectic else p.n
    if a.n != amb:
        raise ShapeMismatch(f"spectral data is {a.n}-dimensional, the word needs {amb}")
    for v in a.evals:
        if v <= 0.0:
            raise NonPositiveEigenvalue(f"eigenvalues must be positive, got {v}")
    if not a.is_simple:
        raise NotSimpleSpectrum("repeated eigenvalue, the rest points degenerate")
    if reciprocal and p.symplectic:
        n = p.n
        for v in range(1, n + 1):
            if abs(a.evals[v - 1] * a.evals[v + n - 1] - 1.0) > _RECIPROCAL_ATOL:
                raise PreconditionViolated(
                    "paired eigenvalues must multiply to one for the paired action"
                )
    return a.evals


def _free_labels(p):
    used = set(p.word)
    if p.symplectic:
        used |= {_conj(v, p.n) for v in p.word}
    amb = 2 * p.n if p.symplectic else p.n
    return [j for j in range(1, amb + 1) if j not in used]


def jacobian_spectrum(a, p):
    """Eigenvalues of the linearized action at the rest point of p.

    Family order: partner flips (paired case, position-ascending), free
    replacements (position-major, label-ascending), in-word switches
    (lexicographic pairs), partner switches (paired case, lexicographic).
    Each entry is a ratio of eigenvalues of a; the count above one equals
    the grading of the word whenever the eigenvalues are rank-descending.
    """
    lam = _checked_evals(a, p, reciprocal=True)
    n, k, word = p.n, p.k, p.word
    out = []
    if p.symplectic:
        out.extend(lam[_conj(v, n) - 1] / lam[v - 1] for v in word)
    free = _free_labels(p)
    for i in range(k):
        li = lam[word[i] - 1]
        out.extend(lam[j - 1] / li for j in free)
    for i in range(k):
        for j in range(i + 1, k):
            out.append(lam[word[j] - 1] / lam[word[i] - 1])
    if p.symplectic:
        for i in range(k):
            for j in range(i + 1, k):
                out.append(lam[_conj(word[j], n) - 1] / lam[word[i] - 1])
    return tuple(out)


def hessian_spectrum(a, b, p):
    """Eigenvalues of the Hessian of the weighted quadratic energy at the
    rest point of p, in the same family order as jacobian_spectrum.

    The energy averages b_i^2 |A x_i|^2 over columns, so every entry is a
    difference of squared eigenvalues scaled by squared weights.  A partner
    switch mixes two column weights; its entry keeps both terms.
    """
    lam = _checked_evals(a, p, reciprocal=False)
    if not isinstance(b, Weights):
        raise ValidationError("expected Weights")
    if b.k != p.k:
        raise ShapeMismatch(f"{b.k} weights cannot scale {p.k} columns")
    if not b.is_strict:
        raise WeightsNotStrict("equal weights flatten the energy along switches")
    n, k, word = p.n, p.k, p.word
    lam2 = [v * v for v in lam]
    b2 = [v * v for v in b.values]
    scale = 2.0 / k
    out = []
    if p.symplectic:
        out.extend(
            scale * b2[i] * (lam2[_conj(v, n) - 1] - lam2[v - 1])
            for i, v in enumerate(word)
        )
    free = _free_labels(p)
    for i in range(k):
        li = lam2[word[i] - 1]
        out.extend(scale * b2[i] * (lam2[j - 1] - li) for j in free)
    for i in range(k):
        for j in range(i + 1, k):
            out.append(scale * (b2[i] - b2[j]) * (lam2[word[j] - 1] - lam2[word[i] - 1]))
    if p.symplectic:
        for i in range(k):
            for j in range(i + 1, k):
                out.append(
                    scale
                    * (
                        b2[i] * (lam2[_conj(word[j], n) - 1] - lam2[word[i] - 1])
                        + b2[j] * (lam2[_conj(word[i], n) - 1] - lam2[word[j] - 1])
                    )
                )
    return tuple(out)


@dataclass(frozen=True)
class CriticalReport:
    """Closed-form audit of one rest point."""

    perm: Perm
    jacobian_eigs: tuple
    hessian_eigs: tuple
    morse_index: int


def critical_report(a, b, p):
    """Spectra and index of the rest point of p; the index counts positive
    Hessian eigenvalues."""
    jac = jacobian_spectrum(a, p)
    hess = hessian_spectrum(a, b, p)
    return CriticalReport(
        perm=p,
        jacobian_eigs=jac,
        hessian_eigs=hess,
        morse_index=sum(1 for v in hess if v > 0.0),
    )


def poincare_poly(n, k, symplectic=False):
    """Cell-count polynomial of the (n, k) frame space: the product of one
    truncated geometric factor per column."""
    _check_nk(n, k)
    coeffs = (1,)
    for i in range(1, k + 1):
        width = 2 * n - 2 * i + 2 if symplectic else n - i + 1
        coeffs = _poly_mul(coeffs, (1,) * width)
    return Polynomial(coeffs)


def morse_poly(n, k, symplectic=False, max_points=100000):
    """Histogram of the grading over all rest points, as a polynomial."""
    pts = fixed_points(n, k, symplectic, max_points)
    coeffs = [0] * (_grading_span(n, k, symplectic) + 1)
    for p in pts:
        coeffs[index_h(p)] += 1
    return Polynomial(tuple(coeffs))


def counting_bijection(n, k, s, symplectic=False):
    """Word whose grading equals sum(s): the i-th letter is the (s_i+1)-th
    smallest available label in the precedence order, where choosing a
    label retires it (and its partner, in the paired case)."""
    _check_nk(n, k)
    s = tuple(s)
    if len(s) != k:
        raise OutOfRange(f"counter needs {k} entries, got {len(s)}")
    amb = 2 * n if symplectic else n
    used = set()
    word = []
    for i, si in enumerate(s, start=1):
        top = 2 * n - 2 * i + 1 if symplectic else n - i
        if isinstance(si, bool) or not isinstance(si, (int, np.integer)):
            raise OutOfRange(f"counter entries must be integers, got {si!r}")
        if not 0 <= si <= top:
            raise OutOfRange(f"entry {i} must lie in 0..{top}, got {si}")
        avail = sorted(
            (v for v in range(1, amb + 1) if v not in used),
            key=lambda v: _rank(v, n),
        )
        v = avail[si]
        word.append(v)
        used.add(v)
        if symplectic:
            used.add(_conj(v, n))
    return Perm(n, tuple(word), symplectic=symplectic)


def counting_inverse(p):
    """Counter of a word: how many still-available labels precede each letter."""
    if not isinstance(p, Perm):
        raise ValidationError("expected a Perm")
    n = p.n
    amb = 2 * n if p.symplectic else n
    used = set()
    out = []
    for v in p.word:
        avail = sorted(
            (u for u in range(1, amb + 1) if u not in used),
            key=lambda u: _rank(u, n),
        )
        out.append(avail.index(v))
        used.add(v)
        if p.symplectic:
            used.add(_conj(v, n))
    return tuple(out)


def _chart_directions(p):
    """Tangent directions at the rest point of p, one per one-dimensional
    stratum through it, in the family order of the spectrum functions.

    Coordinates are in the eigenvector-label basis; switch directions have
    norm sqrt(2) because they parametrize a rotation of two columns."""
    n, k, word = p.n, p.k, p.word
    amb = 2 * n if p.symplectic else n
    eps = lambda v: 1.0 if v <= n else -1.0

    def single(col, label):
        t = np.zeros((amb, k))
        t[label - 1, col] = 1.0
        return t

    dirs = []
    if p.symplectic:
        for i, v in enumerate(word):
            dirs.append(single(i, _conj(v, n)))
    free = _free_labels(p)
    for i in range(k):
        for j in free:
            dirs.append(single(i, j))
    for i in range(k):
        for j in range(i + 1, k):
            t = np.zeros((amb, k))
            t[word[j] - 1, i] = 1.0
            t[word[i] - 1, j] = -1.0
            dirs.append(t)
    if p.symplectic:
        for i in range(k):
            for j in range(i + 1, k):
                cj, ci = _conj(word[j], n), _conj(word[i], n)
                t = np.zeros((amb, k))
                t[cj - 1, i] = 1.0
                # sign keeps the curve inside the isotropic frames
                t[ci - 1, j] = -eps(word[j]) * eps(ci)
                dirs.append(t)
    return dirs


def _numeric_index(a, b, p, step):
    """Count positive second differences of the energy along the chart
    directions; None entries never occur, a flat direction counts as
    nonpositive."""
    v = eigenframe(a, p)
    amat2 = (a.evecs * np.square(a.evals)) @ a.evecs.T
    bv = np.asarray(b.values)

    def energy(m):
        w = m * bv
        return float(np.tensordot(amat2 @ w, w)) / p.k

    f0 = energy(v.mat)
    idx = 0
    for t in _chart_directions(p):
        d = a.evecs @ t
        plus = energy(_retract(v.mat + step * d, v.kind))
        minus = energy(_retract(v.mat - step * d, v.kind))
        if plus - 2.0 * f0 + minus > 0.0:
            idx += 1
    return idx


@dataclass(frozen=True)
class Certificate:
    """Perfectness audit: grading histogram vs cell-count polynomial, with a
    per-rest-point index cross-check."""

    n: int
    k: int
    symplectic: bool
    morse: Polynomial
    poincare: Polynomial
    match: bool
    reports: tuple
    numeric: tuple  # numeric indices aligned with reports, or None

    def _rows(self):
        rows = []
        for pos, rep in enumerate(self.reports):
            h = index_h(rep.perm)
            above = sum(1 for v in rep.jacobian_eigs if v > 1.0)
            num = None if self.numeric is None else self.numeric[pos]
            ok = rep.morse_index == h == above and (num is None or num == h)
            rows.append((rep.perm.word, h, rep.morse_index, above, num, ok))
        return rows

    def to_json(self):
        per_point = [
            {
                "word": list(word),
                "h": h,
                "morse_index": mi,
                "jacobian_above_one": above,
                "numeric_index": num,
                "ok": ok,
            }
            for word, h, mi, above, num, ok in self._rows()
        ]
        blob = {
            "n": self.n,
            "k": self.k,
            "symplectic": self.symplectic,
            "morse_coeffs": list(self.morse.coeffs),
            "poincare_coeffs": list(self.poincare.coeffs),
            "match": self.match,
            "per_point": per_point,
        }
        return json.dumps(blob, indent=2, sort_keys=True) + "\n"

    def csv_lines(self):
        lines = ["word,h,morse_index,jacobian_above_one,numeric_index,ok"]
        for word, h, mi, above, num, ok in self._rows():
            label = "(" + " ".join(str(v) for v in word) + ")"
            numtxt = "" if num is None else str(num)
            lines.append(f"{label},{h},{mi},{above},{numtxt},{str(ok).lower()}")
        return lines


def perfectness_certificate(
    n,
    k,
    symplectic=False,
    spectral=None,
    weights=None,
    numeric=None,
    step=1e-4,
    max_points=100000,
):
    """Audit every rest point of the (n, k) frame space and certify that the
    grading histogram equals the cell-count polynomial.

    numeric=None enables the finite-difference index cross-check at desk
    scale (n <= 4, or n <= 2 in the paired case) and skips it above that.
    A repeated eigenvalue in spectral aborts with NotSimpleSpectrum.
    """
    pts = fixed_points(n, k, symplectic, max_points)
    a = default_spectral(n, symplectic) if spectral is None else spectral
    b = Weights(tuple((k - i) / k for i in range(k))) if weights is None else weights
    if numeric is None:
        numeric = n <= 2 if symplectic else n <= 4
    reports = tuple(critical_report(a, b, p) for p in pts)
    nums = tuple(_numeric_index(a, b, p, step) for p in pts) if numeric else None
    morse = morse_poly(n, k, symplectic, max_points)
    poincare = poincare_poly(n, k, symplectic)
    cert = Certificate(
        n=n,
        k=k,
        symplectic=bool(symplectic),
        morse=morse,
        poincare=poincare,
        match=False,
        reports=reports,
        numeric=nums,
    )
    ok = morse == poincare and all(row[5] for row in cert._rows())
    object.__setattr__(cert, "match", ok)
    return cert
