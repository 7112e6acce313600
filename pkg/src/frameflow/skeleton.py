"""Oriented skeleton of the stratified frame space.

Zero-dimensional strata are named by injective words over the
eigendirection labels; one-dimensional strata join exactly the pairs of
words that differ by one elementary move.  Reading each one-dimensional
stratum as an arrow from its repelling end to its attracting end turns
the collection into a finite acyclic graph whose grading by incoming
edges doubles as a combinatorial index of the corresponding rest point.

Labels follow the circular precedence 1, 2, ..., n, 2n, 2n-1, ..., n+1
in the paired (symplectic) setting; in the plain setting the precedence
is just the usual order on 1..n.
"""

import itertools
import json
import math
from dataclasses import dataclass

from .errors import (
    BadSizes,
    Inconsistent,
    NotLinked,
    ShapeMismatch,
    SizeLimit,
    ValidationError,
)
from .strata import Tree, is_consistent

__all__ = [
    "Perm",
    "SkeletonGraph",
    "build_graph",
    "index_h",
    "leads_to",
    "linked",
    "one_dim_strata",
    "precedes",
    "singleton_tree",
    "tree_bounds",
]


def _conj(v, n):
    return v + n if v <= n else v - n


def _rank(v, n):
    # position of v in the precedence 1,...,n,2n,...,n+1; identity below n
    return v if v <= n else 3 * n + 1 - v


@dataclass(frozen=True)
class Perm:
    """Injective word picking one eigendirection per frame column.

    Plain words use labels 1..n, all distinct.  Paired words use labels
    1..2n where label v+n marks the partner of direction v, and no two
    entries may name the same partner class.
    """

    n: int
    word: tuple
    symplectic: bool = False

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValidationError(f"need a positive label count, got {self.n!r}")
        word = tuple(int(v) for v in self.word)
        object.__setattr__(self, "word", word)
        if not word:
            raise ValidationError("empty word")
        top = 2 * self.n if self.symplectic else self.n
        for v in word:
            if not 1 <= v <= top:
                raise ValidationError(f"entry {v} outside 1..{top}")
        if self.symplectic:
            classes = {(v - 1) % self.n for v in word}
        else:
            classes = set(word)
        if len(classes) != len(word):
            raise ValidationError(f"colliding entries in {word}")

    @property
    def k(self):
        return len(self.word)

    def __repr__(self):
        tag = ", symplectic=True" if self.symplectic else ""
        return f"Perm({self.n}, {self.word}{tag})"


def _check_pair(p, q):
    if not isinstance(p, Perm) or not isinstance(q, Perm):
        raise ValidationError("expected a pair of word vertices")
    if p.n != q.n or p.k != q.k or p.symplectic != q.symplectic:
        raise ShapeMismatch(
            f"incomparable vertices: ({p.n},{p.k},{p.symplectic}) "
            f"vs ({q.n},{q.k},{q.symplectic})"
        )


def linked(p, q):
    """Whether two distinct vertices lie on a common one-dimensional stratum.

    That happens exactly when the words differ in one position, or in two
    positions by switching the entries, or (paired case only) in two
    positions by switching and partner-flipping both entries.
    """
    _check_pair(p, q)
    diff = [i for i in range(p.k) if p.word[i] != q.word[i]]
    if len(diff) == 1:
        return True
    if len(diff) != 2:
        return False
    i, j = diff
    if (q.word[i], q.word[j]) == (p.word[j], p.word[i]):
        return True
    if p.symplectic:
        flipped = (_conj(p.word[j], p.n), _conj(p.word[i], p.n))
        return (q.word[i], q.word[j]) == flipped
    return False


def leads_to(p, q):
    """Orientation of the stratum joining two linked vertices.

    True when the connecting flow line leaves p and lands on q; exactly
    one of leads_to(p, q), leads_to(q, p) holds for each linked pair.
    """
    if not linked(p, q):
        raise NotLinked(f"{p.word} and {q.word} are not linked")
    i = next(m for m in range(p.k) if p.word[m] != q.word[m])
    return _rank(p.word[i], p.n) < _rank(q.word[i], p.n)


def precedes(p, q):
    """Covering relation of the reachability order: an ascending link whose
    grading rises by exactly one, leaving no room for a vertex in between.

    A replacement of a at position i by b costs 1 plus one per free label
    strictly between a and b plus two per later word entry strictly between,
    and a switch costs 1 plus two per in-between position holding an
    in-between value, so the unit-cost moves are the covering pairs.

    Returns False (never raises) when the pair is not an ascending link.
    """
    _check_pair(p, q)
    if p.word == q.word or not linked(p, q) or not leads_to(p, q):
        return False
    return index_h(q) == index_h(p) + 1


def index_h(p):
    """Combinatorial grading of a vertex; equals its number of incoming
    edges in the skeleton graph."""
    n, k, word = p.n, p.k, p.word
    r = [_rank(v, n) for v in word]
    total = sum(1 for i in range(k) for j in range(i + 1, k) if r[i] > r[j])
    if not p.symplectic:
        free = set(range(1, n + 1)) - set(word)
        return total + sum(1 for v in word for j in free if v > j)
    used = set(word) | {_conj(v, n) for v in word}
    free = [_rank(j, n) for j in range(1, 2 * n + 1) if j not in used]
    total += sum(1 for v in word if _rank(v, n) > _rank(_conj(v, n), n))
    total += sum(1 for rv in r for fj in free if rv > fj)
    total += sum(
        1
        for i in range(k)
        for j in range(i + 1, k)
        if r[i] > _rank(_conj(word[j], n), n)
    )
    return total


def _ascents(p):
    """Words of every vertex one ascending move away from p."""
    n, k, word = p.n, p.k, p.word
    out = set()
    if p.symplectic:
        used = set(word) | {_conj(v, n) for v in word}
        free = [j for j in range(1, 2 * n + 1) if j not in used]
    else:
        free = [j for j in range(1, n + 1) if j not in set(word)]
    for i, v in enumerate(word):
        rv = _rank(v, n)
        if p.symplectic and rv < _rank(_conj(v, n), n):
            out.add(word[:i] + (_conj(v, n),) + word[i + 1 :])
        for j in free:
            if rv < _rank(j, n):
                out.add(word[:i] + (j,) + word[i + 1 :])
    for i in range(k):
        for j in range(i + 1, k):
            if _rank(word[i], n) < _rank(word[j], n):
                w = list(word)
                w[i], w[j] = w[j], w[i]
                out.add(tuple(w))
            if p.symplectic and _rank(word[i], n) < _rank(_conj(word[j], n), n):
                w = list(word)
                w[i], w[j] = _conj(word[j], n), _conj(word[i], n)
                out.add(tuple(w))
    return out


@dataclass(frozen=True)
class SkeletonGraph:
    """Oriented graph whose vertices are injective words and whose edges
    are the one-dimensional strata joining them, pointed along the flow."""

    n: int
    k: int
    symplectic: bool
    vertices: tuple
    edges: tuple  # (tail, head) indices into vertices
    h: tuple  # per-vertex grading, equal to the incoming-edge count

    def to_dot(self):
        names = [" ".join(str(v) for v in p.word) for p in self.vertices]
        lines = ["digraph skeleton {"]
        for name, grade in zip(names, self.h):
            lines.append(f'  "({name})" [label="({name}) [H={grade}]"];')
        for a, b in self.edges:
            lines.append(f'  "({names[a]})" -> "({names[b]})";')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self):
        blob = {
            "n": self.n,
            "k": self.k,
            "symplectic": self.symplectic,
            "vertices": [list(p.word) for p in self.vertices],
            "edges": [list(e) for e in self.edges],
            "index": list(self.h),
        }
        return json.dumps(blob, indent=2, sort_keys=True) + "\n"


def build_graph(n, k, symplectic=False, max_vertices=100000):
    """Assemble the full skeleton graph on length-k words.

    Vertices are sorted by word; each edge appears once, tail first.  A
    SizeLimit is raised before enumeration whenever the vertex count
    would exceed max_vertices.
    """
    if not isinstance(n, int) or not isinstance(k, int) or not 1 <= k <= n:
        raise BadSizes(f"need 1 <= k <= n, got n={n!r}, k={k!r}")
    if symplectic:
        count = 1
        for i in range(k):
            count *= 2 * (n - i)
    else:
        count = math.perm(n, k)
    if count > max_vertices:
        raise SizeLimit(f"{count} vertices exceed the budget of {max_vertices}")
    top = 2 * n if symplectic else n
    words = []
    for word in itertools.permutations(range(1, top + 1), k):
        if symplectic and len({(v - 1) % n for v in word}) < k:
            continue
        words.append(word)
    vertices = tuple(Perm(n, w, symplectic=symplectic) for w in words)
    where = {w: i for i, w in enumerate(words)}
    edges = []
    for idx, p in enumerate(vertices):
        edges.extend((idx, where[w]) for w in sorted(_ascents(p)))
    grades = [0] * len(vertices)
    for _, head in edges:
        grades[head] += 1
    return SkeletonGraph(n, k, symplectic, vertices, tuple(edges), tuple(grades))


def singleton_tree(p):
    """Zero-dimensional stratum through a single vertex."""
    return Tree(p.n, [{v} for v in p.word], symplectic=p.symplectic)


def one_dim_strata(p, q):
    """The one-dimensional stratum joining two linked vertices: each node
    collects the entries the two words show at that position."""
    if not linked(p, q):
        raise NotLinked(f"{p.word} and {q.word} are not linked")
    return Tree(p.n, [{a, b} for a, b in zip(p.word, q.word)], symplectic=p.symplectic)


def tree_bounds(t):
    """Least and greatest vertices of a stratum in the reachability order.

    Both are produced by a greedy pass: each position takes the extreme
    admissible label of its node, skipping labels (and, in the paired
    case, partners of labels) already placed earlier in the same bound.
    """
    if not isinstance(t, Tree):
        raise ValidationError("expected a stratum tree")
    if not is_consistent(t):
        raise Inconsistent("empty stratum has no extreme vertices")
    return _extreme(t, min), _extreme(t, max)


def _extreme(t, pick):
    n = t.n
    word = []
    for part in t.sets:
        used = set(word)
        if t.symplectic:
            used |= {_conj(v, n) for v in word}
        avail = [v for v in part if v not in used]
        if not avail:
            raise Inconsistent("empty stratum has no extreme vertices")
        word.append(pick(avail, key=lambda v: _rank(v, n)))
    return Perm(n, tuple(word), symplectic=t.symplectic)
