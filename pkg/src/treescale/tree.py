"""The legally coloured d-regular tree.

A vertex is a reduced word in the colours (no letter repeated twice in a
row); the empty word is the root.  The edge between ``w`` and ``w + (a,)``
has colour ``a`` in both directions, so the colouring is implicit.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

Vertex = tuple  # tuple[int, ...], kept loose for speed
ROOT: Vertex = ()


def neighbour(v: Vertex, a: int) -> Vertex:
    if v and v[-1] == a:
        return v[:-1]
    return v + (a,)


def neighbours(v: Vertex, d: int) -> list[Vertex]:
    return [neighbour(v, a) for a in range(d)]


def edge_colour(u: Vertex, v: Vertex) -> int:
    """Colour of the edge between adjacent vertices ``u`` and ``v``."""
    if len(v) == len(u) + 1 and v[:-1] == u:
        return v[-1]
    if len(u) == len(v) + 1 and u[:-1] == v:
        return u[-1]
    raise ValueError(f"{format_vertex(u)} and {format_vertex(v)} are not adjacent")


def is_reduced(word: Iterable[int]) -> bool:
    prev = None
    for a in word:
        if a == prev:
            return False
        prev = a
    return True


def parse_vertex(text: str, d: int) -> Vertex:
    text = text.strip()
    if text in ("-", ""):
        return ROOT
    if not text.isdigit():
        raise ValueError(f"bad vertex address {text!r}")
    word = tuple(int(ch) for ch in text)
    if any(a >= d for a in word):
        raise ValueError(f"colour out of range in {text!r} (degree {d})")
    if not is_reduced(word):
        raise ValueError(f"address {text!r} is not reduced")
    return word


def format_vertex(v: Vertex) -> str:
    return "".join(str(a) for a in v) if v else "-"


def _common_prefix(u: Vertex, v: Vertex) -> int:
    n = min(len(u), len(v))
    i = 0
    while i < n and u[i] == v[i]:
        i += 1
    return i


def distance(u: Vertex, v: Vertex) -> int:
    k = _common_prefix(u, v)
    return len(u) + len(v) - 2 * k


def geodesic(u: Vertex, v: Vertex) -> list[Vertex]:
    """Vertices of the unique reduced path from ``u`` to ``v``, both included."""
    k = _common_prefix(u, v)
    path = [u[:i] for i in range(len(u), k - 1, -1)]
    path.extend(v[:i] for i in range(k + 1, len(v) + 1))
    return path


def step_towards(u: Vertex, v: Vertex) -> Vertex:
    """The neighbour of ``u`` on the geodesic to ``v`` (``u != v``)."""
    k = _common_prefix(u, v)
    if k < len(u):
        return u[:-1]
    return v[: len(u) + 1]


def point_at(u: Vertex, v: Vertex, t: int) -> Vertex:
    """The vertex at distance ``t`` from ``u`` along the geodesic to ``v``."""
    k = _common_prefix(u, v)
    up = len(u) - k
    if t <= up:
        return u[: len(u) - t]
    return v[: k + (t - up)]


def sphere_size(d: int, k: int) -> int:
    """Number of vertices at distance ``k`` from a fixed edge."""
    if d < 3:
        raise ValueError("degree must be at least 3")
    return 2 * (d - 1) ** k


def ball(center: Vertex, r: int, d: int) -> list[Vertex]:
    out = [center]
    frontier = [(center, None)]
    for _ in range(r):
        nxt = []
        for v, came in frontier:
            for a in range(d):
                w = neighbour(v, a)
                if w != came:
                    out.append(w)
                    nxt.append((w, v))
        frontier = nxt
    return out


@dataclass(frozen=True)
class EdgeRef:
    origin: Vertex
    colour: int

    @property
    def target(self) -> Vertex:
        return neighbour(self.origin, self.colour)

    def reverse(self) -> EdgeRef:
        return EdgeRef(self.target, self.colour)

    @classmethod
    def between(cls, u: Vertex, v: Vertex) -> EdgeRef:
        return cls(u, edge_colour(u, v))

    def ends(self) -> tuple[Vertex, Vertex]:
        return self.origin, self.target


@dataclass(frozen=True)
class CompleteSubtree:
    """A finite subtree in which every vertex has full valency or valency one."""

    vertices: frozenset
    degree: int
    internal: frozenset = field(default=frozenset(), compare=False)

    def __post_init__(self):
        d = self.degree
        internal = frozenset(v for v in self.vertices
                             if all(neighbour(v, a) in self.vertices for a in range(d)))
        object.__setattr__(self, "internal", internal)

    def __contains__(self, v: object) -> bool:
        return v in self.vertices

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self) -> Iterator[Vertex]:
        return iter(sorted(self.vertices, key=lambda v: (len(v), v)))

    @property
    def leaves(self) -> frozenset:
        return self.vertices - self.internal

    def valency(self, v: Vertex) -> int:
        return sum(1 for a in range(self.degree) if neighbour(v, a) in self.vertices)

    def is_valid(self) -> bool:
        if not self.vertices:
            return False
        if len(self.vertices) > 1:
            for v in self.vertices:
                k = self.valency(v)
                if k != 1 and k != self.degree:
                    return False
        # connectivity
        start = next(iter(self.vertices))
        seen = {start}
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for a in range(self.degree):
                w = neighbour(v, a)
                if w in self.vertices and w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == len(self.vertices)

    def union(self, other: CompleteSubtree) -> CompleteSubtree:
        return complete_hull(self.vertices | other.vertices, self.degree)

    def project(self, v: Vertex) -> Vertex:
        return projection_to_subtree(v, self)

    def image(self, f) -> CompleteSubtree:
        return CompleteSubtree(frozenset(f(v) for v in self.vertices), self.degree)


def internal_vertices(t: CompleteSubtree) -> frozenset:
    return t.internal


def convex_hull(points: Iterable[Vertex]) -> set:
    pts = list(points)
    if not pts:
        return set()
    base = pts[0]
    hull = {base}
    for p in pts[1:]:
        hull.update(geodesic(base, p))
    return hull


def complete_hull(points: Iterable[Vertex], d: int) -> CompleteSubtree:
    """Smallest complete subtree containing ``points``."""
    hull = convex_hull(points)
    if not hull:
        raise ValueError("complete_hull of an empty set")
    extra = set()
    for v in hull:
        nb = [neighbour(v, a) for a in range(d)]
        if sum(1 for w in nb if w in hull) >= 2:
            extra.update(nb)
    return CompleteSubtree(frozenset(hull | extra), d)


def star(v: Vertex, d: int) -> CompleteSubtree:
    return CompleteSubtree(frozenset([v, *neighbours(v, d)]), d)


def edge_subtree(e: EdgeRef, d: int) -> CompleteSubtree:
    return CompleteSubtree(frozenset(e.ends()), d)


def projection_to_subtree(v: Vertex, t: CompleteSubtree) -> Vertex:
    """The unique vertex of ``t`` closest to ``v``."""
    if v in t.vertices:
        return v
    anchor = next(iter(t.vertices))
    for w in geodesic(v, anchor):
        if w in t.vertices:
            return w
    raise AssertionError("unreachable: anchor lies in the subtree")
