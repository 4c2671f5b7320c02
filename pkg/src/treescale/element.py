"""Tree automorphisms with prescribed local actions.

An element is a signed word of *letters*.  A letter is an automorphism that
can be evaluated exactly at any vertex:

* ``Portrait``: finitely many prescribed local actions on a complete subtree,
  extended outwards by the lexicographically least admissible local action.
  Leaves of the subtree may hand their whole branch over to another element
  (a "tail"); this is how spliced elements are built.
* ``PathTranslation``: a unit translation along a bi-infinite path whose
  colours repeat periodically in each direction.

Words are applied right to left: the last letter acts first.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .perm import CapExceeded, Perm, PermGroup
from .tree import (
    ROOT,
    CompleteSubtree,
    EdgeRef,
    Vertex,
    ball,
    distance,
    edge_colour,
    format_vertex,
    geodesic,
    neighbour,
    point_at,
    star,
    step_towards,
)


class InconsistentPortrait(ValueError):
    pass


class NotInGroup(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Ambient:
    """The pair (F, F') with F' already cut down to F' ∩ F̂."""

    degree: int
    F: PermGroup
    Fprime: PermGroup
    Fhat: PermGroup
    trimmed: bool = False

    @classmethod
    def make(cls, F: PermGroup, Fprime: PermGroup | None = None) -> Ambient:
        if F.degree < 3:
            raise ValueError("tree degree must be at least 3")
        fhat = F.young_subgroup()
        if Fprime is None:
            Fprime = F
        if not F.issubset(Fprime):
            raise ValueError("F is not contained in F'")
        cut = Fprime.intersection(fhat)
        return cls(F.degree, F, cut, fhat, trimmed=cut.order != Fprime.order)

    def identity(self) -> Perm:
        return Perm.identity(self.degree)


# ---- letters --------------------------------------------------------------

class Letter:
    ambient: Ambient

    def image(self, x: Vertex) -> Vertex:
        raise NotImplementedError

    def local(self, x: Vertex) -> Perm:
        raise NotImplementedError

    def preimage(self, y: Vertex) -> Vertex:
        raise NotImplementedError

    def singular_candidates(self) -> frozenset:
        """A finite superset of the vertices whose local action is outside F."""
        raise NotImplementedError

    def anchor(self) -> Vertex:
        raise NotImplementedError


class Portrait(Letter):
    def __init__(self, ambient: Ambient, base: Vertex, image: Vertex, support: CompleteSubtree,
                 locals_: Mapping[Vertex, Perm], tails: Mapping[Vertex, "Elem"] | None = None):
        self.ambient = ambient
        self.base = base
        self.image_of_base = image
        self.support = support
        self.locals = {v: Perm(p) for v, p in locals_.items()}
        self.tails = dict(tails or {})
        self._img: dict = {}
        self._loc: dict = {}
        self._pre: dict = {}
        self._cand: frozenset | None = None
        self._check()

    def anchor(self) -> Vertex:
        return self.base

    def _check(self):
        A, d = self.support, self.ambient.degree
        if self.base not in A:
            raise InconsistentPortrait("base vertex is not in the support")
        if set(self.locals) != set(A.vertices):
            raise InconsistentPortrait("locals must be given exactly on the support")
        for v, p in self.locals.items():
            if len(p) != d or not p.is_valid():
                raise InconsistentPortrait(f"bad permutation at {format_vertex(v)}")
            if p not in self.ambient.Fhat:
                raise NotInGroup(f"local action at {format_vertex(v)} does not preserve F-orbits")
            if p not in self.ambient.Fprime:
                raise NotInGroup(f"local action at {format_vertex(v)} is not in F'")
        for v in A.vertices:
            for a in range(d):
                w = neighbour(v, a)
                if w in A and self.locals[v][a] != self.locals[w][a]:
                    raise InconsistentPortrait(
                        f"locals disagree on edge {format_vertex(v)}--{format_vertex(w)}")
        for w, x in self.tails.items():
            if w not in A.leaves or w == self.base:
                raise InconsistentPortrait("tails may only hang from leaves other than the base")
            if x.eval(w) != self.image(w) or x.local(w) != self.locals[w]:
                raise InconsistentPortrait(f"tail at {format_vertex(w)} does not match")

    def _tail_for(self, path: Sequence[Vertex]):
        """If the path from the base leaves the support through a tail, return it."""
        A = self.support.vertices
        for i, v in enumerate(path):
            if v not in A:
                return self.tails.get(path[i - 1])
        return None

    def _walk(self, x: Vertex):
        if x in self._img:
            return
        path = geodesic(self.base, x)
        tail = self._tail_for(path) if self.tails else None
        if tail is not None:
            self._img[x] = tail.eval(x)
            self._loc[x] = tail.local(x)
            return
        # resume from the deepest memoised vertex on the path
        start = len(path) - 1
        while start > 0 and path[start] not in self._img:
            start -= 1
        if start == 0:
            self._img[self.base] = self.image_of_base
            self._loc[self.base] = self.locals[self.base]
        A, F = self.support.vertices, self.ambient.F
        cur, img, loc = path[start], self._img[path[start]], self._loc[path[start]]
        for y in path[start + 1:]:
            c = edge_colour(cur, y)
            a = loc[c]
            img = neighbour(img, a)
            if y in A:
                loc = self.locals[y]
            else:
                loc = F.minimal_map(c, a)
                if loc is None:
                    raise NotInGroup("default extension impossible: colours in different F-orbits")
            self._img[y], self._loc[y] = img, loc
            cur = y

    def image(self, x: Vertex) -> Vertex:
        self._walk(x)
        return self._img[x]

    def local(self, x: Vertex) -> Perm:
        self._walk(x)
        return self._loc[x]

    def preimage(self, y: Vertex) -> Vertex:
        hit = self._pre.get(y)
        if hit is not None:
            return hit
        A, F = self.support.vertices, self.ambient.F
        ipath = geodesic(self.image_of_base, y)
        cur, loc = self.base, self.locals[self.base]
        for i in range(1, len(ipath)):
            c_img = edge_colour(ipath[i - 1], ipath[i])
            b = loc.inverse()[c_img]
            nxt = neighbour(cur, b)
            if nxt not in A and cur in self.tails:
                x = self.tails[cur].inverse().eval(y)
                self._pre[y] = x
                return x
            loc = self.locals[nxt] if nxt in A else F.minimal_map(b, c_img)
            cur = nxt
            self._img.setdefault(cur, ipath[i])
            self._loc.setdefault(cur, loc)
        self._pre[y] = cur
        return cur

    def in_tail_branch(self, w: Vertex, z: Vertex) -> bool:
        if z == w:
            return True
        return z not in self.support and w in geodesic(self.base, z)

    def singular_candidates(self) -> frozenset:
        if self._cand is None:
            cand = set(self.support.vertices)
            for w, x in self.tails.items():
                cand.update(z for z in x.singularities() if self.in_tail_branch(w, z))
            self._cand = frozenset(cand)
        return self._cand


class PathTranslation(Letter):
    """Unit translation along a periodic bi-infinite path, with F-valued locals.

    The path runs through ``base``; going forward the edge colours repeat
    ``forward``, going backward they repeat ``backward``.  On the path the
    local action is the least element of F carrying the incoming and outgoing
    colours to the next pair; off the path the default extension applies.
    """

    def __init__(self, ambient: Ambient, base: Vertex, backward: Sequence[int],
                 forward: Sequence[int]):
        self.ambient = ambient
        self.base = base
        self.backward = tuple(backward)
        self.forward = tuple(forward)
        self._check()
        self._pts: dict[int, Vertex] = {0: base}
        self._axis_local: dict[int, Perm] = {}
        self._img: dict = {}
        self._loc: dict = {}
        self._pre: dict = {}

    def anchor(self) -> Vertex:
        return self.base

    def _check(self):
        f, b, d = self.forward, self.backward, self.ambient.degree
        if not f or not b:
            raise ValueError("colour cycles must be non-empty")
        if any(not 0 <= c < d for c in f + b):
            raise ValueError("colour out of range")
        for cyc in (f, b):
            if any(cyc[i] == cyc[(i + 1) % len(cyc)] for i in range(len(cyc))):
                raise ValueError("colour cycle repeats a colour consecutively")
        if f[0] == b[0]:
            raise ValueError("path backtracks at the base")

    def colour(self, t: int) -> int:
        """Colour of the edge between path positions t and t+1."""
        if t >= 0:
            return self.forward[t % len(self.forward)]
        return self.backward[(-t - 1) % len(self.backward)]

    def point(self, t: int) -> Vertex:
        pts = self._pts
        if t in pts:
            return pts[t]
        if t > 0:
            k = max(pts)
            v = pts[k]
            for i in range(k, t):
                v = neighbour(v, self.colour(i))
                pts[i + 1] = v
        else:
            k = min(pts)
            v = pts[k]
            for i in range(k, t, -1):
                v = neighbour(v, self.colour(i - 1))
                pts[i - 1] = v
        return pts[t]

    def axis_local(self, t: int) -> Perm:
        hit = self._axis_local.get(t)
        if hit is None:
            pins = [(self.colour(t - 1), self.colour(t)), (self.colour(t), self.colour(t + 1))]
            cands = self.ambient.F.maps_with_pins(pins)
            if not cands:
                raise NotInGroup("F cannot realise a translation along this path")
            hit = self._axis_local[t] = cands[0]
        return hit

    def locate(self, u: Vertex) -> tuple[int, Vertex]:
        """Position of the projection of ``u`` onto the path, and that projection."""
        path = geodesic(self.base, u)
        if len(path) == 1:
            return 0, self.base
        first = edge_colour(path[0], path[1])
        if first == self.forward[0]:
            sign = 1
        elif first == self.backward[0]:
            sign = -1
        else:
            return 0, self.base
        t = 0
        for i in range(1, len(path)):
            c = edge_colour(path[i - 1], path[i])
            expect = self.colour(t) if sign > 0 else self.colour(t - 1)
            if c != expect:
                break
            t += sign
        return t, self.point(t)

    def _walk_off(self, start: Vertex, start_img: Vertex, start_loc: Perm, x: Vertex):
        F = self.ambient.F
        cur, img, loc = start, start_img, start_loc
        for y in geodesic(start, x)[1:]:
            c = edge_colour(cur, y)
            a = loc[c]
            img = neighbour(img, a)
            loc = F.minimal_map(c, a)
            self._img[y], self._loc[y] = img, loc
            cur = y

    def image(self, x: Vertex) -> Vertex:
        if x not in self._img:
            t, p = self.locate(x)
            self._img[p], self._loc[p] = self.point(t + 1), self.axis_local(t)
            self._walk_off(p, self._img[p], self._loc[p], x)
        return self._img[x]

    def local(self, x: Vertex) -> Perm:
        self.image(x)
        return self._loc[x]

    def preimage(self, y: Vertex) -> Vertex:
        hit = self._pre.get(y)
        if hit is not None:
            return hit
        F = self.ambient.F
        t, p = self.locate(y)
        cur, loc = self.point(t - 1), self.axis_local(t - 1)
        ipath = geodesic(p, y)
        for i in range(1, len(ipath)):
            c_img = edge_colour(ipath[i - 1], ipath[i])
            b = loc.inverse()[c_img]
            cur = neighbour(cur, b)
            loc = F.minimal_map(b, c_img)
        self._pre[y] = cur
        return cur

    def singular_candidates(self) -> frozenset:
        return frozenset()


# ---- elements -------------------------------------------------------------

@dataclass(frozen=True)
class Classification:
    kind: str  # "elliptic" or "hyperbolic"
    length: int
    axis_base: Vertex | None = None
    fixed_vertex: Vertex | None = None
    inverted_edge: EdgeRef | None = None

    @property
    def hyperbolic(self) -> bool:
        return self.kind == "hyperbolic"


@dataclass(frozen=True)
class EndHandle:
    """The attracting (+1) or repelling (-1) end of a hyperbolic element."""

    carrier: "Elem"
    sign: int = 1


class Elem:
    """A product ``L1^s1 * ... * Ln^sn`` of letters; ``Ln^sn`` acts first."""

    def __init__(self, ambient: Ambient, word: Iterable[tuple[Letter, int]] = (), name: str = ""):
        self.ambient = ambient
        self.word = tuple((letter, 1 if s > 0 else -1) for letter, s in word)
        self.name = name
        self._img: dict = {}
        self._loc: dict = {}
        self._cls: Classification | None = None
        self._sing: frozenset | None = None
        self._inverse: Elem | None = None
        self._axis_seg: list | None = None
        self._axis_pts: dict = {}

    # -- construction
    @classmethod
    def identity(cls, ambient: Ambient) -> Elem:
        return cls(ambient, ())

    def __mul__(self, other: Elem) -> Elem:
        return Elem(self.ambient, self.word + other.word)

    def inverse(self) -> Elem:
        if self._inverse is None:
            inv = Elem(self.ambient, [(l, -s) for l, s in reversed(self.word)])
            inv._inverse = self
            self._inverse = inv
        return self._inverse

    def power(self, n: int) -> Elem:
        if n < 0:
            return self.inverse().power(-n)
        return Elem(self.ambient, self.word * n)

    def conjugate(self, x: Elem) -> Elem:
        """``x * self * x^-1``."""
        return x * self * x.inverse()

    # -- evaluation
    def eval(self, v: Vertex) -> Vertex:
        hit = self._img.get(v)
        if hit is not None:
            return hit
        x = v
        for letter, s in reversed(self.word):
            x = letter.image(x) if s > 0 else letter.preimage(x)
        self._img[v] = x
        return x

    def local(self, v: Vertex) -> Perm:
        hit = self._loc.get(v)
        if hit is not None:
            return hit
        sigma = self.ambient.identity()
        x = v
        for letter, s in reversed(self.word):
            if s > 0:
                sigma = letter.local(x) * sigma
                x = letter.image(x)
            else:
                y = letter.preimage(x)
                sigma = letter.local(y).inverse() * sigma
                x = y
        self._loc[v] = sigma
        self._img[v] = x
        return sigma

    def eval_power(self, v: Vertex, n: int) -> Vertex:
        step = self if n >= 0 else self.inverse()
        for _ in range(abs(n)):
            v = step.eval(v)
        return v

    def local_power(self, v: Vertex, n: int) -> Perm:
        """sigma(g^n, v) through the cocycle identity."""
        step = self if n >= 0 else self.inverse()
        sigma = self.ambient.identity()
        for _ in range(abs(n)):
            sigma = step.local(v) * sigma
            v = step.eval(v)
        return sigma

    def anchor(self) -> Vertex:
        return self.word[0][0].anchor() if self.word else ROOT

    # -- geometry
    def classify(self) -> Classification:
        if self._cls is None:
            self._cls = self._classify()
        return self._cls

    def _classify(self) -> Classification:
        v = self.anchor()
        m = distance(v, self.eval(v))
        while m >= 2:
            mid = point_at(v, self.eval(v), m // 2)
            m2 = distance(mid, self.eval(mid))
            if m2 >= m:
                break
            v, m = mid, m2
        if m == 0:
            return Classification("elliptic", 0, fixed_vertex=v)
        gv = self.eval(v)
        if m == 1 and self.eval(gv) == v:
            return Classification("elliptic", 0, inverted_edge=EdgeRef.between(v, gv))
        return Classification("hyperbolic", m, axis_base=v)

    @property
    def is_hyperbolic(self) -> bool:
        return self.classify().hyperbolic

    @property
    def length(self) -> int:
        return self.classify().length

    def _require_hyperbolic(self) -> Classification:
        c = self.classify()
        if not c.hyperbolic:
            raise ValueError("element is not hyperbolic")
        return c

    def dist_to_axis(self, v: Vertex) -> int:
        l = self._require_hyperbolic().length
        m = distance(v, self.eval(v)) - l
        if m < 0 or m % 2:
            raise AssertionError("displacement parity violated")
        return m // 2

    def project_to_axis(self, v: Vertex) -> Vertex:
        k = self.dist_to_axis(v)
        return point_at(v, self.eval(v), k) if k else v

    def axis_point(self, t: int) -> Vertex:
        """The axis vertex at signed position ``t`` from the axis base."""
        hit = self._axis_pts.get(t)
        if hit is not None:
            return hit
        c = self._require_hyperbolic()
        l = c.length
        if self._axis_seg is None:
            self._axis_seg = geodesic(c.axis_base, self.eval(c.axis_base))
        q, r = divmod(t, l)
        v = self.eval_power(self._axis_seg[r], q)
        self._axis_pts[t] = v
        return v

    def axis_position(self, x: Vertex) -> int:
        """Signed position of an axis vertex; positive means towards the attracting end."""
        c = self._require_hyperbolic()
        b = c.axis_base
        if x == b:
            return 0
        if self.dist_to_axis(x) != 0:
            raise ValueError(f"{format_vertex(x)} is not on the axis")
        ahead = step_towards(b, self.eval(b))
        dist = distance(b, x)
        return dist if step_towards(b, x) == ahead else -dist

    def projection_position(self, v: Vertex) -> int:
        return self.axis_position(self.project_to_axis(v))

    def axis_order_leq(self, u: Vertex, v: Vertex) -> bool:
        """u <= v in the order along the axis induced by the translation."""
        return self.axis_position(u) <= self.axis_position(v)

    def ends(self) -> tuple[EndHandle, EndHandle]:
        self._require_hyperbolic()
        return EndHandle(self, 1), EndHandle(self, -1)

    # -- singularities
    def singular_candidates(self) -> frozenset:
        cand: set = set()
        for i, (letter, s) in enumerate(self.word):
            region = letter.singular_candidates()
            if not region:
                continue
            if s < 0:
                region = frozenset(letter.image(z) for z in region)
            suffix_inv = Elem(self.ambient, self.word[i + 1:]).inverse()
            cand.update(suffix_inv.eval(z) for z in region)
        return frozenset(cand)

    def singularities(self) -> frozenset:
        if self._sing is None:
            F = self.ambient.F
            self._sing = frozenset(v for v in self.singular_candidates() if self.local(v) not in F)
        return self._sing

    def sing_depth(self) -> int:
        return max((self.dist_to_axis(v) for v in self.singularities()), default=0)

    def __repr__(self) -> str:
        return f"Elem({self.name or len(self.word)})"


# ---- constructors ---------------------------------------------------------

def from_consistent_set(ambient: Ambient, support: CompleteSubtree, locals_: Mapping[Vertex, Perm],
                        base: Vertex, image: Vertex, name: str = "") -> Elem:
    return Elem(ambient, [(Portrait(ambient, base, image, support, locals_), 1)], name=name)


def rotation(ambient: Ambient, center: Vertex, sigma: Perm, name: str = "") -> Elem:
    """Elliptic element fixing ``center`` with local action ``sigma`` there."""
    d = ambient.degree
    st = star(center, d)
    locs = {center: sigma}
    for a in range(d):
        w = neighbour(center, a)
        m = ambient.F.minimal_map(a, sigma[a])
        if m is None:
            raise NotInGroup("local action moves a colour out of its F-orbit")
        locs[w] = m
    return from_consistent_set(ambient, st, locs, center, center, name=name)


def translation_along(ambient: Ambient, base: Vertex, backward: Sequence[int],
                      forward: Sequence[int], name: str = "") -> Elem:
    if not ambient.F.is_2transitive():
        raise ValueError("translation_along needs a 2-transitive F")
    return Elem(ambient, [(PathTranslation(ambient, base, backward, forward), 1)], name=name)


def planted(ambient: Ambient, carrier: Elem, vertex: Vertex, twist: Perm, name: str = "") -> Elem:
    """``carrier`` followed by an elliptic that twists the star at ``vertex`` by ``twist``.

    The twist must fix the colour classes of F; it typically lies in F' outside F.
    """
    return carrier * rotation(ambient, vertex, twist)


@dataclass
class MembershipReport:
    member: bool
    singular_count: int
    checked: int
    problems: list = field(default_factory=list)


def validate_membership(g: Elem, radius: int = 3) -> MembershipReport:
    """Check sigma(g,v) in F' on the candidate region and in F on a ball outside it."""
    amb = g.ambient
    cand = g.singular_candidates()
    problems = []
    for v in cand:
        if g.local(v) not in amb.Fprime:
            problems.append(f"local action at {format_vertex(v)} outside F'")
    region = set(cand)
    checked = len(cand)
    for v in ball(g.anchor(), radius, amb.degree):
        if v in region:
            continue
        checked += 1
        if g.local(v) not in amb.F:
            problems.append(f"singular vertex {format_vertex(v)} outside candidate region")
    return MembershipReport(not problems, len(g.singularities()), checked, problems)


def agree_on_ball(g: Elem, h: Elem, radius: int, center: Vertex | None = None) -> bool:
    """Equality certified on a ball plus both candidate regions (sound only there)."""
    c = g.anchor() if center is None else center
    pts = set(ball(c, radius, g.ambient.degree)) | g.singular_candidates() | h.singular_candidates()
    return all(g.eval(v) == h.eval(v) and g.local(v) == h.local(v) for v in pts)


def cap_check(n: int, limit: int, what: str):
    if n > limit:
        raise CapExceeded(what, limit)


def random_element(ambient: Ambient, rng, radius: int = 1, twists: int = 0,
                   reach: int = 3, name: str = "") -> Elem:
    """A seeded random element of G(F, F').

    The portrait lives on the ball of ``radius`` about a random base; each
    local action is a random element of F meeting its pin, except at
    ``twists`` random internal vertices where it is drawn from F' instead.
    """
    d = ambient.degree
    base = _random_vertex(rng, d, reach)
    image = _random_vertex(rng, d, reach)
    pts = ball(base, radius + 1, d)
    A = CompleteSubtree(frozenset(pts), d)
    inner = sorted(A.internal, key=lambda v: (distance(base, v), v))
    twisted = set(rng.sample(inner, min(twists, len(inner)))) if twists else set()
    locs: dict = {}
    for v in sorted(A.vertices, key=lambda v: (distance(base, v), v)):
        pool = ambient.Fprime if v in twisted else ambient.F
        if v == base:
            cands = list(pool.elements)
        else:
            par = step_towards(v, base)
            c = edge_colour(v, par)
            cands = [p for p in pool.elements if p[c] == locs[par][c]]
        locs[v] = rng.choice(cands)
    return from_consistent_set(ambient, A, locs, base, image, name=name)


def _random_vertex(rng, d: int, reach: int) -> Vertex:
    word: list = []
    for _ in range(rng.randint(0, reach)):
        a = rng.randrange(d)
        while word and word[-1] == a:
            a = rng.randrange(d)
        word.append(a)
    return tuple(word)
