"""Lambda-trajectory cosets, the edge length function, and end comparison.

``lambda_coset(g, v)`` is the eventual value of ``sigma(g^n, g^-n v) F``.  It
can only be non-trivial on forward orbits of singular vertices, and those
orbits are infinite, so every comparison of lambda functions is made on an
explicit finite window of forward orbit steps (the ``steps`` argument).
"""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field

from .element import Elem
from .perm import LambdaCoset, coset
from .tree import (
    CompleteSubtree,
    EdgeRef,
    Vertex,
    ball,
    complete_hull,
    distance,
    neighbour,
    star,
)

EQUAL, NOTEQUAL, UNKNOWN = "equal", "notequal", "unknown"


@dataclass(frozen=True)
class ThreeValued:
    value: str
    depth: int = 0
    certificate: str = ""

    @property
    def is_true(self) -> bool:
        return self.value == EQUAL

    @property
    def is_false(self) -> bool:
        return self.value == NOTEQUAL

    @property
    def is_unknown(self) -> bool:
        return self.value == UNKNOWN

    def __bool__(self):
        raise TypeError("ThreeValued has no truth value; use is_true / is_false")

    def machine(self, key: str = "asymptotic") -> str:
        return f"{key}={self.value} depth={self.depth} certificate={self.certificate or 'none'}"


def both(a: ThreeValued, b: ThreeValued) -> ThreeValued:
    """Three-valued conjunction; the first refuting certificate wins."""
    for x in (a, b):
        if x.is_false:
            return x
    for x in (a, b):
        if x.is_unknown:
            return x
    return ThreeValued(EQUAL, max(a.depth, b.depth), "+".join(c for c in (a.certificate, b.certificate) if c))


# ---- lambda -----------------------------------------------------------------

@dataclass
class LambdaTable:
    owner: Elem
    entries: dict = field(default_factory=dict)

    def get(self, v: Vertex) -> tuple[LambdaCoset, int]:
        hit = self.entries.get(v)
        if hit is None:
            hit = self.entries[v] = _compute_lambda(self.owner, v)
        return hit

    def nontrivial(self) -> dict:
        return {v: c for v, (c, _) in self.entries.items() if not c.is_trivial()}


_tables: "weakref.WeakKeyDictionary[Elem, LambdaTable]" = weakref.WeakKeyDictionary()


def lambda_table(g: Elem) -> LambdaTable:
    t = _tables.get(g)
    if t is None:
        t = _tables[g] = LambdaTable(g)
    return t


def _singular_range(g: Elem) -> tuple[int, int] | None:
    S = g.singularities()
    if not S:
        return None
    pos = [g.projection_position(s) for s in S]
    return min(pos), max(pos)


def _compute_lambda(g: Elem, v: Vertex) -> tuple[LambdaCoset, int]:
    F = g.ambient.F
    trivial = coset(g.ambient.identity(), F)
    rng = _singular_range(g)
    if rng is None or g.dist_to_axis(v) > g.sing_depth():
        return trivial, 0
    lo = rng[0]
    l = g.length
    pos = g.projection_position(v)
    # g^-n v projects to pos - n*l; past lo there are no more singular vertices
    n_max = max(0, (pos - lo) // l)
    ginv = g.inverse()
    sigma = g.ambient.identity()
    cosets = [trivial]
    y = v
    for _ in range(n_max):
        y = ginv.eval(y)
        sigma = sigma * g.local(y)
        cosets.append(coset(sigma, F))
    limit = cosets[-1]
    H = len(cosets) - 1
    while H > 0 and cosets[H - 1] == limit:
        H -= 1
    return limit, H


def lambda_coset(g: Elem, v: Vertex) -> tuple[LambdaCoset, int]:
    """(lambda_g(v), H_g(v)) for hyperbolic ``g``."""
    if not g.is_hyperbolic:
        raise ValueError("lambda needs a hyperbolic element")
    return lambda_table(g).get(v)


def lambda_unrolled(g: Elem, v: Vertex, n: int) -> LambdaCoset:
    """sigma(g^n, g^-n v) F computed directly from the power (oracle)."""
    gn = g.power(n)
    return coset(gn.local(g.eval_power(v, -n)), g.ambient.F)


def forward_escape(g: Elem) -> int:
    """Least N such that g^n S(g) projects past every singular vertex for n > N."""
    rng = _singular_range(g)
    if rng is None:
        return 0
    lo, hi = rng
    return max(0, (hi - lo) // g.length) + 1


def lambda_window(g: Elem, steps: int) -> set:
    """The vertices g^m s for s in S(g) and 1 <= m <= steps."""
    out = set()
    for s in g.singularities():
        y = s
        for _ in range(steps):
            y = g.eval(y)
            out.add(y)
    return out


def lambda_support(g: Elem, steps: int | None = None) -> set:
    """Vertices with non-trivial lambda among the first ``steps`` forward translates
    of S(g) (default: the forward escape index plus two)."""
    if not g.is_hyperbolic:
        raise ValueError("lambda needs a hyperbolic element")
    if steps is None:
        steps = forward_escape(g) + 2
    return {v for v in lambda_window(g, steps) if not lambda_coset(g, v)[0].is_trivial()}


def default_window(g: Elem, h: Elem, extra: int = 2) -> int:
    return max(forward_escape(g), forward_escape(h)) + extra


def weakly_asymptotic(g: Elem, h: Elem, steps: int | None = None) -> bool:
    """lambda_g == lambda_h on every vertex outside which both are trivial up to
    ``steps`` forward translates of the singular sets."""
    if steps is None:
        steps = default_window(g, h)
    pts = lambda_window(g, steps) | lambda_window(h, steps)
    return all(lambda_coset(g, v)[0] == lambda_coset(h, v)[0] for v in pts)


# ---- ends -----------------------------------------------------------------

def default_depth(g: Elem, h: Elem) -> int:
    cg, ch = g.classify(), h.classify()
    return 4 * (cg.length + ch.length + g.sing_depth() + h.sing_depth()
                + distance(cg.axis_base, ch.axis_base))


def ends_equal(g: Elem, h: Elem, depth: int | None = None) -> ThreeValued:
    """Compare the attracting ends of two hyperbolic elements.

    Walks forward along axis(g) using the exact distance to axis(h).  In a
    tree that distance decreases, stays at zero on the overlap, then
    increases; a strict increase is therefore permanent.
    """
    if not (g.is_hyperbolic and h.is_hyperbolic):
        raise ValueError("ends_equal needs hyperbolic elements")
    if depth is None:
        depth = default_depth(g, h)
    prev = None
    contact = False
    for t in range(depth + 1):
        x = g.axis_point(t)
        dist = h.dist_to_axis(x)
        if prev is not None and dist > prev:
            kind = "diverge" if contact else "disjoint"
            return ThreeValued(NOTEQUAL, t, kind)
        if dist == 0:
            if contact:
                if h.axis_position(x) < h.axis_position(g.axis_point(t - 1)):
                    return ThreeValued(NOTEQUAL, t, "orientation")
            contact = True
        prev = dist
    if contact and prev == 0:
        return ThreeValued(EQUAL, depth, "overlap")
    return ThreeValued(UNKNOWN, depth, "")


def asymptotic(g: Elem, h: Elem, depth: int | None = None, steps: int | None = None) -> ThreeValued:
    if not g.ambient.F.is_2transitive():
        raise ValueError("asymptotic needs a 2-transitive F")
    if not weakly_asymptotic(g, h, steps):
        return ThreeValued(NOTEQUAL, 0, "lambda")
    return ends_equal(g, h, depth)


# ---- the edge length function -----------------------------------------------

def tree_T_e(g: Elem, e: EdgeRef) -> CompleteSubtree:
    """Least complete subtree containing e and g^-1(e) with S(g) internal."""
    d = g.ambient.degree
    ginv = g.inverse()
    pts = [e.origin, e.target, ginv.eval(e.origin), ginv.eval(e.target)]
    for s in g.singularities():
        pts.extend(star(s, d).vertices)
    return complete_hull(pts, d)


def N_e(g: Elem, e: EdgeRef) -> int:
    return len(tree_T_e(g, e).internal)


def p_e(g: Elem, e: EdgeRef) -> int:
    """Number of distinct lengths of paths starting along e (either way) and
    ending at a leaf of T_e(g)."""
    T = tree_T_e(g, e)
    o, t = e.origin, e.target
    lengths = set()
    for x in T.leaves:
        # x lies on the side of exactly one endpoint; the path runs through the other
        lengths.add(max(distance(o, x), distance(t, x)))
    return len(lengths)


def length_diagnostic(g: Elem, h: Elem, p: int, q: int, n_max: int, e: EdgeRef) -> list[int]:
    """N_e(g^{-pn} h^{qn}) for n = 0..n_max."""
    gi = g.inverse()
    out = []
    for n in range(n_max + 1):
        w = gi.power(p * n) * h.power(q * n)
        out.append(N_e(w, e))
    return out


@dataclass(frozen=True)
class GapBound:
    base: int
    length_g: int
    scale_g: int
    length_h: int
    scale_h: int

    @property
    def value(self) -> float:
        return math.log(self.base) * (self.length_g / math.log(self.scale_g)
                                      + self.length_h / math.log(self.scale_h))

    def __str__(self) -> str:
        return (f"log({self.base})*({self.length_g}/log({self.scale_g})"
                f" + {self.length_h}/log({self.scale_h}))")


def direction_gap_bound(g: Elem, h: Elem, depth: int | None = None) -> GapBound | None:
    """Lower bound on the distance between the directions of non-asymptotic g and h."""
    from .scale import scale

    F = g.ambient.F
    if not F.is_2transitive():
        raise ValueError("needs a 2-transitive F")
    if asymptotic(g, h, depth).is_true:
        return None
    sg, sh = scale(g), scale(h)
    if sg <= 1 or sh <= 1:
        return None
    return GapBound(g.ambient.degree - 1, g.length, sg, h.length, sh)


# ---- edge stabiliser indices (oracle) ---------------------------------------

def edge_stabilizer_index(g: Elem, e: EdgeRef, max_nodes: int = 10**6) -> int:
    """[U_{e} : U_{e} ∩ g U_{e} g^-1] with U_{e} the setwise edge stabiliser in U(F).

    Brute force: every restriction of U_{e} to the ball B of radius k about e
    (k = max distance from e to T_e(g^-1)) is enumerated and tested for
    membership of the intersection directly.  The pointwise fixator of B lies
    in the intersection, so the index is a ratio of restriction counts.
    """
    from .perm import CapExceeded

    d = g.ambient.degree
    F = g.ambient.F
    ginv = g.inverse()
    T = tree_T_e(ginv, e)
    o, t = e.origin, e.target
    k = max(min(distance(v, o), distance(v, t)) for v in T.vertices)
    B = set(ball(o, k, d)) | set(ball(t, k, d))
    inner = {v for v in B if min(distance(v, o), distance(v, t)) < k}
    sing = g.inverse().singularities()  # S(g^-1)
    ge = (g.eval(o), g.eval(t))
    order = sorted(inner, key=lambda v: (min(distance(v, o), distance(v, t)), v))
    total = member = 0
    nodes = 0
    for swap in (False, True):
        img = {o: t, t: o} if swap else {o: o, t: t}
        loc: dict = {}
        first = [p for p in F.elements if p[e.colour] == e.colour]

        def rec(i):
            nonlocal total, member, nodes
            nodes += 1
            if nodes > max_nodes:
                raise CapExceeded("edge index enumeration", max_nodes)
            if i == len(order):
                total += 1
                member += _in_intersection(g, ginv, img, loc, ge, sing, F, d)
                return
            v = order[i]
            if v in (o, t):
                cands = first
            else:
                par = next(neighbour(v, a) for a in range(d)
                           if min(distance(neighbour(v, a), o), distance(neighbour(v, a), t))
                           < min(distance(v, o), distance(v, t)))
                c = next(a for a in range(d) if neighbour(v, a) == par)
                cands = [p for p in F.elements if p[c] == loc[par][c]]
            for p in cands:
                loc[v] = p
                added = []
                for a in range(d):
                    w = neighbour(v, a)
                    if w not in img:
                        img[w] = neighbour(img[v], p[a])
                        added.append(w)
                rec(i + 1)
                for w in added:
                    del img[w]
            loc.pop(v, None)

        rec(0)
    if total % member:
        raise AssertionError("intersection restrictions do not divide")
    return total // member


def _in_intersection(g, ginv, img, loc, ge, sing, F, d) -> bool:
    # u fixes g(e) setwise
    if {img.get(ge[0]), img.get(ge[1])} != set(ge):
        return False
    # g^-1 u g in U(F): check sigma at y = g(w) for y or u(y) in S(g^-1)
    inv_img = {b: a for a, b in img.items()}
    pts = set(sing) | {inv_img[s] for s in sing if s in inv_img}
    for y in pts:
        if y not in loc:
            return False
        w = ginv.eval(y)
        tau = ginv.local(img[y]) * loc[y] * g.local(w)
        if tau not in F:
            return False
    return True
