"""The scale function via pandos, the M-set and restriction counting.

For hyperbolic ``g`` the scale is ``numerator / |M|`` where the numerator is
the index of the pointwise fixator of ``P ∪ gP`` in that of ``gP`` inside U(F),
and ``M`` is a finite set of automorphisms of the initial segment ``P0``.
Every count is exact.  ``restriction_count`` and ``m_set_bruteforce`` are
slow independent oracles for the two fast counting routines.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

from .element import Ambient, Elem, Portrait
from .perm import CapExceeded, Perm, PermGroup
from .tree import (
    CompleteSubtree,
    Vertex,
    complete_hull,
    convex_hull,
    edge_colour,
    neighbour,
    star,
)

MAX_INTERNAL = 4096  # the DP and product formula stay polynomial; brute force has its own budget
MAX_GROUP = 24
MAX_NODES = 10**7


@dataclass(frozen=True)
class Pando:
    tree: CompleteSubtree
    owner: Elem
    depth: int
    axis_window: tuple[Vertex, Vertex]
    window_positions: tuple[int, int]


@dataclass(frozen=True)
class FixatorSpec:
    """The pointwise fixator of ``fixed`` in U(F), conjugated by ``conjugator`` if given."""

    fixed: CompleteSubtree
    conjugator: Elem | None = None


@dataclass(frozen=True)
class ScaleReport:
    scale: int
    numerator: int
    m_size: int
    pando_int: int

    def machine(self) -> str:
        return (f"scale={self.scale} numerator={self.numerator} "
                f"m_size={self.m_size} pando_int={self.pando_int}")


# ---- geometry around the axis -----------------------------------------------

def hanging(g: Elem, t: int, depth: int) -> list[Vertex]:
    """Vertices at distance 1..depth from the axis whose projection is axis point ``t``."""
    x = g.axis_point(t)
    banned = {g.axis_point(t - 1), g.axis_point(t + 1)}
    d = g.ambient.degree
    out = []
    frontier = [(x, None)]
    for _ in range(depth):
        nxt = []
        for v, came in frontier:
            for a in range(d):
                w = neighbour(v, a)
                if w == came or w in banned:
                    continue
                out.append(w)
                nxt.append((w, v))
        frontier = nxt
        banned = set()
    return out


def tube(g: Elem, lo: int, hi: int, depth: int, hang_lo: int, hang_hi: int) -> CompleteSubtree:
    """Axis points lo..hi plus everything within ``depth`` hanging at hang_lo..hang_hi."""
    pts = [g.axis_point(t) for t in range(lo, hi + 1)]
    for t in range(hang_lo, hang_hi + 1):
        pts.extend(hanging(g, t, depth))
    return complete_hull(pts, g.ambient.degree)


def singular_positions(g: Elem) -> list[int]:
    return sorted(g.projection_position(s) for s in g.singularities())


# ---- pandos -----------------------------------------------------------------

def make_pando(g: Elem, D: int | None = None, extra_back: int = 0, extra_fwd: int = 0) -> Pando:
    c = g.classify()
    if not c.hyperbolic:
        raise ValueError("pandos exist only for hyperbolic elements")
    Dg = g.sing_depth()
    if D is None:
        D = Dg + 1
    if D <= Dg:
        raise ValueError(f"pando depth {D} must exceed the singular depth {Dg}")
    l = c.length
    sp = singular_positions(g)
    if sp:
        p0 = sp[0] - 1
        p1 = max(sp[-1] + 1, p0 + l + 1)
    else:
        p0, p1 = 0, l + 1
    p0 -= extra_back
    p1 += extra_fwd
    tree = tube(g, p0, p1, D, p0 + 1, p1 - 1)
    _cap_internal(tree)
    p = Pando(tree, g, D, (g.axis_point(p0), g.axis_point(p1)), (p0, p1))
    problems = validate_pando(p)
    if problems:
        raise AssertionError("pando validation failed: " + "; ".join(problems))
    return p


def validate_pando(p: Pando, g: Elem | None = None) -> list[str]:
    """Machine check of the three pando conditions; returns the failures."""
    g = p.owner if g is None else g
    P = p.tree
    problems = []
    if not P.is_valid():
        problems.append("not a complete subtree")
    if not g.singularities() <= P.internal:
        problems.append("P1: a singularity is not internal")
    axis_in = [v for v in P.vertices if g.dist_to_axis(v) == 0]
    if not any(g.eval(v) in P.internal for v in axis_in):
        problems.append("P2: no axis vertex is carried into the interior")
    depths = {g.dist_to_axis(u) for u in P.vertices}
    top = max(depths)
    for x in axis_in:
        if x not in P.internal:
            continue
        t = g.axis_position(x)
        for v in hanging(g, t, top):
            if g.dist_to_axis(v) in depths and v not in P:
                problems.append("P3: missing vertex over an internal axis vertex")
                return problems
    return problems


def initial_segment(p: Pando) -> CompleteSubtree:
    g, P = p.owner, p.tree
    gP = {g.eval(v) for v in P.vertices}
    rest = [v for v in P.vertices if v not in gP]
    return complete_hull(rest, P.degree)


def image_tree(g: Elem, T: CompleteSubtree) -> CompleteSubtree:
    return CompleteSubtree(frozenset(g.eval(v) for v in T.vertices), T.degree)


def _cap_internal(T: CompleteSubtree):
    if len(T.internal) > MAX_INTERNAL:
        raise CapExceeded("internal vertices", MAX_INTERNAL)


# ---- fixator indices ------------------------------------------------------

def fixator_index(big: CompleteSubtree, small: CompleteSubtree, F: PermGroup) -> int:
    """[U_small : U_big] in U(F), as a product of per-vertex local counts.

    ``small`` must contain an edge; a lone vertex would leave its own local
    action free without being internal to ``big``.
    """
    if not small.vertices <= big.vertices:
        raise ValueError("small must be contained in big")
    if len(small.vertices) < 2:
        raise ValueError("small must contain an edge")
    d = big.degree
    total = 1
    seen = set(small.vertices)
    frontier = []
    for v in small.vertices:
        if v in small.internal:
            continue
        pins = [(a, a) for a in range(d) if neighbour(v, a) in small.vertices]
        if v in big.internal:
            total *= len(F.maps_with_pins(pins))
        frontier.append(v)
    while frontier:
        nxt = []
        for v in frontier:
            for a in range(d):
                w = neighbour(v, a)
                if w in big.vertices and w not in seen:
                    seen.add(w)
                    if w in big.internal:
                        total *= len(F.maps_with_pins([(a, a)]))
                    nxt.append(w)
        frontier = nxt
    return total


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def tick(self):
        self.used += 1
        if self.used > self.limit:
            raise CapExceeded("enumeration nodes", self.limit)


def _enumerate_fixator(fixed: CompleteSubtree, region: Iterable[Vertex], F: PermGroup,
                       budget: _Budget):
    """Yield vertex maps on ``region`` of every element of U(F) fixing ``fixed`` pointwise.

    Brute force: all consistent F-valued local assignments on the convex hull,
    rooted at a fixed vertex, pruned only when a fixed vertex moves.
    """
    region = list(region)
    root = min(fixed.vertices, key=lambda v: (len(v), v))
    hull = convex_hull([root, *fixed.vertices, *region])
    d = fixed.degree
    order = [root]
    parent = {root: None}
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for a in range(d):
            w = neighbour(v, a)
            if w in hull and w not in parent:
                parent[w] = v
                order.append(w)
    has_child = {v: False for v in order}
    for w, v in parent.items():
        if v is not None:
            has_child[v] = True
    fixed_set = fixed.vertices
    img: dict = {root: root}
    loc: dict = {}

    def rec(k: int):
        budget.tick()
        if k == len(order):
            yield dict(img)
            return
        v = order[k]
        p = parent[v]
        if p is not None:
            c = edge_colour(p, v)
            img[v] = neighbour(img[p], loc[p][c])
            if v in fixed_set and img[v] != v:
                return
        if not has_child[v]:
            yield from rec(k + 1)
            return
        for tau in F.elements:
            if p is not None and tau[c] != loc[p][c]:
                continue
            loc[v] = tau
            yield from rec(k + 1)
        loc.pop(v, None)

    yield from rec(0)


def restriction_count(A: FixatorSpec, T: CompleteSubtree | Iterable[Vertex], F: PermGroup,
                      max_nodes: int = MAX_NODES) -> int:
    """Number of distinct restrictions to ``T`` of members of ``A`` (exhaustive)."""
    pts = sorted(T.vertices if isinstance(T, CompleteSubtree) else set(T))
    budget = _Budget(max_nodes)
    x = A.conjugator
    seen = set()
    if x is None:
        for m in _enumerate_fixator(A.fixed, pts, F, budget):
            seen.add(tuple(m[v] for v in pts))
    else:
        xinv = x.inverse()
        pulled = [xinv.eval(v) for v in pts]
        for m in _enumerate_fixator(A.fixed, pulled, F, budget):
            seen.add(tuple(x.eval(m[u]) for u in pulled))
    return len(seen)


def cos_distance(U: FixatorSpec, V: FixatorSpec, F: PermGroup,
                 max_nodes: int = MAX_NODES) -> tuple[int, int]:
    """([U : U∩V], [V : U∩V]) for pointwise fixators in U(F).

    For a conjugated fixator ``x U_T x^-1`` the relevant fixed set is ``x(T)``;
    this is exact when ``x`` lies in U(F).
    """
    def fixed_points(S: FixatorSpec):
        if S.conjugator is None:
            return S.fixed.vertices
        return frozenset(S.conjugator.eval(v) for v in S.fixed.vertices)

    def plain(S: FixatorSpec) -> FixatorSpec:
        if S.conjugator is None:
            return S
        return FixatorSpec(CompleteSubtree(fixed_points(S), S.fixed.degree))

    u, v = plain(U), plain(V)
    return (restriction_count(u, fixed_points(V), F, max_nodes),
            restriction_count(v, fixed_points(U), F, max_nodes))


def path_index(path: list[Vertex], F: PermGroup) -> int:
    """Product of point-stabiliser index factors along consecutive edge colours."""
    cols = [edge_colour(a, b) for a, b in zip(path, path[1:])]
    out = 1
    for a, b in zip(cols, cols[1:]):
        out *= F.index_factor(a, b)
    return out


# ---- the M-set ------------------------------------------------------------

Allowed = Callable[[Perm, Vertex, Vertex], bool]


def forward_threshold(g: Elem, vertices: Iterable[Vertex]) -> int:
    """Least H with g^j(z) outside S(g) for all j >= H and all given z."""
    S = g.singularities()
    if not S:
        return 0
    top = max(singular_positions(g))
    H = 0
    for z in vertices:
        j, y = 0, z
        while g.projection_position(y) <= top:
            if y in S:
                H = max(H, j + 1)
            y = g.eval(y)
            j += 1
    return H


def backward_threshold(g: Elem, vertices: Iterable[Vertex]) -> int:
    """Least H with g^-j(z) outside S(g) for all j >= H and all given z."""
    S = g.singularities()
    if not S:
        return 0
    bottom = min(singular_positions(g))
    ginv = g.inverse()
    H = 0
    for z in vertices:
        j, y = 0, z
        while g.projection_position(y) >= bottom:
            if y in S:
                H = max(H, j + 1)
            y = ginv.eval(y)
            j += 1
    return H


def scale_aut_condition(g: Elem, T: CompleteSubtree) -> Allowed:
    """Local condition on the M-set of an initial segment, with stabilised exponent."""
    F = g.ambient.F
    H = forward_threshold(g, T.vertices)
    cache: dict = {}

    def sig(v):
        if v not in cache:
            cache[v] = g.local_power(v, H)
        return cache[v]

    def ok(tau: Perm, x: Vertex, y: Vertex) -> bool:
        return tau in F and (sig(y) * tau * sig(x).inverse()) in F

    return ok


def _axis_structure(g: Elem, T: CompleteSubtree):
    axis = sorted((v for v in T.vertices if g.dist_to_axis(v) == 0), key=g.axis_position)
    return axis, set(axis)


def count_M(g: Elem, T: CompleteSubtree, allowed: Allowed) -> int:
    """|M| by dynamic programming over the hanging subtrees."""
    d = g.ambient.degree
    axis, axis_set = _axis_structure(g, T)
    memo: dict = {}

    def count(x: Vertex, y: Vertex, c_in: int, c_out: int) -> int:
        # x maps to y; the edge to the parent has colour c_in at x, c_out at y
        if y not in T.vertices:
            return 0
        xi, yi = x in T.internal, y in T.internal
        if xi != yi:
            return 0
        if not xi:
            return 1
        key = (x, y)
        if key in memo:
            return memo[key]
        total = 0
        for tau in g.ambient.F.maps_with_pins([(c_in, c_out)]):
            if not allowed(tau, x, y):
                continue
            prod = 1
            for a in range(d):
                if a == c_in:
                    continue
                prod *= count(neighbour(x, a), neighbour(y, tau[a]), a, tau[a])
                if not prod:
                    break
            total += prod
        memo[key] = total
        return total

    total = 1
    for p in axis:
        if p not in T.internal:
            continue
        pins = [(a, a) for a in range(d) if neighbour(p, a) in axis_set]
        s = 0
        for tau in g.ambient.F.maps_with_pins(pins):
            if not allowed(tau, p, p):
                continue
            prod = 1
            for a in range(d):
                w = neighbour(p, a)
                if w in axis_set:
                    continue
                prod *= count(w, neighbour(p, tau[a]), a, tau[a])
                if not prod:
                    break
            s += prod
        total *= s
    return total


def enumerate_M(g: Elem, T: CompleteSubtree, allowed: Allowed | None = None,
                max_nodes: int = MAX_NODES) -> list[dict]:
    """List the M-set as vertex maps of ``T`` by backtracking over local actions."""
    if allowed is None:
        allowed = scale_aut_condition(g, T)
    d = g.ambient.degree
    F = g.ambient.F
    axis, axis_set = _axis_structure(g, T)
    budget = _Budget(max_nodes)
    order = sorted(T.internal, key=lambda v: (g.dist_to_axis(v), g.projection_position(v), v))
    results = []
    img = {v: v for v in axis}

    def rec(k: int):
        budget.tick()
        if k == len(order):
            if all(img[v] in T.vertices for v in T.vertices) and \
                    len(set(img.values())) == len(T.vertices):
                results.append(dict(img))
            return
        x = order[k]
        y = img[x]
        if y not in T.internal:
            return
        if x in axis_set:
            pins = [(a, a) for a in range(d) if neighbour(x, a) in axis_set]
        else:
            # parent is the neighbour one step closer to the axis
            c_in = next(a for a in range(d)
                        if g.dist_to_axis(neighbour(x, a)) < g.dist_to_axis(x))
            c_out = edge_colour(y, img[neighbour(x, c_in)])
            pins = [(c_in, c_out)]
        for tau in F.maps_with_pins(pins):
            if not allowed(tau, x, y):
                continue
            added = []
            for a in range(d):
                w = neighbour(x, a)
                if w not in img:
                    img[w] = neighbour(y, tau[a])
                    added.append(w)
            rec(k + 1)
            for w in added:
                del img[w]

    rec(0)
    return results


def induced_local(m: dict, v: Vertex, d: int) -> Perm:
    """Local action at an internal vertex of a finite-tree automorphism."""
    return Perm(edge_colour(m[v], m[neighbour(v, a)]) for a in range(d))


def tree_automorphisms_fixing(T: CompleteSubtree, fixed: Iterable[Vertex],
                              max_nodes: int = MAX_NODES) -> list[dict]:
    """All graph automorphisms of ``T`` fixing ``fixed`` pointwise (generic search)."""
    d = T.degree
    fixed = list(fixed)
    root = fixed[0]
    budget = _Budget(max_nodes)
    adj = {v: [w for w in (neighbour(v, a) for a in range(d)) if w in T.vertices]
           for v in T.vertices}
    order = [root]
    parent = {root: None}
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for w in adj[v]:
            if w not in parent:
                parent[w] = v
                order.append(w)
    fixed_set = set(fixed)
    out = []
    img = {root: root}

    def rec(k: int, used: set):
        budget.tick()
        if k == len(order):
            out.append(dict(img))
            return
        v = order[k]
        p = parent[v]
        choices = [w for w in adj[img[p]] if w not in used and len(adj[w]) == len(adj[v])]
        if v in fixed_set:
            choices = [v] if v in choices else []
        for w in choices:
            # the image of v must be adjacent to the images of its placed neighbours
            img[v] = w
            used.add(w)
            rec(k + 1, used)
            used.discard(w)
            del img[v]

    rec(1, {root})
    return out


def m_set_bruteforce(g: Elem, T: CompleteSubtree, exponents: Iterable[int]) -> int:
    """Oracle for |M| on an initial segment: every automorphism of ``T`` fixing the
    axis is tested directly against the double-coset condition for all given
    exponents (which should all be large)."""
    F = g.ambient.F
    d = T.degree
    axis = [v for v in T.vertices if g.dist_to_axis(v) == 0]
    exps = list(exponents)
    count = 0
    for m in tree_automorphisms_fixing(T, axis):
        good = True
        for v in T.internal:
            tau = induced_local(m, v, d)
            if tau not in F:
                good = False
                break
            for k in exps:
                if (g.local_power(m[v], k) * tau * g.local_power(v, k).inverse()) not in F:
                    good = False
                    break
            if not good:
                break
        count += good
    return count


# ---- scale ----------------------------------------------------------------

def scale_report(g: Elem, pando: Pando | None = None) -> ScaleReport:
    if len(g.ambient.F) > MAX_GROUP:
        raise CapExceeded("|F|", MAX_GROUP)
    if not g.is_hyperbolic:
        return ScaleReport(1, 1, 1, 0)
    p = make_pando(g) if pando is None else pando
    P = p.tree
    gP = image_tree(g, P)
    numerator = fixator_index(P.union(gP), gP, g.ambient.F)
    P0 = initial_segment(p)
    _cap_internal(P0)
    m = count_M(g, P0, scale_aut_condition(g, P0))
    if numerator % m:
        raise AssertionError(f"numerator {numerator} not divisible by |M| = {m}")
    return ScaleReport(numerator // m, numerator, m, len(P.internal))


def scale(g: Elem, pando: Pando | None = None) -> int:
    return scale_report(g, pando).scale


def scale_closed_form_uf(g: Elem) -> int:
    """Product of stabiliser index factors along one period of the axis (U(F) only)."""
    c = g.classify()
    if not c.hyperbolic:
        raise ValueError("closed form needs a hyperbolic element")
    if g.singularities():
        raise ValueError("closed form applies only to elements of U(F)")
    l = c.length
    path = [g.axis_point(t) for t in range(0, l + 2)]
    return path_index(path, g.ambient.F)


def flex_tree(g: Elem, v0: Vertex, D: int) -> CompleteSubtree:
    t0 = g.axis_position(v0)
    l = g.length
    return tube(g, t0 - 1, t0 + l, D, t0, t0 + l - 1)


def scale_flex(g: Elem, v0: Vertex, D: int | None = None) -> int:
    """Scale from a window placed past every singular projection.

    The M-set condition is the lambda-coset form; the numerator is the exact
    U(F) fixator index for the window, which is (d-1)^|Int| when the point
    stabilisers of F have order d-1.
    """
    from .directions import lambda_coset

    F = g.ambient.F
    if not F.is_2transitive():
        raise ValueError("scale_flex needs a 2-transitive F")
    if not g.is_hyperbolic:
        raise ValueError("scale_flex needs a hyperbolic element")
    Dg = g.sing_depth()
    D = Dg + 1 if D is None else D
    if D <= Dg:
        raise ValueError("window depth must exceed the singular depth")
    t0 = g.axis_position(v0)
    sp = singular_positions(g)
    if sp and t0 <= sp[-1]:
        raise ValueError("v0 must lie past every singular projection")
    T = flex_tree(g, v0, D)
    _cap_internal(T)
    gT = image_tree(g, T)
    numerator = fixator_index(T.union(gT), gT, F)

    def ok(tau: Perm, x: Vertex, y: Vertex) -> bool:
        if tau not in F:
            return False
        lx, ly = lambda_coset(g, x)[0], lambda_coset(g, y)[0]
        return (ly.representative.inverse() * tau * lx.representative) in F

    m = count_M(g, T, ok)
    if numerator % m:
        raise AssertionError(f"numerator {numerator} not divisible by |M| = {m}")
    return numerator // m


def modular(g: Elem) -> Fraction:
    return Fraction(scale(g), scale(g.inverse()))


def uniscalar_witness(ambient: Ambient) -> Elem | None:
    """Hyperbolic element of U(F) with scale 1 when F lacks distinct point stabilisers."""
    F = ambient.F
    d = ambient.degree
    for a in range(d):
        for b in range(a + 1, d):
            if F.point_stabilizer(a) == F.point_stabilizer(b):
                ident = Perm.identity(d)
                root = ()
                st = star(root, d)
                locs = {v: ident for v in st.vertices}
                letter = Portrait(ambient, root, (a, b), st, locs)
                return Elem(ambient, [(letter, 1)], name=f"witness{a}{b}")
    return None
