"""Translation compatibility, shifted elements and scale-multiplicativity checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .directions import (
    EQUAL,
    NOTEQUAL,
    ThreeValued,
    asymptotic,
    both,
    ends_equal,
    lambda_coset,
    lambda_window,
    default_window,
)
from .element import Elem, PathTranslation, Portrait
from .perm import CapExceeded, Perm, coset_product, coset_quotient
from .scale import scale, singular_positions
from .tree import CompleteSubtree, Vertex, edge_colour, geodesic, neighbour


# ---- translation compatibility ---------------------------------------------

def translation_compatible(g: Elem, h: Elem, depth: int | None = None) -> ThreeValued:
    """Whether the orders induced on axis(g) ∩ axis(h) agree.

    Exact: the overlap of two axes is a path, and its orientation is read off
    any single shared edge.  ``depth`` is accepted for interface symmetry.
    """
    if not (g.is_hyperbolic and h.is_hyperbolic):
        raise ValueError("translation_compatible needs hyperbolic elements")
    bh = h.classify().axis_base
    p = g.project_to_axis(bh)
    if h.dist_to_axis(p) > 0:
        return ThreeValued(EQUAL, 0, "disjoint")
    tp = g.axis_position(p)
    for step in (1, -1):
        q = g.axis_point(tp + step)
        if h.dist_to_axis(q) == 0:
            forward_h = h.axis_position(q) > h.axis_position(p)
            forward_g = step > 0
            if forward_h == forward_g:
                return ThreeValued(EQUAL, 0, "orientation")
            return ThreeValued(NOTEQUAL, 0, "orientation")
    return ThreeValued(EQUAL, 0, "single-vertex")


# ---- the shifted element g_v --------------------------------------------------

def _choose(members, pins) -> Perm:
    cands = [p for p in members if all(p[a] == b for a, b in pins)]
    if not cands:
        raise ValueError("no coset representative meets the pins (is F 2-transitive?)")
    return min(cands)


def shift_element(g: Elem, v: Vertex | None = None, name: str = "") -> Elem:
    """An element asymptotic to ``g`` with the same length whose axis leaves axis(g)
    backwards at ``v`` (default: the first axis vertex past the singular projections).

    Away from the axis it acts as a translation ``h`` in U(F) along the new path;
    beyond ``v`` it acts as ``g``; in the band of two periods behind ``v`` the local
    actions are the lex-least choices in the cosets prescribed by lambda_g.
    """
    amb = g.ambient
    F = amb.F
    d = amb.degree
    if not F.is_2transitive():
        raise ValueError("shift_element needs a 2-transitive F")
    c = g.classify()
    if not c.hyperbolic:
        raise ValueError("shift_element needs a hyperbolic element")
    l, Dg = c.length, g.sing_depth()
    if l <= Dg:
        raise ValueError(f"need l(g) > D_g (got {l} <= {Dg})")
    sp = singular_positions(g)
    if v is None:
        tv = sp[-1] + 1 if sp else 0
        v = g.axis_point(tv)
    else:
        tv = g.axis_position(v)
    if sp and tv <= sp[-1]:
        raise ValueError("v must lie past every singular projection")

    back = edge_colour(v, g.axis_point(tv - 1))
    fwd = edge_colour(v, g.axis_point(tv + 1))
    b1 = min(a for a in range(d) if a not in (back, fwd))
    b2 = min(a for a in range(d) if a != b1)
    path = PathTranslation(amb, v, (b1, b2), (fwd, b1))
    h = Elem(amb, [(path, 1)]).power(l)

    def P(p: int) -> Vertex:
        return path.point(p) if p <= 0 else g.axis_point(tv + p)

    def col(p: int) -> int:
        return edge_colour(P(p), P(p + 1))

    # vertices near axis(g) behind v where lambda_g can be non-trivial, and the
    # geodesics from v to them
    near = set()
    if sp:
        from .scale import hanging
        for q in range(sp[0] + l, tv + 1):
            near.add(g.axis_point(q))
            near.update(hanging(g, q, Dg))
    W = {v}
    for x in near:
        W.update(geodesic(v, x))

    def lam(y):
        return lambda_coset(g, y)[0]

    s1: dict = {}
    s2: dict = {}
    i1: dict = {}
    i2: dict = {}
    for p in range(-2 * l + 1, -l + 1):
        u = P(p)
        i1[u], i2[u] = P(p + l), P(p + 2 * l)
        pins1 = [(col(p - 1), col(p + l - 1)), (col(p), col(p + l))]
        pins2 = [(col(p + l - 1), col(p + 2 * l - 1)), (col(p + l), col(p + 2 * l))]
        s1[u] = _choose(lam(i1[u]).members(), pins1)
        s2[u] = _choose(coset_quotient(lam(i2[u]), lam(i1[u])), pins2)

    band_axis = {P(p) for p in range(-2 * l, 2)}
    queue = []
    for p in range(-2 * l + 1, -l + 1):
        u = P(p)
        for a in range(d):
            w = neighbour(u, a)
            if w not in band_axis:
                queue.append((w, u, 1))
    leaves = []
    i = 0
    while i < len(queue):
        u, par, depth = queue[i]
        i += 1
        cin = edge_colour(u, par)
        a = s1[par][cin]
        i1[u] = neighbour(i1[par], a)
        a2 = s2[par][a]
        i2[u] = neighbour(i2[par], a2)
        if depth <= Dg or i1[u] in W or i2[u] in W:
            s1[u] = _choose(lam(i1[u]).members(), [(cin, a)])
            s2[u] = _choose(coset_quotient(lam(i2[u]), lam(i1[u])), [(a, a2)])
            for b in range(d):
                w = neighbour(u, b)
                if w != par:
                    queue.append((w, u, depth + 1))
        else:
            s1[u] = F.minimal_map(cin, a)
            s2[u] = F.minimal_map(a, a2)
            leaves.append(u)
        if len(s1) > 10**5:
            raise CapExceeded("shift band size", 10**5)

    locals_ = {}
    for u in s1:
        locals_[u] = s1[u]
        locals_[i1[u]] = s2[u]
    tail_back, tail_fwd = P(-2 * l), P(1)
    locals_[tail_back] = h.local(tail_back)
    locals_[tail_fwd] = g.local(tail_fwd)
    support = CompleteSubtree(frozenset(locals_), d)
    portrait = Portrait(amb, v, P(l), support, locals_, tails={tail_back: h, tail_fwd: g})
    return Elem(amb, [(portrait, 1)], name=name or f"{g.name or 'g'}_shift")


def shift_conditions(g: Elem, gv: Elem, v: Vertex) -> list[str]:
    """Failures of the four singularity conditions satisfied by a shifted element."""
    problems = []
    Dg = g.sing_depth()
    tv = g.axis_position(v)
    if gv.length != g.length:
        problems.append("length differs")
    for u in gv.singularities():
        if g.projection_position(u) > tv:
            problems.append("(i) singular projection past v on axis(g)")
        if gv.axis_position(gv.project_to_axis(u)) > gv.axis_position(v):
            problems.append("(ii) singular projection past v on the new axis")
        if lambda_coset(g, u)[0].is_trivial() and lambda_coset(g, gv.eval(u))[0].is_trivial():
            problems.append("(iii) both lambda values trivial at a singularity")
        if g.dist_to_axis(u) > Dg and g.dist_to_axis(gv.eval(u)) > Dg:
            problems.append("(iv) singularity far from axis(g)")
    back = gv.axis_point(gv.axis_position(v) - 1)
    if g.dist_to_axis(back) == 0:
        problems.append("new axis does not leave axis(g) at v")
    return problems


# ---- direction stabiliser ---------------------------------------------------

def lambda_intertwines(x: Elem, g: Elem, steps: int | None = None) -> bool:
    """sigma(x,v) lambda_g(v) == lambda_g(x v) on the window where either side can be non-trivial."""
    if steps is None:
        steps = default_window(g, g)
    win = lambda_window(g, steps)
    xinv = x.inverse()
    region = set(win) | {xinv.eval(w) for w in win} | set(x.singularities())
    for u in region:
        if coset_product(x.local(u), lambda_coset(g, u)[0]) != lambda_coset(g, x.eval(u))[0]:
            return False
    return True


def in_direction_stabilizer(x: Elem, g: Elem, depth: int | None = None) -> ThreeValued:
    if not g.ambient.F.is_2transitive():
        raise ValueError("needs a 2-transitive F")
    end = ends_equal(g.conjugate(x), g, depth)
    if end.is_false:
        return end
    lam = ThreeValued(EQUAL, 0, "lambda") if lambda_intertwines(x, g) \
        else ThreeValued(NOTEQUAL, 0, "lambda")
    return both(end, lam)


def in_plus_semigroup(x: Elem, g: Elem, depth: int | None = None) -> ThreeValued:
    if x.is_hyperbolic:
        return asymptotic(x, g, depth)
    return in_direction_stabilizer(x, g, depth)


# ---- scale multiplicativity -------------------------------------------------

@dataclass
class SemigroupSample:
    generators: list
    word_length: int = 3
    seed: int = 0
    products: dict = field(default_factory=dict)
    scales: dict = field(default_factory=dict)

    def word(self, key: tuple) -> Elem:
        if key not in self.products:
            e = Elem(self.generators[0].ambient, ())
            for k in key:
                e = e * self.generators[k]
            self.products[key] = e
        return self.products[key]

    def scale_of(self, key: tuple) -> int:
        if key not in self.scales:
            self.scales[key] = scale(self.word(key))
        return self.scales[key]

    def random_word(self, rng: random.Random) -> tuple:
        n = rng.randint(1, self.word_length)
        return tuple(rng.randrange(len(self.generators)) for _ in range(n))


@dataclass(frozen=True)
class PairResult:
    left: tuple
    right: tuple
    s_lhs: int
    s_rhs: int

    @property
    def multiplicative(self) -> bool:
        return self.s_lhs == self.s_rhs

    def machine(self) -> str:
        ids = ".".join(map(str, self.left)) + "," + ".".join(map(str, self.right))
        verdict = "mult" if self.multiplicative else "nonmult"
        return f"pair={ids} s_lhs={self.s_lhs} s_rhs={self.s_rhs} verdict={verdict}"


@dataclass
class MultReport:
    pairs: list
    counterexample: PairResult | None
    capped: list

    @property
    def passed(self) -> bool:
        return self.counterexample is None


def check_scale_multiplicative(sample: SemigroupSample, samples: int = 20,
                               word_length: int | None = None) -> MultReport:
    """s(w1 w2) == s(w1) s(w2) over seeded random pairs of words, stopping at the first failure."""
    if word_length is not None:
        sample.word_length = word_length
    rng = random.Random(sample.seed)
    pairs, capped = [], []
    for _ in range(samples):
        a, b = sample.random_word(rng), sample.random_word(rng)
        try:
            r = PairResult(a, b, sample.scale_of(a + b), sample.scale_of(a) * sample.scale_of(b))
        except CapExceeded as exc:
            capped.append((a, b, str(exc)))
            continue
        pairs.append(r)
        if not r.multiplicative:
            return MultReport(pairs, r, capped)
    return MultReport(pairs, None, capped)


# ---- the negative witness -----------------------------------------------------

@dataclass
class NegativeWitness:
    g: Elem
    h: Elem
    shifted: Elem
    shift_index: int
    s_product: int
    s_shifted: int
    s_h: int

    @property
    def strict(self) -> bool:
        return self.s_product > self.s_shifted * self.s_h


def negative_witness(g: Elem, h: Elem, depth: int | None = None) -> NegativeWitness:
    """For hyperbolic g, h with the same attracting end and h not asymptotic to g,
    build g_l = shift_element(g, v_l) and compute s(g_l h) against s(g_l) s(h)."""
    same = ends_equal(g, h, depth)
    if not same.is_true:
        raise ValueError(f"attracting ends not certified equal ({same.value})")
    if asymptotic(g, h, depth).is_true:
        raise ValueError("h is asymptotic to g")
    n = 1
    while g.power(n).length <= g.power(n).sing_depth():
        n += 1
    gg = g.power(n) if n > 1 else g
    d = g.ambient.degree
    # v_0: far enough along axis(gg) that every relevant singular vertex projects behind it
    marks = set(h.singularities()) | set(gg.singularities()) | {h.eval(s) for s in gg.singularities()}
    t0 = max((gg.projection_position(u) for u in marks), default=0)
    h_marks = [h.projection_position(u) for u in marks]

    def ok(t):
        x = gg.axis_point(t)
        if h.dist_to_axis(x) or h.dist_to_axis(gg.axis_point(t + 1)):
            return False
        return all(q <= h.axis_position(x) for q in h_marks)

    while not ok(t0):
        t0 += 1
    sg, sh = scale(gg), scale(h)
    Dg, lh = gg.sing_depth(), h.length
    l = Dg + lh + 1
    while (d - 1) ** (l - Dg - lh) <= sg * sh:
        l += 1
    gl = shift_element(gg, gg.axis_point(t0 + l))
    prod = gl * h
    return NegativeWitness(gg, h, gl, l, scale(prod), scale(gl), sh)
