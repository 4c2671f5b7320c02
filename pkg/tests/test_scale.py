import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import (
    ALT4, C3, C4, D4, KLEIN_PAIR, SYM3, SYM4,
    elliptics, hyperbolics, line_translation, twisted,
)
from treescale.element import Ambient, Elem, Portrait, planted, random_element
from treescale.perm import Perm, enumerate_group
from treescale.scale import (
    FixatorSpec,
    count_M,
    cos_distance,
    enumerate_M,
    fixator_index,
    flex_tree,
    image_tree,
    initial_segment,
    m_set_bruteforce,
    make_pando,
    modular,
    path_index,
    restriction_count,
    scale,
    scale_aut_condition,
    scale_closed_form_uf,
    scale_flex,
    scale_report,
    uniscalar_witness,
    validate_pando,
)
from treescale.tree import EdgeRef, complete_hull, edge_subtree, star

SEEDS = st.integers(0, 10**6)


def growth_scale_oracle(g: Elem, n_max: int = 3) -> int:
    """Scale of a U(F) element from brute-force index growth.

    For any compact open U the indices a_n = [g^n U g^-n : g^n U g^-n ∩ U]
    grow like C * s(g)^n; with U the pando fixator the ratios a_{n+1}/a_n
    are checked to be constant over n = 1..n_max and that ratio is returned.
    """
    F = g.ambient.F
    P = make_pando(g).tree
    counts = [restriction_count(FixatorSpec(image_tree(g.power(n), P)), P, F)
              for n in range(1, n_max + 1)]
    ratios = {b / a for a, b in zip(counts, counts[1:])}
    assert len(ratios) == 1, counts
    r = ratios.pop()
    assert r == int(r)
    return int(r)


# ---- examples ---------------------------------------------------------------

@pytest.mark.parametrize("F,d", [(SYM3, 3), (SYM4, 4)])
def test_translation_scale(F, d):
    t = line_translation(Ambient.make(F))
    for l in (1, 2, 3):
        assert scale(t.power(l)) == (d - 1) ** l
        assert scale_closed_form_uf(t.power(l)) == (d - 1) ** l


def test_c3_identity_local_translation():
    amb = Ambient.make(C3)
    ident = Perm([0, 1, 2])
    st3 = star((), 3)
    g = Elem(amb, [(Portrait(amb, (), (0, 1), st3, {v: ident for v in st3.vertices}), 1)])
    assert g.is_hyperbolic
    assert scale(g) == 1 == scale_closed_form_uf(g)


def test_elliptic_scale_is_one(sym3, a4s4):
    for g in elliptics(sym3, 1, 10) + elliptics(a4s4, 2, 10, twists=1):
        assert scale_report(g).scale == 1
        assert modular(g) == 1


def test_report_format(sym3):
    rep = scale_report(line_translation(sym3))
    assert rep.machine() == "scale=2 numerator=2 m_size=1 pando_int=1"


def test_uniscalar_witness():
    w = uniscalar_witness(Ambient.make(C4))
    assert w is not None and w.is_hyperbolic and scale(w) == 1
    assert uniscalar_witness(Ambient.make(SYM3)) is None
    with pytest.raises(ValueError):
        Ambient.make(enumerate_group([Perm([1, 0])]))


def test_modular(sym3, a4s4):
    t = line_translation(sym3)
    assert modular(t) == 1
    g = twisted(a4s4, (0, 1))
    assert modular(g.power(2)) == modular(g) ** 2
    assert isinstance(modular(g), Fraction)


# ---- pandos -----------------------------------------------------------------

def test_pando_examples(sym3, a4s4):
    p = make_pando(line_translation(sym3))
    assert p.depth == 1 and not validate_pando(p)
    g = twisted(a4s4, (0, 1))
    p = make_pando(g)
    assert g.singularities() <= p.tree.internal
    assert initial_segment(p).vertices <= p.tree.vertices


def test_slab_additivity(a4s4):
    for g in [twisted(a4s4, (0, 1)), twisted(a4s4, (2,)), line_translation(a4s4).power(2)]:
        p = make_pando(g)
        P, gP = p.tree, image_tree(g, p.tree)
        assert len(initial_segment(p).internal) == len(P.union(gP).internal) - len(gP.internal)


def test_pando_shared_by_square(a4s4):
    g = twisted(a4s4, (0, 1))
    # S(g^2) also contains g^-1 S(g), one period further back
    p = make_pando(g, extra_back=2, extra_fwd=2)
    g2 = g.power(2)
    q = type(p)(p.tree, g2, p.depth, p.axis_window, p.window_positions)
    assert not validate_pando(q)


def test_pando_rejects_shallow_depth(a4s4):
    g = twisted(a4s4, (0, 1))
    with pytest.raises(ValueError):
        make_pando(g, D=g.sing_depth())


# ---- fixator indices --------------------------------------------------------

def test_fixator_index_examples():
    T = star((), 3)
    assert fixator_index(T, T, SYM3) == 1
    e = edge_subtree(EdgeRef((), 0), 3)
    assert restriction_count(FixatorSpec(e), star((), 3), SYM3) == 2
    assert restriction_count(FixatorSpec(T), edge_subtree(EdgeRef((), 0), 3), SYM3) == 1


@pytest.mark.parametrize("F", [SYM3, C3])
@pytest.mark.parametrize("k", [1, 2, 3])
def test_path_index_coset_calc(F, k):
    path = [(), (0,), (0, 1), (0, 1, 2), (0, 1, 2, 0)][: k + 2]
    e0 = edge_subtree(EdgeRef.between(path[0], path[1]), 3)
    ek = edge_subtree(EdgeRef.between(path[k], path[k + 1]), 3)
    assert restriction_count(FixatorSpec(e0), ek, F) == path_index(path, F)


def test_cos_distance():
    e = FixatorSpec(edge_subtree(EdgeRef((), 0), 3))
    f = FixatorSpec(edge_subtree(EdgeRef((0,), 1), 3))
    assert cos_distance(e, e, SYM3) == (1, 1)
    assert cos_distance(e, f, SYM3) == (2, 2)


def random_word(rng, d: int, n: int) -> tuple:
    w: list = []
    for _ in range(n):
        a = rng.randrange(d)
        while w and w[-1] == a:
            a = rng.randrange(d)
        w.append(a)
    return tuple(w)


def nested_instances(d: int, seed: int, n: int) -> list:
    """Pairs small ⊆ big of complete subtrees with |Int(big)| <= 6."""
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        pts = [()] + [random_word(rng, d, rng.randint(1, 3)) for _ in range(rng.randint(1, 2))]
        small = complete_hull(pts, d)
        big = small
        for _ in range(rng.randint(0, 2)):
            big = big.union(star(rng.choice(sorted(big.leaves)), d))
        if len(big.internal) <= 6:
            out.append((big, small))
    return out


@pytest.mark.parametrize("F", [SYM3, C3, SYM4, ALT4, D4, KLEIN_PAIR])
def test_fixator_index_vs_restriction(F):
    for big, small in nested_instances(F.degree, F.order, 8):
        assert fixator_index(big, small, F) == restriction_count(FixatorSpec(small), big, F)


# ---- the scale pipeline against brute force ----------------------------------

@pytest.mark.parametrize("F", [SYM3, ALT4, D4, C4])
def test_scale_vs_growth_oracle(F):
    amb = Ambient.make(F)
    for g in hyperbolics(amb, 17, 4):
        if len(make_pando(g).tree.internal) > 6:
            continue
        assert scale(g) == growth_scale_oracle(g)


def m_instances(amb, seed, n):
    for g in hyperbolics(amb, seed, n, twists=1):
        P0 = initial_segment(make_pando(g))
        if len(P0.internal) <= 6:
            yield g, P0


def test_count_M_vs_bruteforce(a4s4):
    seen = 0
    for g, P0 in m_instances(a4s4, 5, 12):
        allowed = scale_aut_condition(g, P0)
        c = count_M(g, P0, allowed)
        assert c == len(enumerate_M(g, P0, allowed))
        H = 2 + len(P0.vertices)
        assert c == m_set_bruteforce(g, P0, range(H, H + 3))
        seen += 1
    assert seen >= 5


def test_twist_raises_scale_consistently(a4s4):
    g = twisted(a4s4, (2,))
    rep = scale_report(g)
    assert rep.numerator == rep.scale * rep.m_size
    for D in (g.sing_depth() + 1, g.sing_depth() + 2):
        for eb, ef in ((0, 0), (1, 0), (0, 2)):
            assert scale(g, make_pando(g, D, eb, ef)) == rep.scale


# ---- flex windows ---------------------------------------------------------------

def test_flex_trivial_lambda(sym3, sym4):
    for amb, d in ((sym3, 3), (sym4, 4)):
        t = line_translation(amb)
        for l in (1, 2):
            g = t.power(l)
            assert scale_flex(g, g.axis_point(0)) == (d - 1) ** l


def test_flex_matches_pipeline(a4s4):
    g = twisted(a4s4, (0, 1))
    s = scale(g)
    t0 = max(g.projection_position(v) for v in g.singularities()) + 1
    vals = {scale_flex(g, g.axis_point(t0 + k)) for k in (0, 1, 3)}
    assert vals == {s}
    T = flex_tree(g, g.axis_point(t0), g.sing_depth() + 1)
    assert T.is_valid()


def test_flex_rejects_bad_window(a4s4):
    g = twisted(a4s4, (0, 1))
    with pytest.raises(ValueError):
        scale_flex(g, g.axis_point(-3))


# ---- laws ---------------------------------------------------------------------------

@given(SEEDS)
def test_power_and_conjugation_laws(seed):
    amb = Ambient.make(ALT4, SYM4)
    rng = random.Random(seed)
    g = hyperbolics(amb, seed, 1, twists=1)[0]
    x = random_element(amb, rng, 1, twists=1)
    s = scale(g)
    assert scale(g.power(2)) == s * s
    assert scale(g.conjugate(x)) == s


@given(SEEDS)
def test_closed_form_random(seed):
    amb = Ambient.make([SYM3, ALT4, D4][seed % 3])
    g = hyperbolics(amb, seed, 1)[0]
    assert scale(g) == scale_closed_form_uf(g)


def test_distinct_stabilizers_force_growth(sym3):
    assert all(scale(g) > 1 for g in hyperbolics(sym3, 3, 15))


def test_f_prime_independence():
    # a twist that lies in both Sym(4) and the Young subgroup of the Klein pair
    F = KLEIN_PAIR
    big, cut = Ambient.make(F, SYM4), Ambient.make(F, F.young_subgroup())
    twist = Perm([1, 0, 2, 3])
    for amb_pair in ((big, cut),):
        vals = []
        for amb in amb_pair:
            rng = random.Random(4)
            g = random_element(amb, rng, 1)
            while not g.is_hyperbolic:
                g = random_element(amb, rng, 1)
            h = planted(amb, g, g.axis_point(0), twist)
            vals.append((scale(g), scale(h), scale(h.inverse())))
        assert vals[0] == vals[1]
