import random

import pytest
from hypothesis import settings

from treescale.element import Ambient, planted, random_element, translation_along
from treescale.perm import Perm, alternating_group, cyclic_group, enumerate_group, symmetric_group

settings.register_profile("repo", deadline=None, max_examples=40)
settings.load_profile("repo")

SYM3 = symmetric_group(3)
SYM4 = symmetric_group(4)
ALT4 = alternating_group(4)
C3 = cyclic_group(3)
C4 = cyclic_group(4)
# C4 extended by a reflection: the dihedral group of the square
D4 = enumerate_group([Perm([1, 2, 3, 0]), Perm([0, 3, 2, 1])])
KLEIN_PAIR = enumerate_group([Perm([1, 0, 3, 2])])

ODD_TWIST = Perm([0, 1, 3, 2])  # in Sym(4) but not Alt(4); fixes 0 and 1


def line_translation(amb: Ambient, name: str = "t"):
    """Unit translation along the line alternating colours 1 and 0 through the root."""
    d = amb.degree
    return translation_along(amb, (), [1, d - 1], [0, d - 1], name=name)


def twisted(amb: Ambient, vertex=(), twist: Perm = ODD_TWIST, name: str = "g"):
    return planted(amb, line_translation(amb), vertex, twist, name=name)


def hyperbolics(amb: Ambient, seed: int, n: int, twists: int = 0, radius: int = 1) -> list:
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        g = random_element(amb, rng, radius, twists=twists)
        if g.is_hyperbolic:
            out.append(g)
    return out


def elliptics(amb: Ambient, seed: int, n: int, twists: int = 0) -> list:
    rng = random.Random(seed)
    out = []
    while len(out) < n:
        g = random_element(amb, rng, 1, twists=twists)
        if not g.is_hyperbolic:
            out.append(g)
    return out


@pytest.fixture(scope="session")
def sym3():
    return Ambient.make(SYM3)


@pytest.fixture(scope="session")
def sym4():
    return Ambient.make(SYM4)


@pytest.fixture(scope="session")
def a4s4():
    return Ambient.make(ALT4, SYM4)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
