"""Finite permutation groups on the colour set {0, ..., d-1}.

Groups are small (degree at most 12 by default) so everything is done by
full enumeration.  Indices, stabilisers and coset tests are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from math import factorial
from typing import Iterable, Sequence

MAX_DEGREE = 12
MAX_ORDER = 10**6


class CapExceeded(RuntimeError):
    """A resource cap was hit; the computation refuses to approximate."""

    def __init__(self, what: str, limit: int):
        super().__init__(f"cap exceeded: {what} (limit {limit})")
        self.what = what
        self.limit = limit


class Perm(tuple):
    """A permutation in one-line notation: ``p[i]`` is the image of ``i``.

    Products compose right to left, so ``(p * q)(x) == p(q(x))``.
    """

    __slots__ = ()

    def __new__(cls, images: Iterable[int]):
        return super().__new__(cls, images)

    @classmethod
    def identity(cls, degree: int) -> Perm:
        return cls(range(degree))

    @classmethod
    def parse(cls, text: str) -> Perm:
        images = [int(tok) for tok in text.split()]
        p = cls(images)
        if not p.is_valid():
            raise ValueError(f"not a permutation: {text!r}")
        return p

    @property
    def degree(self) -> int:
        return len(self)

    def is_valid(self) -> bool:
        return sorted(self) == list(range(len(self)))

    def __call__(self, x: int) -> int:
        return self[x]

    def __mul__(self, other: Perm) -> Perm:  # type: ignore[override]
        return Perm(self[i] for i in other)

    def inverse(self) -> Perm:
        inv = [0] * len(self)
        for i, x in enumerate(self):
            inv[x] = i
        return Perm(inv)

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self))

    def __str__(self) -> str:
        return " ".join(str(x) for x in self)

    def __repr__(self) -> str:
        return f"Perm([{str(self)}])"


@dataclass(frozen=True, eq=False)
class PermGroup:
    degree: int
    generators: tuple[Perm, ...]
    elements: tuple[Perm, ...]
    _members: frozenset = field(repr=False, default=frozenset())
    _cache: dict = field(repr=False, default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_members", frozenset(self.elements))

    # equality as element sets
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PermGroup):
            return NotImplemented
        return self.degree == other.degree and self._members == other._members

    def __hash__(self) -> int:
        return hash((self.degree, self._members))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, p: object) -> bool:
        return p in self._members

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def identity(self) -> Perm:
        return Perm.identity(self.degree)

    def issubset(self, other: PermGroup) -> bool:
        return self._members <= other._members

    def subgroup_where(self, pred) -> PermGroup:
        elems = tuple(p for p in self.elements if pred(p))
        return PermGroup(self.degree, elems, elems)

    def point_stabilizer(self, a: int) -> PermGroup:
        key = ("stab", a)
        if key not in self._cache:
            self._cache[key] = self.subgroup_where(lambda p: p[a] == a)
        return self._cache[key]

    def orbit(self, a: int) -> frozenset[int]:
        return frozenset(p[a] for p in self.elements)

    def orbits(self) -> list[frozenset[int]]:
        seen: set[int] = set()
        out = []
        for a in range(self.degree):
            if a not in seen:
                orb = self.orbit(a)
                seen |= orb
                out.append(orb)
        return out

    def is_transitive(self) -> bool:
        return len(self.orbit(0)) == self.degree if self.degree else True

    def is_2transitive(self) -> bool:
        d = self.degree
        if d < 2:
            return False
        pairs = {(p[0], p[1]) for p in self.elements}
        return len(pairs) == d * (d - 1)

    def index_factor(self, a: int, b: int) -> int:
        """|G_a| / |G_a ∩ G_b|, i.e. the length of the G_a-orbit of b."""
        ga = self.point_stabilizer(a)
        both = sum(1 for p in ga.elements if p[b] == b)
        assert ga.order % both == 0
        return ga.order // both

    def has_distinct_point_stabilizers(self) -> bool:
        stabs = [self.point_stabilizer(a)._members for a in range(self.degree)]
        return len(set(stabs)) == self.degree

    def young_subgroup(self) -> PermGroup:
        """Direct product of the symmetric groups on the orbits of this group."""
        orbs = self.orbits()
        size = 1
        for o in orbs:
            size *= factorial(len(o))
        if size > MAX_ORDER:
            raise CapExceeded("young subgroup order", MAX_ORDER)
        gens = []
        for o in orbs:
            pts = sorted(o)
            for x, y in zip(pts, pts[1:]):
                img = list(range(self.degree))
                img[x], img[y] = y, x
                gens.append(Perm(img))
        return enumerate_group(gens, degree=self.degree)

    def minimal_map(self, b: int, a: int) -> Perm | None:
        """Lexicographically least element sending ``b`` to ``a``, or None."""
        key = ("mm", b, a)
        if key not in self._cache:
            # elements are sorted, so the first hit is the lex-minimum
            self._cache[key] = next((p for p in self.elements if p[b] == a), None)
        return self._cache[key]

    def maps_with_pins(self, pins: Sequence[tuple[int, int]]) -> list[Perm]:
        key = ("pins", tuple(sorted(pins)))
        if key not in self._cache:
            self._cache[key] = [p for p in self.elements if all(p[x] == y for x, y in pins)]
        return self._cache[key]

    def intersection(self, other: PermGroup) -> PermGroup:
        return self.subgroup_where(lambda p: p in other)


def _sorted_tuple(elems: Iterable[Perm]) -> tuple[Perm, ...]:
    return tuple(sorted(elems))


def enumerate_group(generators: Sequence[Perm], degree: int | None = None,
                    max_degree: int = MAX_DEGREE, max_order: int = MAX_ORDER) -> PermGroup:
    """Close ``generators`` under composition; elements come out sorted."""
    gens = [Perm(g) for g in generators]
    if degree is None:
        if not gens:
            raise ValueError("degree required when there are no generators")
        degree = len(gens[0])
    if any(len(g) != degree for g in gens):
        raise ValueError("generators have mismatched degree")
    if degree > max_degree:
        raise CapExceeded("degree", max_degree)
    for g in gens:
        if not g.is_valid():
            raise ValueError(f"not a permutation: {g}")
    ident = Perm.identity(degree)
    seen = {ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in gens:
                q = g * p
                if q not in seen:
                    seen.add(q)
                    nxt.append(q)
                    if len(seen) > max_order:
                        raise CapExceeded("group order", max_order)
        frontier = nxt
    return PermGroup(degree, tuple(gens), _sorted_tuple(seen))


def symmetric_group(d: int) -> PermGroup:
    if d > 8:
        raise CapExceeded("symmetric group degree", 8)
    elems = _sorted_tuple(Perm(p) for p in permutations(range(d)))
    return PermGroup(d, elems[:0], elems)


def alternating_group(d: int) -> PermGroup:
    def even(p):
        seen, parity = set(), 0
        for i in range(d):
            if i in seen:
                continue
            j, length = i, 0
            while j not in seen:
                seen.add(j)
                j = p[j]
                length += 1
            parity ^= (length - 1) & 1
        return parity == 0

    elems = _sorted_tuple(Perm(p) for p in permutations(range(d)) if even(p))
    return PermGroup(d, (), elems)


def cyclic_group(d: int) -> PermGroup:
    return enumerate_group([Perm(list(range(1, d)) + [0])], degree=d)


# ---- cosets ---------------------------------------------------------------

@dataclass(frozen=True)
class LambdaCoset:
    """The left coset ``rep * F`` with ``rep`` its lex-least member."""

    representative: Perm
    group: PermGroup = field(compare=False, hash=False, repr=False)

    def is_trivial(self) -> bool:
        return self.representative.is_identity()

    def members(self) -> list[Perm]:
        return sorted(self.representative * f for f in self.group.elements)

    def __contains__(self, p: object) -> bool:
        return isinstance(p, Perm) and (self.representative.inverse() * p) in self.group

    def __str__(self) -> str:
        return f"[{self.representative}]F"


def coset(tau: Perm, F: PermGroup) -> LambdaCoset:
    """Canonical form of ``tau * F``."""
    if len(tau) != F.degree:
        raise ValueError("degree mismatch")
    rep = min(tau * f for f in F.elements)
    return LambdaCoset(rep, F)


def coset_product(sigma: Perm, c: LambdaCoset) -> LambdaCoset:
    """``sigma * (tau F)``; left multiplication is well defined on left cosets."""
    return coset(sigma * c.representative, c.group)


def coset_inverse(c: LambdaCoset) -> frozenset[Perm]:
    """The right coset ``F tau^-1`` as an explicit set."""
    inv = c.representative.inverse()
    return frozenset(f * inv for f in c.group.elements)


def coset_quotient(c1: LambdaCoset, c2: LambdaCoset) -> frozenset[Perm]:
    """The set ``tau1 F tau2^-1`` for cosets ``tau1 F`` and ``tau2 F``."""
    t1, t2inv = c1.representative, c2.representative.inverse()
    return frozenset(t1 * f * t2inv for f in c1.group.elements)


def double_coset_contains(tau: Perm, s1: Perm, s2: Perm, F: PermGroup) -> bool:
    """Whether ``tau`` lies in ``s1 F s2``."""
    return (s1.inverse() * tau * s2.inverse()) in F
