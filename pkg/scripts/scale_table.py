"""Print scales of random hyperbolic elements for a few local actions.

For plain U(F) elements the pando pipeline is compared with the closed form;
for twisted elements the flex-window value is shown next to it.

    python3 scripts/scale_table.py --count 8 --seed 0
"""

import argparse
import random

from treescale.element import Ambient, random_element
from treescale.perm import Perm, alternating_group, enumerate_group, symmetric_group
from treescale.scale import scale_closed_form_uf, scale_flex, scale_report

GROUPS = {
    "Sym3": (symmetric_group(3), None),
    "Sym4": (symmetric_group(4), None),
    "Alt4<Sym4": (alternating_group(4), symmetric_group(4)),
    "D4": (enumerate_group([Perm([1, 2, 3, 0]), Perm([0, 3, 2, 1])]), None),
}


def rows(name: str, count: int, seed: int):
    F, Fp = GROUPS[name]
    amb = Ambient.make(F, Fp)
    twists = 0 if Fp is None else 1
    rng = random.Random(seed)
    done = 0
    while done < count:
        g = random_element(amb, rng, 1, twists=twists)
        if not g.is_hyperbolic:
            continue
        rep = scale_report(g)
        if twists:
            t0 = max((g.projection_position(s) for s in g.singularities()), default=0) + 1
            other = scale_flex(g, g.axis_point(t0))
        else:
            other = scale_closed_form_uf(g)
        yield (name, g.length, len(g.singularities()), rep.pando_int, rep.scale, other, rep.numerator, rep.m_size)
        done += 1


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--count", type=int, default=6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--groups", nargs="*", default=list(GROUPS))
    args = ap.parse_args()
    head = ("group", "len", "sing", "|Int|", "scale", "check", "numer", "|M|")
    print("  ".join(f"{h:>9}" for h in head))
    for name in args.groups:
        for row in rows(name, args.count, args.seed):
            print("  ".join(f"{x!s:>9}" for x in row))


if __name__ == "__main__":
    main()
