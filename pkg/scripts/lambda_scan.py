"""List the nontrivial values of the lambda cocycle near the axis of an element.

    python3 scripts/lambda_scan.py scripts/data/a4_twist.elem --steps 4
"""

import argparse

from treescale.cli import parse_element
from treescale.directions import lambda_coset, lambda_window
from treescale.tree import format_vertex


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("element")
    ap.add_argument("--steps", type=int, default=3)
    args = ap.parse_args()
    g = parse_element(args.element)
    hits = 0
    for v in sorted(lambda_window(g, args.steps), key=lambda v: (len(v), v)):
        c, H = lambda_coset(g, v)
        if not c.is_trivial():
            rep = ".".join(map(str, c.representative))
            print(f"vertex={format_vertex(v)} lambda={rep} H={H} dist_to_axis={g.dist_to_axis(v)}")
            hits += 1
    print(f"nontrivial={hits}")


if __name__ == "__main__":
    main()
