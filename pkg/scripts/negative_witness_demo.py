"""Show that same-end elements need not multiply scales.

A translation is pushed along a twisted element until the two share an
attracting end without being asymptotic; the product's scale then exceeds the
product of the scales.
"""

from treescale.directions import asymptotic, ends_equal
from treescale.element import Ambient, planted, translation_along
from treescale.perm import Perm, alternating_group, symmetric_group
from treescale.scale import scale
from treescale.semigroup import negative_witness


def main():
    amb = Ambient.make(alternating_group(4), symmetric_group(4))
    t = translation_along(amb, (), [1, 3], [0, 3], name="t")
    g = planted(amb, t, (), Perm([0, 1, 3, 2]), name="g")
    w = negative_witness(t, g)
    print(f"ends equal:      {ends_equal(w.shifted, g).machine()}")
    print(f"asymptotic:      {asymptotic(w.shifted, g).machine()}")
    print(f"shift index:     {w.shift_index}")
    print(f"s(shifted)={w.s_shifted} s(g)={w.s_h} product={w.s_shifted * w.s_h}")
    print(f"s(shifted*g)={w.s_product} (recomputed {scale(w.shifted * g)})")
    print(f"strict:          {w.strict}")


if __name__ == "__main__":
    main()
