"""
When it is not a packing
========================

Two ways to break the construction: a Gram matrix whose lattice has vectors
of norm -4 (n = 3/2), and a wall moved to a place where the group stops being
discrete (the x = 0 wall of n = 7 shifted by 1/3).
"""

from __future__ import annotations

from fractions import Fraction

from packgame.blend import check_compatibility, overlap_witness, shift_wall
from packgame.catalog import preset
from packgame.lorentz import gram, mod8_obstruction, represents_norm

# for integer n the values x.x mod 8 never reach 4, so no norm -4 vectors exist
print(all(mod8_obstruction(gram(n)) for n in range(1, 27)))

# for n = 3/2 a small one exists: its circle would cross a norm -2 circle
w = represents_norm(gram(Fraction(3, 2)), -4, 10)
print(w, w.norm())

# shift 1 works, shift 1/3 does not: a short word already produces two
# circles with product between -2 and 2, confirmed exactly in Q(sqrt 7)
print(overlap_witness(shift_wall(preset(7), 1)))
wit = overlap_witness(shift_wall(preset(7), Fraction(1, 3)))
print(wit.describe())

rep = check_compatibility(shift_wall(preset(7), Fraction(1, 3)))
print(rep.ok, [f[:2] for f in rep.faces][:3])
