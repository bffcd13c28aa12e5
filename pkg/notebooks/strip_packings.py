"""
Strip packings for n = 1..26
============================

Each integer n gives a reflection group acting on the lattice with Gram
matrix J_n.  The orbit of the line y = 0 is a circle packing squeezed between
the lines y = 0 and y = 2, periodic in x with period 2 sqrt(n).
"""

from __future__ import annotations

import math
from collections import Counter

from packgame.catalog import preset
from packgame.document import default_strip_window, document_from_packing
from packgame.orbit import check_packing_property, preset_orbit
from packgame.render import RenderSpec, render_svg

# n = 1 is the classical Apollonian strip: unit circles at even integers,
# curvature 4 between them, and so on
pk = preset_orbit(preset(1), 30, window=(0, 2))
print(sorted(pk.curvatures()))

# every pair of circles is tangent (product 2) or disjoint (product > 2), and
# for an integer lattice the products are even
rep = check_packing_property(pk)
print(rep.ok, rep.mode, rep.pairs)

# the curvature spectrum grows with n; count circles per curvature in one period
for n in (2, 5, 7, 21):
    p = preset(n)
    orb = preset_orbit(p, 30, window=(0, math.sqrt(n)))
    spectrum = Counter(orb.curvatures())
    print(n, p.names(), dict(sorted(spectrum.items())[:8]))

# one SVG per n, in the strip window [-1, sqrt n + 1] x [-0.1, 2.1]
for n in (1, 7):
    doc = document_from_packing(preset_orbit(preset(n), 40, window=default_strip_window(n)), {"n": str(n)})
    svg = render_svg(doc, RenderSpec.for_strip(n))
    print(n, svg.count("<circle "), "circles,", svg.count("<line "), "lines")
