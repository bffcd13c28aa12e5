"""
Blends with the Apollonian property
===================================

Moving the wall x = 0 of the n = 7 domain to x = -1 gives a new group whose
orbit is still a packing, now with every circle in a chain of four mutually
tangent ones.  Gluing the n = 1 domain to another along x = 0 does the same.
"""

from __future__ import annotations

import math

from packgame.blend import check_compatibility, glue, shift_wall
from packgame.catalog import preset
from packgame.exact import simplify
from packgame.orbit import (
    certify_clusters,
    check_apollonian_property,
    check_packing_property,
    tangency_graph,
)

r7 = math.sqrt(7)
blend = shift_wall(preset(7), 1)
print(blend.names)
print(check_compatibility(blend).ok)

# exact orbit in Q(sqrt 7)
pk = blend.orbit(50, window=(-1, r7 + 1), exact=True)
print(len(pk), check_packing_property(pk).ok)

# curvatures are no longer all integers
odd = [simplify(k) for k in pk.curvatures() if not isinstance(simplify(k), int)]
print(len(odd), [str(k) for k in odd[:4]])

# four-cliques: in the truncated graph where possible, otherwise the seed's
# clique is carried along the circle's word and checked exactly
adj = tangency_graph(pk)
rep = check_apollonian_property(pk, adj, interior_bound=50, interior_window=(-1, r7))
certs = certify_clusters(pk, rep.beyond_bound, adj)
print(len(rep.verified), len(rep.failures), sum(c.ok for c in certs), len(rep.unverifiable_near_boundary))

# glue(1, n) along x = 0: the n = 1 half supplies the cliques
for n in (2, 3, 5, 7):
    g = glue(preset(1), preset(n), "v1")
    orb = g.orbit(30)
    adj = tangency_graph(orb)
    rep = check_apollonian_property(orb, adj, interior_bound=30)
    print(n, len(orb), len(rep.verified), len(rep.failures), len(rep.beyond_bound))
