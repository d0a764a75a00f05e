"""Symbolic systems and Spencer cohomology with exact arithmetic.

The kernel of the symbol at a point, together with its prolongations,
forms the symbolic system g_q.  The Spencer complex pairs these spaces
with exterior powers; the dimensions of its cohomology measure the
obstructions hidden in the symbol.  For the wave operator the whole
table vanishes except two one-dimensional cells, which is the symbol-
level reason the equation is formally well behaved.
"""

from fractions import Fraction as Q

from jetforge import jetcalc as jc
from jetforge import spencer as sp
from jetforge import symexpr as sx

h = jc.DiffOp(2, 1, 2, [sx.jet(1, (2, 0)) - sx.jet(1, (0, 2))])
chart = h.chart()
jets = {(1, I): Q(0) for I in chart.jet_indices()}
a = jc.JetPoint(chart, (Q(0), Q(0)), jets)

g = sp.symbolic_system_at(h, a)
print("dim g_q for the wave operator:")
for q in range(0, 6):
    print("  q=%d: %d" % (q, g.dim_g(q)))

table = sp.cohomology_dims(g, 2, 4)
print("\nSpencer cohomology dimensions H^{p,q}:")
header = "      " + "".join("q=%-4d" % q for q in range(5))
print(header)
for p in range(3):
    row = "  p=%d " % p
    for q in range(5):
        row += "%-6d" % table[(p, q)]
    print(row)
nonzero = {k: v for k, v in table.items() if v}
assert nonzero == {(0, 0): 1, (1, 1): 1}
print("only H^{0,0} and H^{1,1} survive, each of dimension 1")

# the differential really is a complex: delta composed with itself is zero
for p in range(0, 2):
    for q in range(2, 4):
        first = sp.restricted_delta(g, p, q)
        if first.nrows and first.ncols:
            second = sp.spencer_delta(p + 1, q - 1, 2, 1)
            assert second.matmul(first).is_zero()
print("delta . delta = 0 on all computed cells")
