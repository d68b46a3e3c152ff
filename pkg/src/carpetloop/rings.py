"""Ready-made loops around the central square.

The corner coordinate has ternary digits (0, 2, 2, ...), so every cell
the rectangle passes through has an even digit at every scale and is
never removed, making the ring valid at any depth of any pattern.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DegeneratePosition
from .freegroup import puncture_word
from .grid import DefiningSequence, PolyLoop, validate_loop


def _corner(depth: int) -> Fraction:
    a = 0
    for _ in range(depth - 1):
        a = 3 * a + 2
    return Fraction(2 * a + 1, 2 * 3**depth)


def central_ring(seq: DefiningSequence) -> PolyLoop:
    """A rectangle once around the central removed square."""
    c = _corner(seq.depth)
    return PolyLoop(((c, c), (1 - c, c), (1 - c, 1 - c), (c, 1 - c)))


def subdivided_ring(seq: DefiningSequence, vertices: int) -> PolyLoop:
    """The central ring with edges subdivided to roughly the given size.

    Subdivision points could land on a grid line or on the counting ray
    of a puncture, so the count per side is nudged until the loop both
    validates and admits puncture words at every level.
    """
    base = central_ring(seq)
    corners = list(base.vertices)
    m0 = max(1, vertices // 4)
    for m in range(m0, m0 + 60):
        verts = []
        for j in range(4):
            p = corners[j]
            q = corners[(j + 1) % 4]
            for k in range(m):
                t = Fraction(k, m)
                verts.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        loop = PolyLoop(tuple(verts))
        if not validate_loop(loop, seq, seq.depth).ok:
            continue
        try:
            for i in range(1, seq.depth + 1):
                puncture_word(loop, seq, i)
        except DegeneratePosition:
            continue
        return loop
    raise AssertionError("no subdivision of the central ring validates")
