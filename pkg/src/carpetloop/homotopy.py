"""Explicit null-homotopies over cancellation diagrams.

The disk is modeled by an inscribed rational polygon: every parameter of
interest (crossing endpoints, loop vertices, quarter points) becomes a
circle vertex via the rational quarter-arc map, diagram pairs become
pairs of chords, and the chords cut the polygon into convex 2-cells.
Each cell is triangulated from its centroid and filled affinely into a
target region of the space; a cell whose target is a non-convex plus of
grid squares gets a radial clamp toward the home square's center, which
is continuous because the region is star-shaped about that point.

Outside the polygon, points collapse radially onto its boundary, and
points exactly on the unit circle evaluate through the inverse circle
map, so the boundary condition holds exactly at every parameter.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from .errors import (
    AssignmentFailure,
    IncompatibleHomotopies,
    LevelOutOfRange,
    MalformedDiagram,
)
from .grid import Corridor, DefiningSequence, PolyLoop, Point, _pow3
from .traces import CancellationDiagram, TraceWord, diagram_valid
from .words import CyclicWord, Letter, encode_word, _mod1

QUARTERS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4))


# ---------------------------------------------------------------------------
# Rational circle


def circle_point(t: Fraction) -> Point:
    """Monotone rational parameterization of the unit circle, t in [0,1)."""
    t = _mod1(t)
    q = (4 * t).numerator // (4 * t).denominator
    u = 4 * t - q
    den = 1 + u * u
    x, y = (1 - u * u) / den, 2 * u / den
    for _ in range(q):
        x, y = -y, x
    return (x, y)


def circle_param(p: Point) -> Fraction:
    """Inverse of circle_point on exactly-on-circle rational points."""
    x, y = p
    if x * x + y * y != 1:
        raise ValueError(f"{p} is not on the unit circle")
    q = 0
    while not (x > 0 and y >= 0):
        x, y = y, -x
        q += 1
        if q > 3:
            raise AssertionError("rotation failed to normalize quadrant")
    u = y / (1 + x)
    return (q + u) / 4


# ---------------------------------------------------------------------------
# Small exact-geometry helpers


def _cross(o: Point, a: Point, b: Point) -> Fraction:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _centroid(points: Sequence[Point]) -> Point:
    n = len(points)
    return (
        sum(p[0] for p in points) / n,
        sum(p[1] for p in points) / n,
    )


def _point_in_convex(poly: Sequence[Point], p: Point) -> bool:
    """Closed membership in a CCW convex polygon."""
    n = len(poly)
    return all(_cross(poly[j], poly[(j + 1) % n], p) >= 0 for j in range(n))


def _point_in_triangle(tri: Sequence[Point], p: Point) -> bool:
    s0 = _cross(tri[0], tri[1], p)
    s1 = _cross(tri[1], tri[2], p)
    s2 = _cross(tri[2], tri[0], p)
    return (s0 >= 0 and s1 >= 0 and s2 >= 0) or (s0 <= 0 and s1 <= 0 and s2 <= 0)


def _affine_in_triangle(dom: Sequence[Point], val: Sequence[Point], p: Point) -> Point:
    (ax, ay), (bx, by), (cx, cy) = dom
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    u = ((p[0] - ax) * (cy - ay) - (p[1] - ay) * (cx - ax)) / det
    v = ((bx - ax) * (p[1] - ay) - (by - ay) * (p[0] - ax)) / det
    return (
        val[0][0] + u * (val[1][0] - val[0][0]) + v * (val[2][0] - val[0][0]),
        val[0][1] + u * (val[1][1] - val[0][1]) + v * (val[2][1] - val[0][1]),
    )


def _segments_cross(a: Point, b: Point, c: Point, d: Point) -> Optional[Point]:
    """Proper interior crossing point of two segments, else None.

    Shared endpoints and collinear contact return None; polygon chords
    never overlap collinearly because a line meets the circle twice.
    """
    if a == c or a == d or b == c or b == d:
        return None
    d1 = _cross(a, b, c)
    d2 = _cross(a, b, d)
    d3 = _cross(c, d, a)
    d4 = _cross(c, d, b)
    if ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != d2:
        t = d1 / (d1 - d2)
        return (c[0] + t * (d[0] - c[0]), c[1] + t * (d[1] - c[1]))
    return None


def _seg_point_candidates(a: Point, b: Point, c: Point, d: Point) -> list[Point]:
    """Intersection points of two closed segments, for overlay corners.

    Includes touching contacts and the endpoints of collinear overlap.
    """
    d1 = _cross(a, b, c)
    d2 = _cross(a, b, d)
    d3 = _cross(c, d, a)
    d4 = _cross(c, d, b)
    out = []
    if d1 == 0 and d2 == 0:
        # collinear: project onto the longer axis span
        axis = 0 if a[0] != b[0] else 1
        lo1, hi1 = sorted((a[axis], b[axis]))
        lo2, hi2 = sorted((c[axis], d[axis]))
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo <= hi:
            for v in {lo, hi}:
                for p in (a, b, c, d):
                    if p[axis] == v:
                        out.append(p)
                        break
        return out
    if (d1 >= 0) != (d2 >= 0) or d1 == 0 or d2 == 0:
        if (d3 >= 0) != (d4 >= 0) or d3 == 0 or d4 == 0:
            if d1 != d2:
                t = d1 / (d1 - d2)
                if 0 <= t <= 1:
                    out.append(
                        (c[0] + t * (d[0] - c[0]), c[1] + t * (d[1] - c[1]))
                    )
    return out


# ---------------------------------------------------------------------------
# Cell classification


@dataclass(frozen=True)
class CellType:
    level: int
    cell: tuple[int, int]
    kind: int  # number of corridors the cell lies in: 0, 1, or 2

    @property
    def rect(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        n = _pow3(self.level)
        a, b = self.cell
        return (Fraction(a, n), Fraction(a + 1, n), Fraction(b, n), Fraction(b + 1, n))


def classify_squares(seq: DefiningSequence, i: int) -> tuple[CellType, ...]:
    """Kept scale-i cells with their corridor count.

    A kept cell in an odd row lies in exactly one horizontal corridor,
    and symmetrically for columns, so the count is the coordinate parity
    sum: 0 free, 1 corridor interior, 2 junction.
    """
    seq.check_level(i)
    n = _pow3(i)
    out = []
    for a in range(n):
        for b in range(n):
            if seq.cell_in_space(a, b, i):
                out.append(CellType(i, (a, b), (a % 2) + (b % 2)))
    return tuple(out)


# ---------------------------------------------------------------------------
# Cellulation


@dataclass(frozen=True)
class Node:
    point: Point
    param: Optional[Fraction]  # set for circle vertices only


@dataclass(frozen=True)
class BandChord:
    band: int
    which: int  # 0 or 1 within the band
    a: int  # node index
    b: int


@dataclass(frozen=True)
class Band:
    index: int
    pair: tuple[int, int]
    corridor: Corridor
    sign_first: int


@dataclass(frozen=True)
class Face:
    nodes: tuple[int, ...]
    bands: tuple[int, ...]


@dataclass(frozen=True)
class Cellulation:
    params: tuple[Fraction, ...]
    nodes: tuple[Node, ...]
    faces: tuple[Face, ...]
    bands: tuple[Band, ...]
    chords: tuple[BandChord, ...]
    crossings: tuple[tuple[int, int, int], ...]  # (node, chord idx, chord idx)


def build_cellulation(
    word: CyclicWord,
    diagram: CancellationDiagram,
    params: Optional[Iterable[Fraction]] = None,
) -> Cellulation:
    """Cut the inscribed polygon along the diagram's chords.

    Chords of one pair connect the end of each letter to the start of
    the other.  Crossing chords must belong to commuting corridors; the
    crossing points become interior nodes and every face is convex.
    """
    tw = TraceWord.from_cyclic(word)
    if not diagram_valid(tw, diagram):
        raise MalformedDiagram("diagram is not valid for the word")
    marks = set(QUARTERS)
    for l in word.letters:
        marks.add(l.interval.start)
        marks.add(_mod1(l.interval.end))
    if params is not None:
        marks.update(_mod1(t) for t in params)
    ps = tuple(sorted(marks))
    nodes: list[Node] = [Node(circle_point(t), t) for t in ps]
    index_of = {t: j for j, t in enumerate(ps)}

    bands: list[Band] = []
    chords: list[BandChord] = []
    for bi, (p, q) in enumerate(diagram.sorted_pairs):
        lp, lq = word.letters[p], word.letters[q]
        bands.append(Band(bi, (p, q), lp.corridor, lp.sign))
        chords.append(
            BandChord(bi, 0, index_of[_mod1(lp.interval.end)], index_of[lq.interval.start])
        )
        chords.append(
            BandChord(bi, 1, index_of[_mod1(lq.interval.end)], index_of[lp.interval.start])
        )

    crossings: list[tuple[int, int, int]] = []
    faces: list[tuple[int, ...]] = []

    # Working chords: (a, b, band, chord_serial); serial preserved through cuts.
    work = [(c.a, c.b, c.band, k) for k, c in enumerate(chords)]

    def split(region: list[int], todo: list[tuple[int, int, int, int]]):
        if not todo:
            if len(region) >= 3:
                faces.append(tuple(region))
            return
        cut = todo[0]
        rest = todo[1:]
        ca, cb = cut[0], cut[1]
        ia, ib = region.index(ca), region.index(cb)
        if ia > ib:
            ia, ib = ib, ia
            ca, cb = cb, ca
        chain_a = region[ia : ib + 1]
        chain_b = region[ib:] + region[: ia + 1]
        interior_a = set(chain_a[1:-1])
        interior_b = set(chain_b[1:-1])
        pa, pb = nodes[ca].point, nodes[cb].point
        on_cut: list[tuple[Fraction, int]] = []
        todo_a: list = []
        todo_b: list = []
        for d in rest:
            du, dv = d[0], d[1]
            if {du, dv} == {ca, cb}:
                continue  # geometrically identical; the cut already separates
            su = "A" if du in interior_a else ("B" if du in interior_b else "E")
            sv = "A" if dv in interior_a else ("B" if dv in interior_b else "E")
            if su == "E" and sv == "E":
                raise AssertionError("distinct chord shares both cut endpoints")
            side = su if su != "E" else sv
            if "E" in (su, sv) or su == sv:
                (todo_a if side == "A" else todo_b).append(d)
                continue
            x = _segments_cross(pa, pb, nodes[du].point, nodes[dv].point)
            if x is None:
                raise AssertionError("straddling chord fails to cross the cut")
            if not word.commute(bands[cut[2]].corridor.id, bands[d[2]].corridor.id):
                raise MalformedDiagram(
                    "chords of non-commuting corridors cross; the diagram "
                    "cannot come from a valid cancellation"
                )
            nodes.append(Node(x, None))
            xi = len(nodes) - 1
            crossings.append((xi, cut[3], d[3]))
            t_along = (x[0] - pa[0]) * (pb[0] - pa[0]) + (x[1] - pa[1]) * (pb[1] - pa[1])
            on_cut.append((t_along, xi))
            part_u = (du, xi, d[2], d[3])
            part_v = (xi, dv, d[2], d[3])
            (todo_a if su == "A" else todo_b).append(part_u)
            (todo_a if sv == "A" else todo_b).append(part_v)
        on_cut.sort()
        xs = [xi for _, xi in on_cut]
        boundary_a = chain_a + xs[::-1]
        boundary_b = chain_b + xs
        split(boundary_a, todo_a)
        split(boundary_b, todo_b)

    split(list(range(len(ps))), work)

    # Band membership: a band is the polygon piece between its two
    # chords; the reference centroid of the four chord endpoints sits
    # strictly inside it.
    half_planes = []
    for b in bands:
        c0, c1 = chords[2 * b.index], chords[2 * b.index + 1]
        ref = _centroid(
            [nodes[c0.a].point, nodes[c0.b].point, nodes[c1.a].point, nodes[c1.b].point]
        )
        sides = []
        for c in (c0, c1):
            s = _cross(nodes[c.a].point, nodes[c.b].point, ref)
            if s == 0:
                raise AssertionError("band reference point on its own chord")
            sides.append((nodes[c.a].point, nodes[c.b].point, s > 0))
        half_planes.append(sides)

    final_faces = []
    for fnodes in faces:
        cen = _centroid([nodes[j].point for j in fnodes])
        mem = []
        for b in bands:
            ok = True
            for pa, pb, positive in half_planes[b.index]:
                s = _cross(pa, pb, cen)
                if s == 0 or (s > 0) != positive:
                    ok = False
                    break
            if ok:
                mem.append(b.index)
        if len(mem) > 2:
            raise AssertionError(f"face inside {len(mem)} bands")
        if len(mem) == 2:
            o1 = bands[mem[0]].corridor.orientation
            o2 = bands[mem[1]].corridor.orientation
            if o1 == o2:
                raise AssertionError("face inside two same-orientation bands")
        final_faces.append(Face(tuple(fnodes), tuple(mem)))

    return Cellulation(
        params=ps,
        nodes=tuple(nodes),
        faces=tuple(final_faces),
        bands=tuple(bands),
        chords=tuple(chords),
        crossings=tuple(crossings),
    )


# ---------------------------------------------------------------------------
# Target regions


Rect = tuple[Fraction, Fraction, Fraction, Fraction]  # x0, x1, y0, y1


@dataclass(frozen=True)
class Target:
    kind: str  # "junction" | "corridor" | "rect" | "plus"
    rect: Optional[Rect] = None
    cells: tuple[tuple[int, int], ...] = ()
    center: Optional[Point] = None


def _in_rect(p: Point, r: Rect) -> bool:
    return r[0] <= p[0] <= r[1] and r[2] <= p[1] <= r[3]


def _cell_rect(a: int, b: int, n: int) -> Rect:
    return (Fraction(a, n), Fraction(a + 1, n), Fraction(b, n), Fraction(b + 1, n))


def _segment_in_cells(
    p: Point, q: Point, cells: set[tuple[int, int]], n: int
) -> bool:
    """Exact test that segment pq stays inside the closed cell union.

    Cuts the segment at every grid line it crosses; each open piece lies
    in a single cell iff its midpoint's cell is in the set.
    """
    cuts = {Fraction(0), Fraction(1)}
    for axis in range(2):
        a, b = p[axis], q[axis]
        if a == b:
            continue
        lo, hi = (a, b) if a < b else (b, a)
        j = lo.numerator * n // lo.denominator + 1
        while Fraction(j, n) < hi:
            cuts.add((Fraction(j, n) - a) / (b - a))
            j += 1
    ts = sorted(cuts)
    for t0, t1 in zip(ts, ts[1:]):
        tm = (t0 + t1) / 2
        x = p[0] + tm * (q[0] - p[0])
        y = p[1] + tm * (q[1] - p[1])
        ca = min(x.numerator * n // x.denominator, n - 1)
        cb = min(y.numerator * n // y.denominator, n - 1)
        if (ca, cb) not in cells:
            return False
    return True


def _free_target(
    seq: DefiningSequence,
    i: int,
    values: Sequence[Point],
    edges: Sequence[tuple[Point, Point]],
) -> Target:
    """Assign a hole-free region to a face outside every band.

    First choice: the grid-snapped bounding box of the values, when all
    of its cells are kept.  Fallback: a plus-shaped union of kept cells
    around a kept even-even home cell, star-shaped about the home
    center, so a radial clamp stays continuous.
    """
    n = _pow3(i)
    xs = [v[0] for v in values]
    ys = [v[1] for v in values]
    a0 = max(0, min(v.numerator * n // v.denominator for v in xs))
    b0 = max(0, min(v.numerator * n // v.denominator for v in ys))
    a1 = min(n, max(-((-v.numerator * n) // v.denominator) for v in xs))
    b1 = min(n, max(-((-v.numerator * n) // v.denominator) for v in ys))
    a1, b1 = max(a1, a0 + 1), max(b1, b0 + 1)
    if all(
        seq.cell_in_space(a, b, i)
        for a in range(a0, a1)
        for b in range(b0, b1)
    ):
        return Target(
            "rect", rect=(Fraction(a0, n), Fraction(a1, n), Fraction(b0, n), Fraction(b1, n))
        )

    homes: list[tuple[int, int]] = []
    for v in values:
        fa = v[0].numerator * n // v[0].denominator
        fb = v[1].numerator * n // v[1].denominator
        for a in {fa, fa - 1} if v[0] * n == fa else {fa}:
            for b in {fb, fb - 1} if v[1] * n == fb else {fb}:
                if (
                    0 <= a < n
                    and 0 <= b < n
                    and a % 2 == 0
                    and b % 2 == 0
                    and seq.cell_in_space(a, b, i)
                    and (a, b) not in homes
                ):
                    homes.append((a, b))
    homes.sort()
    for home in homes:
        ha, hb = home
        kept = lambda a, b: 0 <= a < n and 0 <= b < n and seq.cell_in_space(a, b, i)
        region = {home}
        for da, db in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            if kept(ha + da, hb + db):
                region.add((ha + da, hb + db))
        for da in (-1, 1):
            for db in (-1, 1):
                if (
                    kept(ha + da, hb + db)
                    and (ha + da, hb) in region
                    and (ha, hb + db) in region
                ):
                    region.add((ha + da, hb + db))
        if all(_segment_in_cells(p, q, region, n) for p, q in edges):
            center = (Fraction(2 * ha + 1, 2 * n), Fraction(2 * hb + 1, 2 * n))
            return Target("plus", cells=tuple(sorted(region)), center=center)
    raise AssignmentFailure(
        f"no hole-free region found for a free face at level {i}"
    )


def _clamp_to_region(
    p: Point, center: Point, cells: Sequence[tuple[int, int]], n: int
) -> Point:
    """Radial retraction onto a star-shaped union of closed cells."""
    for a, b in cells:
        if _in_rect(p, _cell_rect(a, b, n)):
            return p
    dx, dy = p[0] - center[0], p[1] - center[1]
    spans = []
    for a, b in cells:
        r = _cell_rect(a, b, n)
        lo, hi = Fraction(0), Fraction(1)
        ok = True
        for d, c, rlo, rhi in ((dx, center[0], r[0], r[1]), (dy, center[1], r[2], r[3])):
            if d == 0:
                if not (rlo <= c <= rhi):
                    ok = False
                    break
                continue
            t0, t1 = (rlo - c) / d, (rhi - c) / d
            if t0 > t1:
                t0, t1 = t1, t0
            lo, hi = max(lo, t0), min(hi, t1)
        if ok and lo <= hi:
            spans.append((lo, hi))
    spans.sort()
    cover = Fraction(0)
    for lo, hi in spans:
        if lo > cover:
            break
        cover = max(cover, hi)
    return (center[0] + cover * dx, center[1] + cover * dy)


# ---------------------------------------------------------------------------
# The homotopy object


@dataclass(frozen=True)
class FaceFill:
    face: int
    target: Target
    # triangles: ((domain triple), (value triple)) with a shared centroid apex
    triangles: tuple[tuple[tuple[Point, Point, Point], tuple[Point, Point, Point]], ...]
    clamped: bool


@dataclass(frozen=True)
class LevelHomotopy:
    loop: PolyLoop
    seq: DefiningSequence
    level: int
    word: CyclicWord
    diagram: CancellationDiagram
    cellulation: Cellulation
    node_values: tuple[Point, ...]
    fills: tuple[FaceFill, ...]

    @property
    def target_kinds(self) -> tuple[str, ...]:
        return tuple(f.target.kind for f in self.fills)


def _chord_constants(
    cell: Cellulation, alpha: dict[int, Point]
) -> dict[int, tuple[str, Fraction]]:
    consts: dict[int, tuple[str, Fraction]] = {}
    for k, ch in enumerate(cell.chords):
        orient = cell.bands[ch.band].corridor.orientation
        va, vb = alpha[ch.a], alpha[ch.b]
        axis = 1 if orient == "H" else 0
        if va[axis] != vb[axis]:
            raise AssertionError(
                "paired crossings do not share a boundary line; the diagram "
                "pairs letters with mismatched signs"
            )
        consts[k] = (orient, va[axis])
    return consts


def build_homotopy(
    loop: PolyLoop,
    seq: DefiningSequence,
    i: int,
    diagram: CancellationDiagram,
    *,
    word: Optional[CyclicWord] = None,
    tie_break: str = "h_first",
    extra_params: Iterable[Fraction] = (),
) -> LevelHomotopy:
    """Fill the disk over a cancellation diagram for the level-i word.

    Faces inside two bands map into the junction cell of the two
    corridors, faces inside one band into that corridor's rectangle,
    and free faces into a snapped bounding box or a star-shaped plus of
    kept cells (with a continuous radial clamp).  Raises
    AssignmentFailure when no admissible region exists.
    """
    seq.check_level(i)
    if word is None:
        word = encode_word(loop, seq, i, tie_break=tie_break)
    if word.level != i:
        raise ValueError(f"word level {word.level} differs from target level {i}")
    params = [loop.vertex_param(j) for j in range(len(loop))]
    params.extend(extra_params)
    cell = build_cellulation(word, diagram, params=params)

    alpha = {
        j: loop.point_at(n.param)
        for j, n in enumerate(cell.nodes)
        if n.param is not None
    }
    consts = _chord_constants(cell, alpha)
    values: list[Optional[Point]] = [alpha.get(j) for j in range(len(cell.nodes))]
    for node_idx, k1, k2 in cell.crossings:
        (o1, c1), (o2, c2) = consts[k1], consts[k2]
        if o1 == o2:
            raise AssertionError("same-orientation chords crossed")
        x = c1 if o1 == "V" else c2
        y = c1 if o1 == "H" else c2
        values[node_idx] = (x, y)
    if any(v is None for v in values):
        raise AssertionError("node without a value")

    n3 = _pow3(i)
    fills: list[FaceFill] = []
    for fi, face in enumerate(cell.faces):
        pts = [cell.nodes[j].point for j in face.nodes]
        vals = [values[j] for j in face.nodes]
        edges = [
            (vals[k], vals[(k + 1) % len(vals)]) for k in range(len(vals))
        ]
        if len(face.bands) == 2:
            ba, bb = (cell.bands[b].corridor for b in face.bands)
            h = ba if ba.orientation == "H" else bb
            v = ba if ba.orientation == "V" else bb
            rect = (v.transverse[0], v.transverse[1], h.transverse[0], h.transverse[1])
            target = Target("junction", rect=rect)
        elif len(face.bands) == 1:
            target = Target("corridor", rect=cell.bands[face.bands[0]].corridor.rect)
        else:
            target = _free_target(seq, i, vals, edges)
        if target.rect is not None and not all(_in_rect(v, target.rect) for v in vals):
            raise AssignmentFailure(
                f"face {fi} carries values outside its {target.kind} rectangle"
            )
        cen_d = _centroid(pts)
        cen_v = _centroid(vals)
        tris = tuple(
            ((cen_d, pts[k], pts[(k + 1) % len(pts)]), (cen_v, vals[k], vals[(k + 1) % len(vals)]))
            for k in range(len(pts))
        )
        fills.append(FaceFill(fi, target, tris, target.kind == "plus"))

    return LevelHomotopy(
        loop=loop,
        seq=seq,
        level=i,
        word=word,
        diagram=diagram,
        cellulation=cell,
        node_values=tuple(values),
        fills=tuple(fills),
    )


# ---------------------------------------------------------------------------
# Evaluation


def _minkowski(h: LevelHomotopy, z: Point) -> Fraction:
    """Gauge of z for the inscribed polygon: <=1 inside, >1 outside."""
    if z[0] == 0 and z[1] == 0:
        return Fraction(0)
    ring = [h.cellulation.nodes[j].point for j in range(len(h.cellulation.params))]
    m = len(ring)
    for j in range(m):
        a, b = ring[j], ring[(j + 1) % m]
        s1 = a[0] * z[1] - a[1] * z[0]
        s2 = z[0] * b[1] - z[1] * b[0]
        if s1 >= 0 and s2 >= 0:
            nx, ny = a[1] - b[1], b[0] - a[0]
            k = nx * a[0] + ny * a[1]
            return (nx * z[0] + ny * z[1]) / k
    raise AssertionError("no polygon sector contains the direction of z")


_EVAL_GRID = 16


def _face_buckets(h: LevelHomotopy) -> dict[tuple[int, int], list]:
    """Bucketed triangle lookup for repeated pointwise evaluation.

    Built once per map and cached on the instance.  Buckets are keyed by a
    coarse float grid over the disk; each triangle is filed under every
    bucket its padded float box touches, so a lookup never misses the true
    containing face and every candidate is re-tested exactly.  Insertion
    follows fill order, keeping the same first-match tie break as a linear
    scan for points on shared edges.
    """
    cached = getattr(h, "_face_buckets", None)
    if cached is not None:
        return cached
    pad = 1e-9
    buckets: dict[tuple[int, int], list] = {}
    for fill in h.fills:
        for dom, val in fill.triangles:
            if _cross(dom[0], dom[1], dom[2]) == 0:
                continue
            xs = [float(q[0]) for q in dom]
            ys = [float(q[1]) for q in dom]
            bx0 = _bucket_of(min(xs) - pad)
            bx1 = _bucket_of(max(xs) + pad)
            by0 = _bucket_of(min(ys) - pad)
            by1 = _bucket_of(max(ys) + pad)
            entry = (dom, val, fill.clamped, fill.target)
            for bx in range(bx0, bx1 + 1):
                for by in range(by0, by1 + 1):
                    buckets.setdefault((bx, by), []).append(entry)
    object.__setattr__(h, "_face_buckets", buckets)
    return buckets


def _bucket_of(t: float) -> int:
    b = int((t + 1.0) * _EVAL_GRID / 2.0)
    return min(_EVAL_GRID - 1, max(0, b))


def _eval_in_polygon(h: LevelHomotopy, p: Point) -> Point:
    key = (_bucket_of(float(p[0])), _bucket_of(float(p[1])))
    for dom, val, clamped, target in _face_buckets(h).get(key, ()):
        if _point_in_triangle(dom, p):
            out = _affine_in_triangle(dom, val, p)
            if clamped:
                out = _clamp_to_region(
                    out, target.center, target.cells, _pow3(h.level)
                )
            return out
    raise AssertionError(f"point {p} not covered by any face")


def evaluate(h: LevelHomotopy, z: tuple) -> Point:
    """Value of the filled disk map at z in the closed unit disk.

    Points exactly on the unit circle evaluate through the inverse
    circle parameterization; points outside the inscribed polygon first
    collapse radially onto its boundary.
    """
    x, y = Fraction(z[0]), Fraction(z[1])
    if x * x + y * y > 1:
        raise ValueError("point outside the closed unit disk")
    if x * x + y * y == 1:
        return h.loop.point_at(circle_param((x, y)))
    mu = _minkowski(h, (x, y))
    p = (x, y) if mu <= 1 else (x / mu, y / mu)
    return _eval_in_polygon(h, p)


# ---------------------------------------------------------------------------
# Containment


@dataclass(frozen=True)
class ContainmentReport:
    ok: bool
    level: int
    exact_faces: int
    sampled_faces: int
    samples: int
    violations: tuple[tuple[int, Point], ...]  # (face, offending value point)


def _clip_rect(tri: Sequence[Point], rect: Rect) -> list[Point]:
    """Sutherland-Hodgman clip of a polygon against a closed rectangle."""
    poly = list(tri)
    specs = (
        (0, rect[0], True),
        (0, rect[1], False),
        (1, rect[2], True),
        (1, rect[3], False),
    )
    for axis, c, keep_ge in specs:
        if not poly:
            return []
        out: list[Point] = []
        m = len(poly)
        for j in range(m):
            a, b = poly[j], poly[(j + 1) % m]
            ia = a[axis] >= c if keep_ge else a[axis] <= c
            ib = b[axis] >= c if keep_ge else b[axis] <= c
            if ia:
                out.append(a)
            if ia != ib:
                t = (c - a[axis]) / (b[axis] - a[axis])
                pt = (
                    a[0] + t * (b[0] - a[0]),
                    a[1] + t * (b[1] - a[1]),
                )
                out.append(pt)
        poly = out
    return poly


def _strictly_inside(p: Point, rect: Rect) -> bool:
    return rect[0] < p[0] < rect[1] and rect[2] < p[1] < rect[3]


def _triangle_meets_open_rect(tri: Sequence[Point], rect: Rect) -> Optional[Point]:
    """A point of the closed triangle strictly inside the open rect, or None."""
    if max(p[0] for p in tri) <= rect[0] or min(p[0] for p in tri) >= rect[1]:
        return None
    if max(p[1] for p in tri) <= rect[2] or min(p[1] for p in tri) >= rect[3]:
        return None
    clipped = _clip_rect(tri, rect)
    if not clipped:
        return None
    for p in clipped:
        if _strictly_inside(p, rect):
            return p
    cen = _centroid(clipped)
    if _strictly_inside(cen, rect):
        return cen
    return None


def _holes_by_level(seq: DefiningSequence, i: int) -> dict[int, set[tuple[int, int]]]:
    return {
        s: {(q.k, q.m) for q in seq.holes_at_level(s)} for s in range(1, i + 1)
    }


def _triangle_hole_hit(
    tri: Sequence[Point], holes: dict[int, set[tuple[int, int]]]
) -> Optional[Point]:
    x0 = min(p[0] for p in tri)
    x1 = max(p[0] for p in tri)
    y0 = min(p[1] for p in tri)
    y1 = max(p[1] for p in tri)
    for s, removed in holes.items():
        if not removed:
            continue
        n = _pow3(s)
        k_lo = max(1, -((-(x0 * n).numerator) // ((x0 * n).denominator * 2)))
        k_hi = min((n - 1) // 2, ((x1 * n + 1) / 2).__floor__())
        m_lo = max(1, -((-(y0 * n).numerator) // ((y0 * n).denominator * 2)))
        m_hi = min((n - 1) // 2, ((y1 * n + 1) / 2).__floor__())
        for k in range(k_lo, k_hi + 1):
            for m in range(m_lo, m_hi + 1):
                if (k, m) not in removed:
                    continue
                rect = (
                    Fraction(2 * k - 1, n),
                    Fraction(2 * k, n),
                    Fraction(2 * m - 1, n),
                    Fraction(2 * m, n),
                )
                hit = _triangle_meets_open_rect(tri, rect)
                if hit is not None:
                    return hit
    return None


def _sample_points(dom: Sequence[Point], resolution: Fraction) -> Iterator[Point]:
    ax = max(p[0] for p in dom) - min(p[0] for p in dom)
    ay = max(p[1] for p in dom) - min(p[1] for p in dom)
    diam = max(ax, ay)
    steps = max(1, min(48, -((-diam.numerator * resolution.denominator) // (diam.denominator * resolution.numerator))))
    for u in range(steps + 1):
        for v in range(steps + 1 - u):
            w = steps - u - v
            yield (
                (u * dom[0][0] + v * dom[1][0] + w * dom[2][0]) / steps,
                (u * dom[0][1] + v * dom[1][1] + w * dom[2][1]) / steps,
            )


def verify_containment(
    h: LevelHomotopy,
    seq: Optional[DefiningSequence] = None,
    i: Optional[int] = None,
    resolution: Fraction = Fraction(1, 81),
) -> ContainmentReport:
    """Check the filled disk's image avoids every removed square.

    Affine faces are checked exactly: the image of each triangle is a
    triangle, tested against each candidate open square.  Clamped faces
    are spot-checked on a barycentric grid at the given resolution.
    """
    seq = seq if seq is not None else h.seq
    i = i if i is not None else h.level
    holes = _holes_by_level(seq, i)
    violations: list[tuple[int, Point]] = []
    exact_faces = sampled_faces = samples = 0
    n = _pow3(h.level)
    for fill in h.fills:
        if not fill.clamped:
            exact_faces += 1
            for _, val in fill.triangles:
                hit = _triangle_hole_hit(val, holes)
                if hit is not None:
                    violations.append((fill.face, hit))
                    break
        else:
            sampled_faces += 1
            for dom, val in fill.triangles:
                if _cross(dom[0], dom[1], dom[2]) == 0:
                    continue
                for p in _sample_points(dom, resolution):
                    out = _affine_in_triangle(dom, val, p)
                    out = _clamp_to_region(
                        out, fill.target.center, fill.target.cells, n
                    )
                    samples += 1
                    if seq.point_in_removed_interior(out, i):
                        violations.append((fill.face, out))
                        break
    return ContainmentReport(
        ok=not violations,
        level=i,
        exact_faces=exact_faces,
        sampled_faces=sampled_faces,
        samples=samples,
        violations=tuple(violations),
    )


# ---------------------------------------------------------------------------
# Convergence gap between consecutive levels


@dataclass(frozen=True)
class GapReport:
    level_pair: tuple[int, int]
    max_sq: Fraction
    bound: Fraction
    holds: bool
    exact: bool
    witness: Optional[Point]
    pairs_checked: int
    samples: int


def _tri_bbox(tri) -> Rect:
    return (
        min(p[0] for p in tri),
        max(p[0] for p in tri),
        min(p[1] for p in tri),
        max(p[1] for p in tri),
    )


def convergence_gap(
    h1: LevelHomotopy,
    h2: LevelHomotopy,
    resolution: Fraction = Fraction(1, 81),
) -> GapReport:
    """Sup-distance between consecutive-level fillings of one loop.

    Requires both homotopies to share the loop, the space, and the full
    parameter set (build them with each other's marks as extra_params).
    On the common polygon the difference of two affine triangles is
    affine, so |difference|^2 is convex and is maximized at a vertex of
    the overlay; those corners are enumerated exactly.  Outside the
    polygon both maps collapse radially to identical boundary values, so
    the annulus contributes nothing.  Clamped faces fall back to grid
    sampling and mark the report as inexact.
    """
    if h1.loop != h2.loop or h1.seq != h2.seq:
        raise IncompatibleHomotopies("homotopies describe different problems")
    if h2.level != h1.level + 1:
        raise IncompatibleHomotopies(
            f"levels {h1.level},{h2.level} are not consecutive"
        )
    if h1.cellulation.params != h2.cellulation.params:
        raise IncompatibleHomotopies(
            "different disk polygons; rebuild with shared extra_params"
        )

    affine1 = [
        (dom, val)
        for f in h1.fills
        if not f.clamped
        for dom, val in f.triangles
        if _cross(dom[0], dom[1], dom[2]) != 0
    ]
    affine2 = [
        (dom, val)
        for f in h2.fills
        if not f.clamped
        for dom, val in f.triangles
        if _cross(dom[0], dom[1], dom[2]) != 0
    ]

    scale = 8
    buckets: dict[tuple[int, int], list[int]] = {}
    for idx, (dom, _) in enumerate(affine2):
        bb = _tri_bbox(dom)
        for bx in range(int(bb[0] * scale) - 1, int(bb[1] * scale) + 2):
            for by in range(int(bb[2] * scale) - 1, int(bb[3] * scale) + 2):
                buckets.setdefault((bx, by), []).append(idx)

    max_sq = Fraction(0)
    witness: Optional[Point] = None
    pairs_checked = 0

    # The maps are continuous, so a candidate point gives the same pair
    # of values whichever containing triangles produced it: one exact
    # evaluation per distinct point suffices.
    seen: set[Point] = set()

    def consider(p: Point, t1, t2):
        nonlocal max_sq, witness
        if p in seen:
            return
        seen.add(p)
        v1 = _affine_in_triangle(t1[0], t1[1], p)
        v2 = _affine_in_triangle(t2[0], t2[1], p)
        d = (v1[0] - v2[0]) ** 2 + (v1[1] - v2[1]) ** 2
        if d > max_sq:
            max_sq = d
            witness = p

    # Float boxes (padded past rounding error) only ever rule out pairs
    # that provably miss each other; every survivor is tested exactly.
    pad = 1e-9

    def edges_of(tri):
        out = []
        for j in range(3):
            a, b = tri[j], tri[(j + 1) % 3]
            ax, ay, bx, by = float(a[0]), float(a[1]), float(b[0]), float(b[1])
            out.append(
                (a, b,
                 min(ax, bx) - pad, max(ax, bx) + pad,
                 min(ay, by) - pad, max(ay, by) + pad)
            )
        return out
    edges1 = [edges_of(t[0]) for t in affine1]
    edges2 = [edges_of(t[0]) for t in affine2]
    seg_memo: dict[tuple, list[Point]] = {}

    for i1, t1 in enumerate(affine1):
        bb1 = _tri_bbox(t1[0])
        cand: set[int] = set()
        for bx in range(int(bb1[0] * scale) - 1, int(bb1[1] * scale) + 2):
            for by in range(int(bb1[2] * scale) - 1, int(bb1[3] * scale) + 2):
                cand.update(buckets.get((bx, by), ()))
        for idx in sorted(cand):
            t2 = affine2[idx]
            bb2 = _tri_bbox(t2[0])
            if bb1[1] < bb2[0] or bb2[1] < bb1[0] or bb1[3] < bb2[2] or bb2[3] < bb1[2]:
                continue
            pairs_checked += 1
            for p in t1[0]:
                if p not in seen and _point_in_triangle(t2[0], p):
                    consider(p, t1, t2)
            for p in t2[0]:
                if p not in seen and _point_in_triangle(t1[0], p):
                    consider(p, t1, t2)
            for a, b, x0, x1, y0, y1 in edges1[i1]:
                for c, d, u0, u1, v0, v1 in edges2[idx]:
                    if x1 < u0 or u1 < x0 or y1 < v0 or v1 < y0:
                        continue
                    key = (a, b, c, d)
                    pts = seg_memo.get(key)
                    if pts is None:
                        pts = _seg_point_candidates(a, b, c, d)
                        seg_memo[key] = pts
                    for p in pts:
                        consider(p, t1, t2)

    samples = 0
    exact = True
    for h_from, h_other in ((h1, h2), (h2, h1)):
        for fill in h_from.fills:
            if not fill.clamped:
                continue
            exact = False
            for dom, _ in fill.triangles:
                if _cross(dom[0], dom[1], dom[2]) == 0:
                    continue
                for p in _sample_points(dom, resolution):
                    v1 = _eval_in_polygon(h_from, p)
                    v2 = _eval_in_polygon(h_other, p)
                    samples += 1
                    d = (v1[0] - v2[0]) ** 2 + (v1[1] - v2[1]) ** 2
                    if d > max_sq:
                        max_sq = d
                        witness = p

    bound = Fraction(6, _pow3(h1.level))
    return GapReport(
        level_pair=(h1.level, h2.level),
        max_sq=max_sq,
        bound=bound,
        holds=max_sq <= bound * bound,
        exact=exact,
        witness=witness,
        pairs_checked=pairs_checked,
        samples=samples,
    )
