"""Square grids, carpet-like complements, corridors, and loop validation.

Coordinates are exact rationals throughout.  A space is the unit square
minus the open interiors of a chosen family of grid squares; at level i
the candidate squares have side 1/3^i and odd/even corner coordinates in
scale-i units, so the complement decomposes into cells, strips, and the
corridor pieces the word calculus is built on.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

from .errors import LevelOutOfRange

Rational = Fraction
Point = tuple[Fraction, Fraction]

FULL_CARPET = "full_carpet"
EXPLICIT = "explicit"


def _pow3(i: int) -> int:
    return 3 ** i


@dataclass(frozen=True, order=True)
class GridSquare:
    """The candidate square [(2k-1)/3^i, 2k/3^i] x [(2m-1)/3^i, 2m/3^i]."""

    level: int
    k: int
    m: int

    def __post_init__(self):
        n = _pow3(self.level)
        if self.level < 1:
            raise ValueError(f"square level must be >= 1, got {self.level}")
        if not (1 <= self.k and 2 * self.k <= n and 1 <= self.m and 2 * self.m <= n):
            raise ValueError(f"square indices out of range: {self}")

    @property
    def x_interval(self) -> tuple[Fraction, Fraction]:
        n = _pow3(self.level)
        return (Fraction(2 * self.k - 1, n), Fraction(2 * self.k, n))

    @property
    def y_interval(self) -> tuple[Fraction, Fraction]:
        n = _pow3(self.level)
        return (Fraction(2 * self.m - 1, n), Fraction(2 * self.m, n))

    @property
    def center(self) -> Point:
        n = _pow3(self.level)
        return (Fraction(4 * self.k - 1, 2 * n), Fraction(4 * self.m - 1, 2 * n))

    def interior_contains(self, p: Point) -> bool:
        (x0, x1), (y0, y1) = self.x_interval, self.y_interval
        return x0 < p[0] < x1 and y0 < p[1] < y1

    def key(self) -> tuple[int, int, int]:
        return (self.level, self.k, self.m)


def _contained_1d(j: int, t: int) -> bool:
    # Is [2j-1, 2j] (scale i) inside some [(2j'-1)t, 2j't] (scale s, t = 3^(i-s))?
    jp = -(-2 * j // (2 * t))  # ceil(j/t)
    return (2 * jp - 1) * t <= 2 * j - 1 and 2 * j <= 2 * jp * t


@lru_cache(maxsize=None)
def _eligible_at(i: int) -> frozenset[GridSquare]:
    """Candidates at level i not contained in any earlier candidate.

    Containment against earlier levels is a property of the grid alone,
    so eligibility does not depend on which squares were removed.
    """
    out = []
    half = (_pow3(i) - 1) // 2
    for k in range(1, half + 1):
        for m in range(1, half + 1):
            buried = any(
                _contained_1d(k, _pow3(i - s)) and _contained_1d(m, _pow3(i - s))
                for s in range(1, i)
            )
            if not buried:
                out.append(GridSquare(i, k, m))
    return frozenset(out)


@dataclass(frozen=True)
class DefiningSequence:
    """A depth-limited choice of removed squares, one batch per level."""

    depth: int
    pattern: str
    removed: frozenset[GridSquare]

    @staticmethod
    def explicit(depth: int, removed: Iterable[GridSquare | tuple[int, int, int]]) -> "DefiningSequence":
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        squares = frozenset(
            sq if isinstance(sq, GridSquare) else GridSquare(*sq) for sq in removed
        )
        for sq in squares:
            if sq.level > depth:
                raise ValueError(f"{sq} exceeds depth {depth}")
            if sq not in _eligible_at(sq.level):
                raise ValueError(f"{sq} is not eligible at its level")
        return DefiningSequence(depth, EXPLICIT, squares)

    @staticmethod
    def full_carpet(depth: int) -> "DefiningSequence":
        if depth < 1:
            raise ValueError(f"depth must be >= 1, got {depth}")
        squares = frozenset(
            sq for i in range(1, depth + 1) for sq in _eligible_at(i)
        )
        return DefiningSequence(depth, FULL_CARPET, squares)

    @property
    def is_full_carpet(self) -> bool:
        return self.pattern == FULL_CARPET

    def holes_at_level(self, i: int) -> frozenset[GridSquare]:
        return frozenset(sq for sq in self.removed if sq.level == i)

    def holes_up_to(self, i: int) -> tuple[GridSquare, ...]:
        return tuple(
            sorted(
                (sq for sq in self.removed if sq.level <= i),
                key=GridSquare.key,
            )
        )

    def check_level(self, i: int) -> None:
        if not (1 <= i <= self.depth):
            raise LevelOutOfRange(f"level {i} outside 1..{self.depth}")

    def point_in_removed_interior(self, p: Point, i: int) -> bool:
        """Is p strictly inside some removed square of level <= i?"""
        if self.is_full_carpet:
            # Inside a full-carpet hole of level s iff both scaled
            # coordinates have odd integer part and are non-integral.
            # Eligibility does not matter: a candidate buried inside an
            # earlier hole covers only points already counted at that level.
            for s in range(1, i + 1):
                n = _pow3(s)
                ux, uy = p[0] * n, p[1] * n
                fx, fy = ux.numerator // ux.denominator, uy.numerator // uy.denominator
                if fx % 2 == 1 and fy % 2 == 1 and ux != fx and uy != fy:
                    return True
            return False
        return any(
            sq.level <= i and sq.interior_contains(p) for sq in self.removed
        )

    def cell_in_space(self, a: int, b: int, i: int) -> bool:
        """Is the scale-i cell [a/3^i,(a+1)/3^i] x [b/3^i,(b+1)/3^i] kept?

        A cell is lost exactly when some removed square of level s <= i
        covers it, which happens iff both of its scale-s digits are odd.
        """
        n = _pow3(i)
        if not (0 <= a < n and 0 <= b < n):
            return False
        if self.is_full_carpet:
            for s in range(i):
                t = _pow3(s)
                if (a // t) % 2 == 1 and (b // t) % 2 == 1:
                    return False
            return True
        for sq in self.removed:
            if sq.level > i:
                continue
            t = _pow3(i - sq.level)
            if (2 * sq.k - 1) * t <= a and a + 1 <= 2 * sq.k * t:
                if (2 * sq.m - 1) * t <= b and b + 1 <= 2 * sq.m * t:
                    return False
        return True


def eligible_squares(seq: DefiningSequence, i: int) -> frozenset[GridSquare]:
    seq.check_level(i)
    return _eligible_at(i)


def level_space_contains(seq: DefiningSequence, i: int, p: Point) -> bool:
    seq.check_level(i)
    if not (0 <= p[0] <= 1 and 0 <= p[1] <= 1):
        raise ValueError(f"point {p} outside the unit square")
    return not seq.point_in_removed_interior(p, i)


@dataclass(frozen=True, order=True)
class Corridor:
    """One closed component of the level-i strip complement.

    orientation "H": the strip is ((2m-1)/3^i, 2m/3^i) in y, the extent
    is an x-interval.  orientation "V" swaps the roles.  Extents always
    run from an even to an odd scale-i coordinate.
    """

    orientation: str
    level: int
    stratum: int
    extent: tuple[Fraction, Fraction]

    @property
    def transverse(self) -> tuple[Fraction, Fraction]:
        n = _pow3(self.level)
        return (Fraction(2 * self.stratum - 1, n), Fraction(2 * self.stratum, n))

    @property
    def boundary_lines(self) -> tuple[Fraction, Fraction]:
        return self.transverse

    @property
    def center_line(self) -> Fraction:
        lo, hi = self.transverse
        return (lo + hi) / 2

    @property
    def rect(self) -> tuple[Fraction, Fraction, Fraction, Fraction]:
        """Closed bounding box (x0, x1, y0, y1)."""
        if self.orientation == "H":
            return (self.extent[0], self.extent[1], *self.transverse)
        return (*self.transverse, self.extent[0], self.extent[1])

    def extent_units(self) -> tuple[int, int]:
        n = _pow3(self.level)
        lo, hi = self.extent[0] * n, self.extent[1] * n
        assert lo.denominator == 1 and hi.denominator == 1
        return (lo.numerator, hi.numerator)

    def inner_contains(self, p: Point) -> bool:
        """Extent-closed, transversally-open membership."""
        lo, hi = self.transverse
        e0, e1 = self.extent
        if self.orientation == "H":
            return e0 <= p[0] <= e1 and lo < p[1] < hi
        return lo < p[0] < hi and e0 <= p[1] <= e1

    @property
    def id(self) -> tuple[str, int, int, Fraction]:
        return (self.orientation, self.level, self.stratum, self.extent[0])

    @property
    def id_text(self) -> str:
        e0 = self.extent[0]
        return f"{self.orientation}:{self.level}:{self.stratum}:{e0.numerator}/{e0.denominator}"


@lru_cache(maxsize=None)
def _corridors_cached(seq: DefiningSequence, i: int) -> tuple[Corridor, ...]:
    n = _pow3(i)
    out: list[Corridor] = []
    for orientation in ("H", "V"):
        for m in range(1, (n - 1) // 2 + 1):
            # Blocks: removed squares whose transverse side covers the
            # whole strip.  Any removed square either covers the strip or
            # misses its interior, so these are the only cuts.
            blocks: list[tuple[int, int]] = []
            for sq in seq.removed:
                if sq.level > i:
                    continue
                t = _pow3(i - sq.level)
                tr = sq.m if orientation == "H" else sq.k
                ex = sq.k if orientation == "H" else sq.m
                if (2 * tr - 1) * t <= 2 * m - 1 and 2 * m <= 2 * tr * t:
                    blocks.append(((2 * ex - 1) * t, 2 * ex * t))
            blocks.sort()
            lo = 0
            pieces: list[tuple[int, int]] = []
            for b0, b1 in blocks:
                if b0 > lo:
                    pieces.append((lo, b0))
                lo = max(lo, b1)
            if lo < n:
                pieces.append((lo, n))
            for e0, e1 in pieces:
                out.append(
                    Corridor(
                        orientation,
                        i,
                        m,
                        (Fraction(e0, n), Fraction(e1, n)),
                    )
                )
    return tuple(sorted(out))


def corridors(seq: DefiningSequence, i: int) -> tuple[Corridor, ...]:
    seq.check_level(i)
    return _corridors_cached(seq, i)


def corridor_by_id(seq: DefiningSequence, ident: tuple[str, int, int, Fraction]) -> Corridor:
    orientation, level, stratum, e0 = ident
    for c in corridors(seq, level):
        if c.orientation == orientation and c.stratum == stratum and c.extent[0] == e0:
            return c
    raise KeyError(f"no corridor with id {ident}")


@dataclass(frozen=True)
class PolyLoop:
    """A closed polygonal loop, parameterized uniformly over [0, 1).

    Vertex j sits at parameter j/n; edges are traversed in vertex order
    and the last vertex connects back to the first.
    """

    vertices: tuple[Point, ...]

    def __post_init__(self):
        for v in self.vertices:
            if not (0 <= v[0] <= 1 and 0 <= v[1] <= 1):
                raise ValueError(f"vertex {v} outside the unit square")

    def __len__(self) -> int:
        return len(self.vertices)

    def vertex_param(self, j: int) -> Fraction:
        return Fraction(j % len(self.vertices), len(self.vertices))

    def point_at(self, t: Fraction) -> Point:
        n = len(self.vertices)
        t = t - (t.numerator // t.denominator)  # reduce mod 1
        u = t * n
        j = u.numerator // u.denominator
        s = u - j
        p, q = self.vertices[j % n], self.vertices[(j + 1) % n]
        return (p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1]))

    def edges(self) -> Iterator[tuple[Point, Point, Fraction, Fraction]]:
        n = len(self.vertices)
        for j in range(n):
            yield (
                self.vertices[j],
                self.vertices[(j + 1) % n],
                Fraction(j, n),
                Fraction(j + 1, n),
            )

    def reversed_loop(self) -> "PolyLoop":
        vs = self.vertices
        return PolyLoop((vs[0],) + tuple(reversed(vs[1:])))


@dataclass(frozen=True)
class Violation:
    kind: str  # NotClosed | DegenerateEdge | VertexOnGridLine | EdgeInHole
    index: Optional[int] = None
    level: Optional[int] = None
    line: Optional[tuple[str, Fraction]] = None
    square: Optional[GridSquare] = None

    def describe(self) -> str:
        parts = [self.kind]
        if self.index is not None:
            parts.append(f"at index {self.index}")
        if self.line is not None:
            axis, value = self.line
            parts.append(f"on line {axis}={value} (level {self.level})")
        if self.square is not None:
            parts.append(f"in removed square {self.square.key()}")
        return " ".join(parts)


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...] = ()

    @property
    def first(self) -> Optional[Violation]:
        return self.violations[0] if self.violations else None


def _line_level(value: Fraction, depth: int) -> Optional[int]:
    """Smallest s <= depth with value*3^s integral, if any."""
    q = value.denominator
    s = 0
    while q % 3 == 0:
        q //= 3
        s += 1
    if q != 1:
        return None
    # value = p/3^s in lowest terms; it lies on every grid of level >= s.
    return s if s <= depth else None


def _segment_cells(p: Point, q: Point, n: int) -> Iterator[tuple[int, int]]:
    """Scale-n open cells whose interior the open segment (p, q) meets.

    Assumes neither endpoint lies on a scale-n grid line.  Splits the
    parameter range at every line crossing and samples each piece.
    """
    cuts = {Fraction(0), Fraction(1)}
    for axis in (0, 1):
        a, b = p[axis], q[axis]
        if a == b:
            continue
        lo, hi = (a, b) if a < b else (b, a)
        j0 = lo.numerator * n // lo.denominator + 1
        j1 = hi.numerator * n // hi.denominator
        if hi * n == j1:
            j1 -= 1
        for j in range(j0, j1 + 1):
            cuts.add((Fraction(j, n) - a) / (b - a))
    ts = sorted(cuts)
    for t0, t1 in zip(ts, ts[1:]):
        tm = (t0 + t1) / 2
        x = p[0] + tm * (q[0] - p[0])
        y = p[1] + tm * (q[1] - p[1])
        yield (x.numerator * n // x.denominator, y.numerator * n // y.denominator)


def validate_loop(loop: PolyLoop, seq: DefiningSequence, depth: int) -> ValidationReport:
    """Check a loop against the space at every level up to depth.

    Reports the first violation found, in check order: closure and edge
    degeneracy, then vertex/grid-line contact, then hole avoidance.
    """
    if depth < 1 or depth > seq.depth:
        raise LevelOutOfRange(f"depth {depth} outside 1..{seq.depth}")
    vs = loop.vertices
    if len(vs) == 0:
        return ValidationReport(False, (Violation("NotClosed"),))
    if len(vs) < 3:
        return ValidationReport(False, (Violation("DegenerateEdge", index=0),))
    for j in range(len(vs)):
        if vs[j] == vs[(j + 1) % len(vs)]:
            return ValidationReport(False, (Violation("DegenerateEdge", index=j),))
    for j, v in enumerate(vs):
        for axis in (0, 1):
            s = _line_level(v[axis], depth)
            if s is not None:
                line = ("x" if axis == 0 else "y", v[axis])
                return ValidationReport(
                    False,
                    (Violation("VertexOnGridLine", index=j, level=max(s, 1), line=line),),
                )
    n = _pow3(depth)
    holes = seq.holes_up_to(depth)
    for j in range(len(vs)):
        p, q = vs[j], vs[(j + 1) % len(vs)]
        for a, b in _segment_cells(p, q, n):
            if not seq.cell_in_space(a, b, depth):
                sq = _covering_hole(holes, a, b, depth)
                return ValidationReport(
                    False,
                    (Violation("EdgeInHole", index=j, square=sq),),
                )
    return ValidationReport(True)


def _covering_hole(holes: Sequence[GridSquare], a: int, b: int, i: int) -> GridSquare:
    for sq in holes:
        t = _pow3(i - sq.level)
        if (2 * sq.k - 1) * t <= a and a + 1 <= 2 * sq.k * t:
            if (2 * sq.m - 1) * t <= b and b + 1 <= 2 * sq.m * t:
                return sq
    raise AssertionError(f"cell ({a},{b}) lost at level {i} but no hole covers it")
