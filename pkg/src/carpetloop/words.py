"""Corridor crossing words: extraction, refinement, and realization.

A loop meets each level-i strip in a cyclic sequence of maximal closed
parameter intervals; the intervals whose two endpoint lines differ are
full crossings and become letters.  Refinement relates the words of two
consecutive levels; realization inverts encoding for abstract words.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

from .errors import DegeneratePosition, RefinementViolation, Unroutable
from .grid import (
    Corridor,
    DefiningSequence,
    PolyLoop,
    Point,
    corridors,
    _pow3,
)

CorridorId = tuple[str, int, int, Fraction]


def _mod1(t: Fraction) -> Fraction:
    return t - (t.numerator // t.denominator)


@dataclass(frozen=True)
class CrossingInterval:
    """A maximal in-strip parameter interval.

    start is reduced mod 1; end may exceed 1 when the interval wraps
    through the loop basepoint.  full is True when the entry and exit
    lines differ, i.e. the interval is an actual crossing.
    """

    start: Fraction
    end: Fraction
    corridor: Corridor
    sign: int  # +1 entered at the lower/left boundary line, -1 otherwise
    full: bool = True

    def contains_param(self, t: Fraction) -> bool:
        t = _mod1(t)
        if t < self.start:
            t += 1
        return self.start <= t <= self.end


@dataclass(frozen=True)
class Letter:
    corridor: Corridor
    sign: int
    interval: CrossingInterval

    @property
    def generator(self) -> CorridorId:
        return self.corridor.id

    @property
    def text(self) -> str:
        return self.corridor.id_text + ("+" if self.sign > 0 else "-")


def _least_rotation(seq: Sequence) -> int:
    if not seq:
        return 0
    best = 0
    for r in range(1, len(seq)):
        for a, b in zip(_rotated(seq, r), _rotated(seq, best)):
            if a == b:
                continue
            if a < b:
                best = r
            break
    return best


def _rotated(seq: Sequence, r: int):
    return list(seq[r:]) + list(seq[:r])


@dataclass(frozen=True)
class CyclicWord:
    """A cyclic sequence of corridor letters with a commutation relation.

    commutes holds unordered pairs of corridor ids whose inner regions
    intersect; only pairs among the letters present are kept.
    """

    level: int
    letters: tuple[Letter, ...]
    commutes: frozenset[frozenset]

    def __len__(self) -> int:
        return len(self.letters)

    def generator_keys(self) -> tuple[tuple[CorridorId, int], ...]:
        return tuple((l.generator, l.sign) for l in self.letters)

    def commute(self, a: CorridorId, b: CorridorId) -> bool:
        return frozenset((a, b)) in self.commutes

    def canonical_rotation(self) -> int:
        keys = [(k[0][0], k[0][1], k[0][2], k[0][3], k[1]) for k in self.generator_keys()]
        return _least_rotation(keys)

    def cyclically_equal(self, other: "CyclicWord") -> bool:
        if self.level != other.level or len(self) != len(other):
            return False
        a = _rotated(self.generator_keys(), self.canonical_rotation())
        b = _rotated(other.generator_keys(), other.canonical_rotation())
        return a == b

    @property
    def text(self) -> str:
        return " ".join(l.text for l in self.letters)


def _strip_events(
    loop: PolyLoop, lo: Fraction, hi: Fraction, axis: int
) -> list[tuple[Fraction, int, int]]:
    """Transversal crossings of the two lines bounding one strip.

    Returns (param, which line: 0 = lo / 1 = hi, direction: +1 if the
    coordinate increases through the line).  Raises DegeneratePosition
    if an edge lies on either line.
    """
    events = []
    for p, q, t0, t1 in loop.edges():
        a, b = p[axis], q[axis]
        for which, v in ((0, lo), (1, hi)):
            if a == v and b == v:
                raise DegeneratePosition(
                    f"edge at t={t0} lies on the line {'xy'[axis]}={v}"
                )
            if a < v < b or b < v < a:
                t = t0 + (t1 - t0) * (v - a) / (b - a)
                events.append((t, which, 1 if b > a else -1))
    events.sort()
    return events


def crossing_intervals(
    loop: PolyLoop, seq: DefiningSequence, i: int
) -> tuple[tuple[CrossingInterval, ...], tuple[CrossingInterval, ...]]:
    """Full-crossing intervals of every level-i strip, per orientation.

    The loop must already be valid through level i; vertices off grid
    lines make every line crossing transversal and isolated.
    """
    seq.check_level(i)
    n = _pow3(i)
    by_orientation: dict[str, list[CrossingInterval]] = {"H": [], "V": []}
    corr = corridors(seq, i)
    for orientation, axis in (("H", 1), ("V", 0)):
        along = 1 - axis
        for m in range(1, (n - 1) // 2 + 1):
            lo, hi = Fraction(2 * m - 1, n), Fraction(2 * m, n)
            events = _strip_events(loop, lo, hi, axis)
            if not events:
                continue
            strip_corridors = [
                c for c in corr if c.orientation == orientation and c.stratum == m
            ]
            for (t0, w0, d0), (t1, w1, d1) in zip(events, events[1:] + events[:1]):
                entering = (w0 == 0 and d0 > 0) or (w0 == 1 and d0 < 0)
                if not entering:
                    continue
                end = t1 if t1 > t0 else t1 + 1
                mid = _mod1((t0 + end) / 2)
                pm = loop.point_at(mid)
                home = None
                for c in strip_corridors:
                    if c.extent[0] <= pm[along] <= c.extent[1]:
                        home = c
                        break
                if home is None:
                    raise AssertionError(
                        f"in-strip point {pm} outside every corridor extent"
                    )
                by_orientation[orientation].append(
                    CrossingInterval(
                        start=t0,
                        end=end,
                        corridor=home,
                        sign=1 if w0 == 0 else -1,
                        full=w1 != w0,
                    )
                )
    return (
        tuple(sorted(by_orientation["H"], key=lambda c: c.start)),
        tuple(sorted(by_orientation["V"], key=lambda c: c.start)),
    )


@lru_cache(maxsize=None)
def crossing_relation(seq: DefiningSequence, i: int) -> frozenset[frozenset]:
    """Unordered pairs of level-i corridors whose inner regions meet.

    Only an H and a V corridor can intersect; the strips of a single
    orientation are disjoint.  All comparisons run in scale-i integer
    units, with V corridors indexed by stratum so each H corridor only
    meets candidates inside its own x-range.
    """
    seq.check_level(i)
    pairs = set()
    by_stratum: dict[int, list] = {}
    for c in corridors(seq, i):
        if c.orientation == "V":
            by_stratum.setdefault(c.stratum, []).append((c, *c.extent_units()))
    for h in corridors(seq, i):
        if h.orientation != "H":
            continue
        he0, he1 = h.extent_units()
        hs0 = 2 * h.stratum - 1
        # V strata with 2k-1 < he1 and he0 < 2k
        for k in range(he0 // 2 + 1, he1 // 2 + 1):
            for v, ve0, ve1 in by_stratum.get(k, ()):
                if ve1 > hs0 and ve0 < hs0 + 1:
                    pairs.add(frozenset((h.id, v.id)))
    return frozenset(pairs)


def encode_word(
    loop: PolyLoop,
    seq: DefiningSequence,
    i: int,
    tie_break: str = "h_first",
) -> CyclicWord:
    """Read off the level-i cyclic word of a validated loop.

    Letters are ordered by interval start; two letters can share a start
    only across orientations (a corner-adjacent crossing), where the
    relation makes them commute and tie_break fixes the written order.
    """
    if tie_break not in ("h_first", "v_first"):
        raise ValueError(f"unknown tie_break {tie_break!r}")
    ih, iv = crossing_intervals(loop, seq, i)
    rank = {"H": 0, "V": 1} if tie_break == "h_first" else {"H": 1, "V": 0}
    letters = [
        Letter(c.corridor, c.sign, c)
        for c in itertools.chain(ih, iv)
        if c.full
    ]
    letters.sort(
        key=lambda l: (
            l.interval.start,
            rank[l.corridor.orientation],
            l.corridor.stratum,
            l.corridor.extent[0],
        )
    )
    present = {l.generator for l in letters}
    relation = frozenset(
        pair for pair in crossing_relation(seq, i) if pair <= present
    )
    return CyclicWord(level=i, letters=tuple(letters), commutes=relation)


@dataclass(frozen=True)
class RefinementCorrespondence:
    """How the letters of one level split into letters one level down.

    ends[j] = (first, last): indices into fine_word of the sub-letters
    that share the parent letter j's start and end parameters.  Fine
    letters outside every parent are free.
    """

    coarse_word: CyclicWord
    fine_word: CyclicWord
    ends: tuple[tuple[int, int], ...]

    @property
    def merges(self) -> tuple[tuple[int, int, int], ...]:
        """(fine first, fine last, coarse parent) triples."""
        return tuple((f, l, j) for j, (f, l) in enumerate(self.ends))

    def role_of_fine(self, fidx: int) -> Optional[tuple[int, str]]:
        for j, (f, l) in enumerate(self.ends):
            if fidx == f:
                return (j, "first")
            if fidx == l:
                return (j, "last")
        return None

    def free_fine_letters(self) -> tuple[int, ...]:
        taken = {f for f, _ in self.ends} | {l for _, l in self.ends}
        return tuple(k for k in range(len(self.fine_word)) if k not in taken)


def _substrata(m: int) -> tuple[int, int]:
    # Level-(i+1) strata refining level-i stratum m, lower then upper.
    return (3 * m - 1, 3 * m)


def refinement_map(
    loop: PolyLoop, seq: DefiningSequence, i: int, tie_break: str = "h_first"
) -> RefinementCorrespondence:
    """Match each level-i letter with its boundary sub-letters at level i+1.

    A full level-i crossing starts with a full crossing of the entry-side
    substratum at the same parameter and ends with one of the exit-side
    substratum at the same parameter; every check failure raises
    RefinementViolation with the offending letter.
    """
    seq.check_level(i)
    seq.check_level(i + 1)
    coarse = encode_word(loop, seq, i, tie_break)
    fine = encode_word(loop, seq, i + 1, tie_break)
    ends = []
    for j, parent in enumerate(coarse.letters):
        m = parent.corridor.stratum
        lo_sub, hi_sub = _substrata(m)
        first_sub = lo_sub if parent.sign > 0 else hi_sub
        last_sub = hi_sub if parent.sign > 0 else lo_sub
        first = _find_sub(fine, parent, first_sub, parent.interval.start, "start")
        last = _find_sub(fine, parent, last_sub, _mod1(parent.interval.end), "end")
        if first is None or last is None:
            raise RefinementViolation(
                f"letter {j} ({parent.text}) lacks a "
                f"{'first' if first is None else 'last'} sub-letter"
            )
        if first == last:
            raise RefinementViolation(
                f"letter {j} ({parent.text}) has coinciding boundary sub-letters"
            )
        _check_sub_extent(parent, fine.letters[first], j)
        _check_sub_extent(parent, fine.letters[last], j)
        ends.append((first, last))
    # No stranded sub-letters: a fine letter of a refining substratum
    # whose interval meets a parent's open interval must be that
    # parent's first or last.
    taken = {f for f, _ in ends} | {l for _, l in ends}
    for k, fl in enumerate(fine.letters):
        if k in taken or fl.corridor.orientation not in ("H", "V"):
            continue
        for j, parent in enumerate(coarse.letters):
            if fl.corridor.orientation != parent.corridor.orientation:
                continue
            if fl.corridor.stratum not in _substrata(parent.corridor.stratum):
                continue
            if _open_intervals_meet(fl.interval, parent.interval):
                raise RefinementViolation(
                    f"fine letter {k} ({fl.text}) sits strictly inside "
                    f"parent letter {j} ({parent.text})"
                )
    return RefinementCorrespondence(coarse, fine, tuple(ends))


def _find_sub(
    fine: CyclicWord, parent: Letter, stratum: int, param: Fraction, end: str
) -> Optional[int]:
    for k, fl in enumerate(fine.letters):
        if fl.corridor.orientation != parent.corridor.orientation:
            continue
        if fl.corridor.stratum != stratum or fl.sign != parent.sign:
            continue
        t = fl.interval.start if end == "start" else _mod1(fl.interval.end)
        if t == param:
            return k
    return None


def _check_sub_extent(parent: Letter, sub: Letter, j: int) -> None:
    pe, se = parent.corridor.extent, sub.corridor.extent
    if not (pe[0] <= se[0] and se[1] <= pe[1]):
        raise RefinementViolation(
            f"sub-letter {sub.text} extends outside parent {j} ({parent.text})"
        )


def _open_intervals_meet(a: CrossingInterval, b: CrossingInterval) -> bool:
    # Compare on the circle by unrolling both around b's start.
    a0, a1 = a.start, a.end
    b0, b1 = b.start, b.end
    for shift in (-1, 0, 1):
        s0, s1 = a0 + shift, a1 + shift
        if s0 < b1 and b0 < s1:
            return True
    return False


# ---------------------------------------------------------------------------
# Realization: route an abstract word back into the space.


_DYADIC_SLOTS = None


def _dyadic(slot: int) -> Fraction:
    """slot-th member of 1/2, 1/4, 3/4, 1/8, 3/8, 5/8, 7/8, 1/16, ...

    Odd numerators over growing powers of two: distinct, dense, and never
    on a ternary grid line once added to an integer.
    """
    if slot == 0:
        return Fraction(1, 2)
    k, base = slot - 1, 4
    while k >= base // 2:
        k -= base // 2
        base *= 2
    return Fraction(2 * k + 1, base)


class _SlotCounter:
    def __init__(self):
        self.used: dict = {}

    def next(self, key) -> Fraction:
        n = self.used.get(key, 0)
        self.used[key] = n + 1
        return _dyadic(n)


def realize_word(
    word: CyclicWord,
    seq: DefiningSequence,
    basepoint_cell: tuple[int, int] | None = None,
) -> PolyLoop:
    """Build a loop whose level-(word.level) encoding is the given word.

    Routing runs every crossing along an even lane adjacent to the strip,
    with in-cell connectors between consecutive letters.  Consecutive
    letters must be joinable inside a single kept cell; otherwise the
    canonical scheme gives up with Unroutable.  The empty word becomes a
    small triangle inside the basepoint cell.
    """
    i = word.level
    seq.check_level(i)
    n = _pow3(i)
    depth = seq.depth
    scale = _pow3(depth)
    blow = _pow3(depth - i)

    if len(word) == 0:
        a, b = basepoint_cell if basepoint_cell is not None else (0, 0)
        if not seq.cell_in_space(a, b, i):
            raise Unroutable(f"basepoint cell {(a, b)} not in the level-{i} space")
        # Descend to a depth-scale sub-cell whose deeper ternary prefixes
        # are all even, so the triangle is clear of holes at every level.
        if depth > i:
            ax = (3 * a + (a & 1)) * _pow3(depth - i - 1)
            by = (3 * b + (b & 1)) * _pow3(depth - i - 1)
        else:
            ax, by = a, b
        pt = lambda dx, dy: (Fraction(ax * 4 + dx, 4 * scale), Fraction(by * 4 + dy, 4 * scale))
        return PolyLoop((pt(1, 1), pt(3, 1), pt(1, 3)))

    letters = list(word.letters)
    for l in letters:
        if l.corridor.level != i:
            raise ValueError(f"letter {l.text} not at word level {i}")

    # One lane variable per letter: the even coordinate of the crossing
    # lane (a column for H letters, a row for V letters).  Junction cells
    # tie consecutive variables together or pin them to constants.
    nL = len(letters)
    parent = list(range(nL))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int, pair):
        rx, ry = find(x), find(y)
        if rx == ry:
            return
        if fixed.get(rx) is not None and fixed.get(ry) is not None:
            if fixed[rx] != fixed[ry]:
                raise Unroutable(
                    f"letters {pair} demand different lanes", pair=pair
                )
        parent[ry] = rx
        if fixed.get(ry) is not None:
            fixed[rx] = fixed[ry]

    def pin(x: int, v: int, pair):
        r = find(x)
        old = fixed.get(r)
        if old is not None and old != v:
            raise Unroutable(f"letters {pair} pin lane both to {old} and {v}", pair=pair)
        fixed[r] = v

    fixed: dict[int, int] = {}
    strat = [l.corridor.stratum for l in letters]
    orient = [l.corridor.orientation for l in letters]
    sign = [l.sign for l in letters]

    for j in range(nL):
        k = (j + 1) % nL
        pair = (j, k)
        rj = 2 * strat[j] - 1
        rk = 2 * strat[k] - 1
        if orient[j] == orient[k]:
            if rj + sign[j] != rk - sign[k]:
                raise Unroutable(
                    f"consecutive {orient[j]} letters {pair} exit/enter "
                    "different lanes", pair=pair
                )
            union(j, k, pair)
        elif orient[j] == "H":
            pin(j, rk - sign[k], pair)
            pin(k, rj + sign[j], pair)
        else:
            pin(k, rj + sign[j], pair)
            pin(j, rk - sign[k], pair)

    # Uniform-orientation words have one unpinned class: pick the
    # middle-most even lane lying in every extent, smaller on ties.
    lane = [0] * nL
    roots: dict[int, list[int]] = {}
    for j in range(nL):
        roots.setdefault(find(j), []).append(j)
    for r, members in roots.items():
        v = fixed.get(r)
        if v is None:
            cands = None
            for j in members:
                e0, e1 = letters[j].corridor.extent_units()
                mine = set(range(e0, e1, 2))
                cands = mine if cands is None else (cands & mine)
            if not cands:
                raise Unroutable(
                    f"letters {tuple(members)} share no even lane", pair=None
                )
            ordered = sorted(cands)
            v = ordered[(len(ordered) - 1) // 2]
        for j in members:
            lane[j] = v

    for j in range(nL):
        e0, e1 = letters[j].corridor.extent_units()
        if not (e0 <= lane[j] < e1):
            raise Unroutable(
                f"lane {lane[j]} for letter {j} ({letters[j].text}) "
                f"misses extent [{e0},{e1})", pair=(j, (j + 1) % nL)
            )
        if lane[j] % 2 != 0:
            raise Unroutable(f"letter {j} forced onto odd lane {lane[j]}", pair=(j, (j + 1) % nL))

    # Junction cell of (j, j+1) and a sanity check that every cell the
    # route touches is kept.
    def cells_of(j: int) -> tuple[tuple[int, int], tuple[int, int]]:
        r = 2 * strat[j] - 1
        if orient[j] == "H":
            return ((lane[j], r - sign[j]), (lane[j], r + sign[j]))
        return ((r - sign[j], lane[j]), (r + sign[j], lane[j]))

    for j in range(nL):
        for cell in cells_of(j):
            if not seq.cell_in_space(cell[0], cell[1], i):
                raise Unroutable(
                    f"letter {j} ({letters[j].text}) needs removed cell {cell}",
                    pair=(j, (j + 1) % nL),
                )
        exit_cell = cells_of(j)[1]
        start_next = cells_of((j + 1) % nL)[0]
        if exit_cell != start_next:
            raise Unroutable(
                f"letters {(j, (j + 1) % nL)} do not meet in one cell",
                pair=(j, (j + 1) % nL),
            )

    # Transverse positions: one safe sub-lane coordinate per letter, then
    # one per same-orientation junction, drawn from per-lane counters so
    # no two segments share a line.
    slots = _SlotCounter()

    def safe(axis: str, unit_i: int) -> Fraction:
        base = unit_i * blow
        return (base + slots.next((axis, base))) / scale

    tau = [
        safe("x" if orient[j] == "H" else "y", lane[j]) for j in range(nL)
    ]
    conn: dict[int, Fraction] = {}
    for j in range(nL):
        k = (j + 1) % nL
        if orient[j] == orient[k]:
            cell = cells_of(j)[1]
            if orient[j] == "H":
                conn[j] = safe("y", cell[1])
            else:
                conn[j] = safe("x", cell[0])

    # Walk the letters, emitting the crossing segment endpoints; equal
    # consecutive points collapse (cross-orientation junctions).
    def junction_point(j: int) -> Point:
        k = (j + 1) % nL
        if orient[j] == orient[k]:
            if orient[j] == "H":
                return (tau[j], conn[j])
            return (conn[j], tau[j])
        if orient[j] == "H":
            return (tau[j], tau[k])
        return (tau[k], tau[j])

    def junction_point_after(j: int) -> Point:
        # Where letter j+1's crossing segment begins.
        k = (j + 1) % nL
        if orient[j] == orient[k]:
            if orient[k] == "H":
                return (tau[k], conn[j])
            return (conn[j], tau[k])
        return junction_point(j)

    vertices: list[Point] = []
    for j in range(nL):
        a = junction_point_after((j - 1) % nL)
        b = junction_point(j)
        for p in (a, b):
            if not vertices or vertices[-1] != p:
                vertices.append(p)
    if len(vertices) > 1 and vertices[0] == vertices[-1]:
        vertices.pop()
    return PolyLoop(tuple(vertices))
