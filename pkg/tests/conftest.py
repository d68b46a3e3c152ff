"""Shared fixtures and independent oracles for the test suite.

The oracles here are deliberately written from first principles, not by
calling back into the package, so frozen expected values in the tests
were produced by genuinely independent computations.
"""

from __future__ import annotations

import random
from collections import deque
from fractions import Fraction
from functools import lru_cache

import pytest

from carpetloop import (
    CrossingInterval,
    CyclicWord,
    DefiningSequence,
    Letter,
    TraceWord,
    corridors,
    realize_word,
)
from carpetloop.errors import Unroutable


@pytest.fixture(scope="session")
def fc1():
    return DefiningSequence.full_carpet(1)


@pytest.fixture(scope="session")
def fc2():
    return DefiningSequence.full_carpet(2)


@pytest.fixture(scope="session")
def fc3():
    return DefiningSequence.full_carpet(3)


@pytest.fixture(scope="session")
def fc4():
    return DefiningSequence.full_carpet(4)


# ---------------------------------------------------------------------------
# Independent eligibility oracle


def brute_eligible(i: int) -> set[tuple[int, int]]:
    """Candidate squares at level i not inside any shallower candidate."""

    def interval(k: int, s: int) -> tuple[Fraction, Fraction]:
        return (Fraction(2 * k - 1, 3**s), Fraction(2 * k, 3**s))

    out = set()
    for k in range(1, (3**i - 1) // 2 + 1):
        for m in range(1, (3**i - 1) // 2 + 1):
            xk, yk = interval(k, i), interval(m, i)
            contained = False
            for s in range(1, i):
                for ks in range(1, (3**s - 1) // 2 + 1):
                    for ms in range(1, (3**s - 1) // 2 + 1):
                        xs, ys = interval(ks, s), interval(ms, s)
                        if (
                            xs[0] <= xk[0]
                            and xk[1] <= xs[1]
                            and ys[0] <= yk[0]
                            and yk[1] <= ys[1]
                        ):
                            contained = True
            if not contained:
                out.add((k, m))
    return out


# ---------------------------------------------------------------------------
# Independent word-triviality oracles


def bfs_trivial(letters, commutes, cap=200_000) -> bool:
    """Breadth-first reduction to the empty word.

    Moves: delete an adjacent inverse pair, swap adjacent commuting
    letters, rotate.  Letters are (generator, sign) pairs; commutes is a
    set of frozenset pairs of generators.
    """
    start = tuple(letters)
    if not start:
        return True
    seen = {start}
    queue = deque([start])
    steps = 0
    while queue:
        w = queue.popleft()
        steps += 1
        if steps > cap:
            raise RuntimeError("bfs oracle exceeded its cap")
        n = len(w)
        nexts = []
        nexts.append(w[1:] + w[:1])
        for j in range(n):
            k = (j + 1) % n
            a, b = w[j], w[k]
            if a[0] == b[0] and a[1] == -b[1]:
                if k > j:
                    nexts.append(w[:j] + w[j + 2 :])
                else:
                    nexts.append(w[1:-1])
            elif a[0] != b[0] and frozenset((a[0], b[0])) in commutes:
                if k > j:
                    nexts.append(w[:j] + (b, a) + w[j + 2 :])
                else:
                    nexts.append((a,) + w[1:-1] + (b,))
        for nw in nexts:
            if not nw:
                return True
            if nw not in seen:
                seen.add(nw)
                queue.append(nw)
    return False


def subset_dp_trivial(letters, commutes) -> bool:
    """Pair-deletion oracle over subsets of alive positions.

    A pair of inverse letters may be deleted when all alive letters
    strictly inside one of the two arcs between them commute with the
    pair's generator; the word is trivial when some deletion order
    empties it.
    """
    n = len(letters)
    if n == 0:
        return True
    if n % 2:
        return False

    def commute(g, h):
        return g == h or frozenset((g, h)) in commutes

    @lru_cache(maxsize=None)
    def solve(alive: frozenset) -> bool:
        if not alive:
            return True
        order = sorted(alive)
        for ai, p in enumerate(order):
            for q in order[ai + 1 :]:
                a, b = letters[p], letters[q]
                if a[0] != b[0] or a[1] != -b[1]:
                    continue
                inner = [r for r in order if p < r < q]
                outer = [r for r in order if r < p or r > q]
                ok_in = all(commute(letters[r][0], a[0]) for r in inner)
                ok_out = all(commute(letters[r][0], a[0]) for r in outer)
                if (ok_in or ok_out) and solve(alive - {p, q}):
                    return True
        return False

    return solve(frozenset(range(n)))


def make_trace(tokens, commuting=()) -> TraceWord:
    return TraceWord.from_strings(tokens, commuting)


# ---------------------------------------------------------------------------
# Word and walk builders


def word_from_letters(seq, level, pairs) -> CyclicWord:
    """Assemble a word from (corridor, sign) pairs with synthetic marks."""
    n = max(1, len(pairs))
    letters = []
    for j, (corr, sign) in enumerate(pairs):
        start = Fraction(j, n)
        iv = CrossingInterval(start, start + Fraction(1, 2 * n), corr, sign)
        letters.append(Letter(corr, sign, iv))
    from carpetloop import crossing_relation

    present = {l.generator for l in letters}
    rel = frozenset(p for p in crossing_relation(seq, level) if p <= present)
    return CyclicWord(level, tuple(letters), rel)


def _corridor_lookup(seq, level):
    table = {}
    for c in corridors(seq, level):
        e0, e1 = c.extent_units()
        for lane in range(e0, e1):
            table[(c.orientation, c.stratum, lane)] = c
    return table


def _move_letter(table, cell, move):
    """Corridor and sign for a 2-step move between even-even cells."""
    a, b = cell
    da, db = move
    if da:
        stratum = (a + da + 1) // 2 if da > 0 else (a - 1 + 1) // 2
        corr = table.get(("V", stratum, b))
        sign = 1 if da > 0 else -1
    else:
        stratum = (b + db + 1) // 2 if db > 0 else (b - 1 + 1) // 2
        corr = table.get(("H", stratum, a))
        sign = 1 if db > 0 else -1
    return corr, sign


def _walk_ok(seq, level, cell, move):
    n = 3**level
    a, b = cell
    da, db = move
    na, nb = a + 2 * da, b + 2 * db
    if not (0 <= na < n and 0 <= nb < n):
        return False
    mid = (a + da, b + db)
    return seq.cell_in_space(mid[0], mid[1], level) and seq.cell_in_space(
        na, nb, level
    )


def out_and_back_word(seq, level, rng: random.Random, max_len=4) -> CyclicWord:
    """A retraced cell-walk word: forward moves, then exact reversal."""
    n = 3**level
    table = _corridor_lookup(seq, level)
    while True:
        evens = [
            (a, b)
            for a in range(0, n, 2)
            for b in range(0, n, 2)
            if seq.cell_in_space(a, b, level)
        ]
        cell = rng.choice(evens)
        moves = []
        cur = cell
        for _ in range(rng.randint(1, max_len)):
            opts = [
                mv
                for mv in ((1, 0), (-1, 0), (0, 1), (0, -1))
                if _walk_ok(seq, level, cur, mv)
            ]
            if not opts:
                break
            mv = rng.choice(opts)
            moves.append((cur, mv))
            cur = (cur[0] + 2 * mv[0], cur[1] + 2 * mv[1])
        if not moves:
            continue
        pairs = []
        for c, mv in moves:
            corr, sign = _move_letter(table, c, mv)
            assert corr is not None
            pairs.append((corr, sign))
        for c, mv in reversed(moves):
            back = (-mv[0], -mv[1])
            dest = (c[0] + 2 * mv[0], c[1] + 2 * mv[1])
            corr, sign = _move_letter(table, dest, back)
            assert corr is not None
            pairs.append((corr, sign))
        return word_from_letters(seq, level, pairs)


def closed_walk_word(seq, level, rng: random.Random, wander=6) -> CyclicWord:
    """A random cell-walk word closed up by a shortest path back home."""
    n = 3**level
    table = _corridor_lookup(seq, level)
    evens = [
        (a, b)
        for a in range(0, n, 2)
        for b in range(0, n, 2)
        if seq.cell_in_space(a, b, level)
    ]
    while True:
        start = rng.choice(evens)
        cur = start
        moves = []
        for _ in range(rng.randint(2, wander)):
            opts = [
                mv
                for mv in ((1, 0), (-1, 0), (0, 1), (0, -1))
                if _walk_ok(seq, level, cur, mv)
            ]
            if not opts:
                break
            mv = rng.choice(opts)
            moves.append((cur, mv))
            cur = (cur[0] + 2 * mv[0], cur[1] + 2 * mv[1])
        # close up with BFS over even-even cells
        prev = {cur: None}
        queue = deque([cur])
        while queue:
            c = queue.popleft()
            if c == start:
                break
            for mv in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                if _walk_ok(seq, level, c, mv):
                    nc = (c[0] + 2 * mv[0], c[1] + 2 * mv[1])
                    if nc not in prev:
                        prev[nc] = (c, mv)
                        queue.append(nc)
        if start not in prev:
            continue
        path = []
        c = start
        while prev[c] is not None:
            pc, mv = prev[c]
            path.append((pc, mv))
            c = pc
        moves.extend(reversed(path))
        if not moves:
            continue
        pairs = []
        for c, mv in moves:
            corr, sign = _move_letter(table, c, mv)
            assert corr is not None
            pairs.append((corr, sign))
        return word_from_letters(seq, level, pairs)


def realized_loop(seq, word, ray_levels=()):
    """Realize a word, or None when the canonical route does not exist.

    With ray_levels, also discard loops that park a vertex on a puncture
    counting ray at one of those levels, since free-group comparisons
    are undefined for them.
    """
    try:
        loop = realize_word(word, seq)
    except Unroutable:
        return None
    if ray_levels:
        from carpetloop import puncture_word
        from carpetloop.errors import DegeneratePosition

        try:
            for i in ray_levels:
                puncture_word(loop, seq, i)
        except DegeneratePosition:
            return None
    return loop
