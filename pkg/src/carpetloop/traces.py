"""Triviality and cancellation structure for partially commutative words.

Letters cancel in inverse pairs, and letters of crossing corridors may
slide past each other; everything here is exact combinatorics on those
two rules.  Validity of a pairing is decided by greedy nested
elimination, which is order-independent: deleting one deletable pair
never makes another deletable pair undeletable.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

from .errors import CapExceeded, MalformedDiagram, NoInducedDiagram, NotFoundError
from .words import CyclicWord, RefinementCorrespondence

log = logging.getLogger(__name__)

Gen = object  # corridor id tuple or plain string; any hashable, orderable kind


@dataclass(frozen=True)
class TraceWord:
    """A cyclic word in signed generators with a commutation relation."""

    letters: tuple[tuple[Gen, int], ...]
    commutes: frozenset[frozenset]

    def __len__(self) -> int:
        return len(self.letters)

    def commute(self, a: Gen, b: Gen) -> bool:
        return a != b and frozenset((a, b)) in self.commutes

    @staticmethod
    def from_cyclic(word: CyclicWord) -> "TraceWord":
        return TraceWord(word.generator_keys(), word.commutes)

    @staticmethod
    def from_strings(tokens: Sequence[str], commuting: Iterable[tuple[str, str]] = ()) -> "TraceWord":
        letters = []
        for tok in tokens:
            if tok.endswith("^-1"):
                letters.append((tok[:-3], -1))
            elif tok.endswith("-"):
                letters.append((tok[:-1], -1))
            elif tok.endswith("+"):
                letters.append((tok[:-1], 1))
            else:
                letters.append((tok, 1))
        return TraceWord(
            tuple(letters), frozenset(frozenset(p) for p in commuting)
        )

    @property
    def text(self) -> str:
        return " ".join(f"{g}{'+' if e > 0 else '-'}" for g, e in self.letters)


def trace_trivial(word: TraceWord) -> bool:
    """Does the word reduce to nothing under cancellation and sliding?

    Standard piling argument: every letter drops a piece onto the stack
    of its own generator and a blocker onto one shared stack per
    non-commuting partner, so two letters interact exactly when they
    must.  A letter cancels the top piece of its stack exactly when that
    piece, blockers included, is fully exposed.  Triviality is
    conjugation-invariant, so testing one rotation suffices for the
    cyclic word.
    """
    gens = sorted({g for g, _ in word.letters}, key=repr)
    stacks: dict[Gen, list] = {g: [] for g in gens}
    edges: dict[frozenset, list] = {}
    partners = {
        g: [h for h in gens if h != g and not word.commute(h, g)] for g in gens
    }
    for g in gens:
        for h in partners[g]:
            edges.setdefault(frozenset((g, h)), [])
    counter = 0
    for g, e in word.letters:
        mine = [edges[frozenset((g, h))] for h in partners[g]]
        top = stacks[g][-1] if stacks[g] else None
        if top is not None and top[1] == -e:
            pid = top[0]
            if all(s and s[-1] == pid for s in mine):
                stacks[g].pop()
                for s in mine:
                    s.pop()
                continue
        counter += 1
        stacks[g].append((counter, e))
        for s in mine:
            s.append(counter)
    return all(not s for s in stacks.values()) and all(
        not s for s in edges.values()
    )


@dataclass(frozen=True)
class CancellationDiagram:
    """A perfect matching of word positions into cancelling pairs."""

    pairs: frozenset[tuple[int, int]]

    @staticmethod
    def of(*pairs: tuple[int, int]) -> "CancellationDiagram":
        return CancellationDiagram(
            frozenset(tuple(sorted(p)) for p in pairs)
        )

    @property
    def sorted_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(self.pairs))

    def partner(self) -> dict[int, int]:
        out = {}
        for p, q in self.pairs:
            out[p], out[q] = q, p
        return out


def _check_matching(word: TraceWord, diagram: CancellationDiagram) -> None:
    seen: set[int] = set()
    n = len(word)
    for p, q in diagram.pairs:
        if not (0 <= p < q < n):
            raise MalformedDiagram(f"pair ({p},{q}) out of range for length {n}")
        if p in seen or q in seen:
            raise MalformedDiagram(f"position reused in pair ({p},{q})")
        seen.update((p, q))
        (gp, ep), (gq, eq) = word.letters[p], word.letters[q]
        if gp != gq or ep != -eq:
            raise MalformedDiagram(
                f"pair ({p},{q}) does not match inverse letters"
            )
    if len(seen) != n:
        raise MalformedDiagram(f"matching covers {len(seen)} of {n} positions")


def _deletable(word: TraceWord, alive: set[int], p: int, q: int) -> bool:
    """Can (p, q) cancel now: one side of the chord all commutes with it."""
    g = word.letters[p][0]
    inside_ok = all(
        word.commute(word.letters[r][0], g)
        for r in alive
        if p < r < q
    )
    if inside_ok:
        return True
    return all(
        word.commute(word.letters[r][0], g)
        for r in alive
        if r < p or r > q
    )


def diagram_valid(word: TraceWord, diagram: CancellationDiagram) -> bool:
    """Greedy nested elimination; order of deletions does not matter."""
    _check_matching(word, diagram)
    alive = set(range(len(word)))
    remaining = list(diagram.sorted_pairs)
    while remaining:
        progress = False
        kept = []
        for p, q in remaining:
            if _deletable(word, alive, p, q):
                alive.discard(p)
                alive.discard(q)
                progress = True
            else:
                kept.append((p, q))
        remaining = kept
        if not progress:
            return False
    return True


class Budget:
    """A shared work counter for the diagram searches."""

    def __init__(self, limit: int):
        self.limit = limit
        self.spent = 0

    def charge(self, n: int = 1, partial=None) -> None:
        self.spent += n
        if self.spent > self.limit:
            raise CapExceeded(
                f"work budget {self.limit} exhausted", partial=partial
            )


def _crosses(a: tuple[int, int], b: tuple[int, int]) -> bool:
    (p, q), (r, s) = a, b
    return (p < r < q < s) or (r < p < s < q)


def _iter_matchings(
    word: TraceWord,
    preassigned: Iterable[tuple[int, int]],
    budget: Optional[Budget],
) -> Iterator[CancellationDiagram]:
    """All valid diagrams containing the preassigned pairs, lexicographically.

    Candidates are grown over the first free position with two sound
    prunes (non-commuting chords never cross; non-commuting generators
    must balance inside every chord); full validity is checked last.
    """
    n = len(word)
    letters = word.letters
    base = [tuple(sorted(p)) for p in preassigned]
    used = set()
    for p, q in base:
        if p in used or q in used:
            raise MalformedDiagram(f"preassigned pairs reuse position {p},{q}")
        used.update((p, q))

    sums: dict[Gen, int] = {}
    for g, e in letters:
        sums[g] = sums.get(g, 0) + e
    if any(v != 0 for v in sums.values()):
        return

    def compatible(pairs: list[tuple[int, int]], cand: tuple[int, int]) -> bool:
        g = letters[cand[0]][0]
        for other in pairs:
            h = letters[other[0]][0]
            if not word.commute(g, h) and _crosses(cand, other):
                return False
        p, q = cand
        inside = [r for r in range(p + 1, q) if r not in used_now]
        for h in {letters[r][0] for r in inside}:
            if h == g or not word.commute(h, g):
                if sum(letters[r][1] for r in inside if letters[r][0] == h) != 0:
                    return False
        return True

    used_now = set(used)
    chosen: list[tuple[int, int]] = list(base)

    def rec() -> Iterator[CancellationDiagram]:
        if budget is not None:
            budget.charge()
        p = next((r for r in range(n) if r not in used_now), None)
        if p is None:
            d = CancellationDiagram(frozenset(chosen))
            if diagram_valid(word, d):
                yield d
            return
        g, e = letters[p]
        for q in range(p + 1, n):
            if q in used_now:
                continue
            if letters[q] != (g, -e):
                continue
            cand = (p, q)
            if not compatible(chosen, cand):
                continue
            used_now.update(cand)
            chosen.append(cand)
            yield from rec()
            chosen.pop()
            used_now.difference_update(cand)

    yield from rec()


def enumerate_diagrams(
    word: TraceWord,
    cap: int = 100_000,
    budget: Optional[Budget] = None,
    preassigned: Iterable[tuple[int, int]] = (),
) -> tuple[CancellationDiagram, ...]:
    """All valid diagrams, deterministically ordered; CapExceeded past cap."""
    out: list[CancellationDiagram] = []
    for d in _iter_matchings(word, preassigned, budget):
        out.append(d)
        if len(out) > cap:
            raise CapExceeded(
                f"more than {cap} valid diagrams", partial=tuple(out[:cap])
            )
    return tuple(out)


def _forced_pairs(
    d_fine: CancellationDiagram, corr: RefinementCorrespondence
) -> frozenset[tuple[int, int]]:
    """Coarse pairs forced by fine pairs joining two parents' end letters."""
    role: dict[int, tuple[int, str]] = {}
    for j, (f, l) in enumerate(corr.ends):
        role[f] = (j, "first")
        role[l] = (j, "last")
    forced = set()
    for p, q in d_fine.pairs:
        rp, rq = role.get(p), role.get(q)
        if rp is None or rq is None:
            continue
        if rp[0] == rq[0]:
            raise NoInducedDiagram(
                f"fine pair ({p},{q}) joins both ends of coarse letter {rp[0]}"
            )
        forced.add(tuple(sorted((rp[0], rq[0]))))
    conflicts: dict[int, set[int]] = {}
    for a, b in forced:
        conflicts.setdefault(a, set()).add(b)
        conflicts.setdefault(b, set()).add(a)
    for c, partners in conflicts.items():
        if len(partners) > 1:
            raise NoInducedDiagram(
                f"coarse letter {c} forced against {sorted(partners)}"
            )
    return frozenset(forced)


def _induce_candidates(
    d_fine: CancellationDiagram,
    corr: RefinementCorrespondence,
    budget: Optional[Budget] = None,
    cap: int = 100_000,
) -> tuple[CancellationDiagram, ...]:
    coarse = TraceWord.from_cyclic(corr.coarse_word)
    try:
        forced = _forced_pairs(d_fine, corr)
    except NoInducedDiagram:
        raise
    try:
        return enumerate_diagrams(coarse, cap=cap, budget=budget, preassigned=forced)
    except MalformedDiagram as exc:
        raise NoInducedDiagram(str(exc)) from exc


def induce_diagram(
    d_fine: CancellationDiagram,
    corr: RefinementCorrespondence,
    cap: int = 100_000,
) -> tuple[CancellationDiagram, ...]:
    """All coarse diagrams consistent with a fine diagram across a refinement.

    Fine pairs whose two positions are end sub-letters of two different
    coarse letters force those coarse letters to pair; the result is
    every valid coarse diagram containing the forced pairs.  An empty
    result is loud: for genuine loop data it would contradict the
    induction property this package is built to check.
    """
    out = _induce_candidates(d_fine, corr, cap=cap)
    if not out:
        log.error(
            "no induced diagram: fine=%s coarse=%s ends=%s",
            sorted(d_fine.pairs),
            corr.coarse_word.text,
            corr.ends,
        )
        raise NoInducedDiagram(
            f"no valid coarse diagram extends forced pairs of {sorted(d_fine.pairs)}"
        )
    return out


@dataclass(frozen=True)
class SearchCaps:
    per_level: int = 100_000
    work: int = 2_000_000


@dataclass(frozen=True)
class CoherentScheme:
    """One cancellation diagram per level, each inducing the one below."""

    words: tuple[TraceWord, ...]
    diagrams: tuple[CancellationDiagram, ...]

    def verify(self, refinements: Sequence[RefinementCorrespondence]) -> bool:
        if len(self.words) != len(self.diagrams):
            return False
        for w, d in zip(self.words, self.diagrams):
            try:
                if not diagram_valid(w, d):
                    return False
            except MalformedDiagram:
                return False
        for idx, corr in enumerate(refinements):
            cands = _induce_candidates(self.diagrams[idx + 1], corr)
            if self.diagrams[idx] not in cands:
                return False
        return True


def coherent_scheme(
    words: Sequence[TraceWord | CyclicWord],
    refinements: Sequence[RefinementCorrespondence],
    caps: SearchCaps = SearchCaps(),
) -> CoherentScheme:
    """Find diagrams for every level that induce one another downward.

    Depth-first from the deepest level with memoized dead ends.  Raises
    NotFoundError with the deepest level that blocked every chain, or
    CapExceeded when a per-level enumeration or the global work budget
    overflows.
    """
    ws = [
        TraceWord.from_cyclic(w) if isinstance(w, CyclicWord) else w
        for w in words
    ]
    if len(refinements) != len(ws) - 1:
        raise ValueError(
            f"{len(ws)} words need {len(ws) - 1} refinements, got {len(refinements)}"
        )
    for idx, w in enumerate(ws):
        if not trace_trivial(w):
            raise NotFoundError(idx + 1, f"level-{idx + 1} word is not trivial")
    n = len(ws)
    budget = Budget(caps.work)
    dead: set[tuple[int, CancellationDiagram]] = set()
    blocked = [n]

    def chain(idx: int, d: CancellationDiagram) -> Optional[list[CancellationDiagram]]:
        if idx == 0:
            return [d]
        if (idx, d) in dead:
            return None
        try:
            cands = _induce_candidates(
                d, refinements[idx - 1], budget=budget, cap=caps.per_level
            )
        except NoInducedDiagram:
            cands = ()
        if not cands:
            blocked[0] = min(blocked[0], idx)
        for c in cands:
            sub = chain(idx - 1, c)
            if sub is not None:
                return sub + [d]
        dead.add((idx, d))
        return None

    count = 0
    any_top = False
    for d_top in _iter_matchings(ws[n - 1], (), budget):
        any_top = True
        count += 1
        if count > caps.per_level:
            raise CapExceeded(
                f"more than {caps.per_level} diagrams at level {n}", partial=None
            )
        result = chain(n - 1, d_top)
        if result is not None:
            return CoherentScheme(tuple(ws), tuple(result))
    if not any_top:
        blocked[0] = n
    raise NotFoundError(blocked[0], f"every chain blocked at level {blocked[0]}")
