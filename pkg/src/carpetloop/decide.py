"""Deciding whether a loop contracts in a finite-level grid complement.

The verdict is three-valued.  A nonempty reduced puncture word at some
level is a complete proof of nontriviality and is reported with the
smallest such level.  When every level kills the loop, the decider
additionally searches for a coherent family of cancellation diagrams,
one per level, each inducing the next shallower one; the result is
conclusive exactly when no removed square lies deeper than the levels
examined.  Anything that prevents an honest answer (invalid input,
search caps, degenerate ray positions) comes back as Inconclusive
rather than a guess.
"""

from __future__ import annotations

import logging
import os
import tempfile
from dataclasses import dataclass, field
from typing import Optional, Union

from .errors import (
    CapExceeded,
    DegeneratePosition,
    MalformedDiagram,
    NoInducedDiagram,
    NotFoundError,
    RefinementViolation,
)
from .freegroup import FreeWord, puncture_word
from .grid import DefiningSequence, PolyLoop, validate_loop
from .serialize import (
    canonical_json,
    diagram_to_json,
    loop_to_json,
    sha256_hex,
    space_to_json,
)
from .traces import (
    CancellationDiagram,
    CoherentScheme,
    SearchCaps,
    TraceWord,
    coherent_scheme,
    diagram_valid,
    induce_diagram,
    trace_trivial,
)
from .words import CyclicWord, RefinementCorrespondence, encode_word, refinement_map

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Nontrivial:
    level: int
    witness: FreeWord


@dataclass(frozen=True)
class TrivialUpTo:
    depth: int
    scheme: CoherentScheme
    conclusive: bool


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    kind: str  # "validation" | "caps" | "degeneracy" | "internal"


Verdict = Union[Nontrivial, TrivialUpTo, Inconclusive]


@dataclass
class Evidence:
    words: list[CyclicWord] = field(default_factory=list)
    free_words: list[FreeWord] = field(default_factory=list)
    refinements: list[RefinementCorrespondence] = field(default_factory=list)
    scheme: Optional[CoherentScheme] = None


def _dump_corroboration_failure(
    loop: PolyLoop, seq: DefiningSequence, i: int, word: CyclicWord, free: FreeWord
) -> str:
    payload = canonical_json(
        {
            "level": i,
            "space": space_to_json(seq),
            "loop": loop_to_json(loop),
            "word": word.text,
            "free_word": free.text,
        }
    )
    fd, path = tempfile.mkstemp(prefix="carpetloop-disagreement-", suffix=".json")
    with os.fdopen(fd, "w") as f:
        f.write(payload)
    return path


def max_hole_level(seq: DefiningSequence) -> int:
    return max((q.level for q in seq.removed), default=0)


def _decide_full(
    loop: PolyLoop,
    seq: DefiningSequence,
    N: Optional[int] = None,
    caps: SearchCaps = SearchCaps(),
    tie_break: str = "h_first",
) -> tuple[Verdict, Evidence]:
    N = seq.depth if N is None else N
    seq.check_level(N)
    ev = Evidence()

    report = validate_loop(loop, seq, seq.depth)
    if not report.ok:
        return Inconclusive(report.first.describe(), "validation"), ev

    for i in range(1, N + 1):
        try:
            free = puncture_word(loop, seq, i)
        except DegeneratePosition as e:
            return Inconclusive(str(e), "degeneracy"), ev
        word = encode_word(loop, seq, i, tie_break=tie_break)
        # Independent cross-check: the piling verdict on the corridor
        # word must agree with reduction in the free group.
        piled = trace_trivial(TraceWord.from_cyclic(word))
        if piled != free.is_identity:
            path = _dump_corroboration_failure(loop, seq, i, word, free)
            log.error(
                "level-%d verdicts disagree (piling=%s, free=%s); "
                "inputs saved to %s",
                i,
                piled,
                free.is_identity,
                path,
            )
            return (
                Inconclusive(
                    f"internal disagreement at level {i}; details in {path}",
                    "internal",
                ),
                ev,
            )
        ev.words.append(word)
        ev.free_words.append(free)
        if not free.is_identity:
            return Nontrivial(i, free), ev

    try:
        for i in range(1, N):
            ev.refinements.append(refinement_map(loop, seq, i, tie_break=tie_break))
    except RefinementViolation as e:
        return Inconclusive(f"refinement failed on a valid loop: {e}", "internal"), ev

    try:
        scheme = coherent_scheme(ev.words, ev.refinements, caps=caps)
    except CapExceeded as e:
        return Inconclusive(str(e), "caps"), ev
    except NotFoundError as e:
        return (
            Inconclusive(
                f"no coherent scheme though all levels vanish (level {e.level}); "
                "this contradicts the expected theory",
                "internal",
            ),
            ev,
        )
    ev.scheme = scheme
    conclusive = max_hole_level(seq) <= N
    return TrivialUpTo(N, scheme, conclusive), ev


def decide(
    loop: PolyLoop,
    seq: DefiningSequence,
    N: Optional[int] = None,
    caps: SearchCaps = SearchCaps(),
    tie_break: str = "h_first",
) -> Verdict:
    """Decide contractibility of the loop through level N (default: depth)."""
    verdict, _ = _decide_full(loop, seq, N, caps, tie_break)
    return verdict


# ---------------------------------------------------------------------------
# Certificates


@dataclass(frozen=True)
class Certificate:
    """Replayable evidence for a verdict, bound to its inputs by hash."""

    kind: str  # "nontrivial" | "trivial_up_to"
    level: int
    space_sha: str
    loop_sha: str
    words: tuple[str, ...]
    free_words: tuple[str, ...]
    witness: Optional[str]
    diagrams: tuple[tuple[tuple[int, int], ...], ...]
    conclusive: Optional[bool]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "level": self.level,
            "space_sha256": self.space_sha,
            "loop_sha256": self.loop_sha,
            "words": list(self.words),
            "free_words": list(self.free_words),
            "witness": self.witness,
            "diagrams": [diagram_to_json(d) for d in self.diagrams],
            "conclusive": self.conclusive,
        }

    @staticmethod
    def from_json(data: dict) -> "Certificate":
        return Certificate(
            kind=data["kind"],
            level=int(data["level"]),
            space_sha=data["space_sha256"],
            loop_sha=data["loop_sha256"],
            words=tuple(data["words"]),
            free_words=tuple(data["free_words"]),
            witness=data.get("witness"),
            diagrams=tuple(
                tuple((int(a), int(b)) for a, b in d) for d in data.get("diagrams", [])
            ),
            conclusive=data.get("conclusive"),
        )


def make_certificate(
    loop: PolyLoop,
    seq: DefiningSequence,
    N: Optional[int] = None,
    caps: SearchCaps = SearchCaps(),
    tie_break: str = "h_first",
) -> tuple[Verdict, Optional[Certificate]]:
    verdict, ev = _decide_full(loop, seq, N, caps, tie_break)
    if isinstance(verdict, Inconclusive):
        return verdict, None
    space_sha = sha256_hex(canonical_json(space_to_json(seq)))
    loop_sha = sha256_hex(canonical_json(loop_to_json(loop)))
    if isinstance(verdict, Nontrivial):
        cert = Certificate(
            kind="nontrivial",
            level=verdict.level,
            space_sha=space_sha,
            loop_sha=loop_sha,
            words=tuple(w.text for w in ev.words),
            free_words=tuple(w.text for w in ev.free_words),
            witness=verdict.witness.text,
            diagrams=(),
            conclusive=None,
        )
        return verdict, cert
    cert = Certificate(
        kind="trivial_up_to",
        level=verdict.depth,
        space_sha=space_sha,
        loop_sha=loop_sha,
        words=tuple(w.text for w in ev.words),
        free_words=tuple(w.text for w in ev.free_words),
        witness=None,
        diagrams=tuple(
            tuple(d.sorted_pairs) for d in verdict.scheme.diagrams
        ),
        conclusive=verdict.conclusive,
    )
    return verdict, cert


@dataclass(frozen=True)
class CheckReport:
    ok: bool
    reason: str = ""


def check_certificate(
    cert: Certificate, loop: PolyLoop, seq: DefiningSequence, tie_break: str = "h_first"
) -> CheckReport:
    """Replay a certificate against its claimed inputs.

    Recomputes only what the certificate asserts: hashes, per-level
    words up to the stated level, the witness or the diagram chain.
    """
    if sha256_hex(canonical_json(space_to_json(seq))) != cert.space_sha:
        return CheckReport(False, "space hash mismatch")
    if sha256_hex(canonical_json(loop_to_json(loop))) != cert.loop_sha:
        return CheckReport(False, "loop hash mismatch")
    if cert.kind not in ("nontrivial", "trivial_up_to"):
        return CheckReport(False, f"unknown kind {cert.kind!r}")
    if not (1 <= cert.level <= seq.depth):
        return CheckReport(False, "level out of range")
    if len(cert.words) != cert.level or len(cert.free_words) != cert.level:
        return CheckReport(False, "wrong number of per-level words")

    words = []
    for i in range(1, cert.level + 1):
        try:
            free = puncture_word(loop, seq, i)
        except DegeneratePosition as e:
            return CheckReport(False, f"degenerate input at level {i}: {e}")
        word = encode_word(loop, seq, i, tie_break=tie_break)
        words.append(word)
        if word.text != cert.words[i - 1]:
            return CheckReport(False, f"level-{i} word mismatch")
        if free.text != cert.free_words[i - 1]:
            return CheckReport(False, f"level-{i} free word mismatch")
        if cert.kind == "nontrivial":
            expect_identity = i < cert.level
        else:
            expect_identity = True
        if free.is_identity != expect_identity:
            return CheckReport(False, f"level-{i} triviality mismatch")

    if cert.kind == "nontrivial":
        if cert.witness != cert.free_words[-1]:
            return CheckReport(False, "witness differs from the top-level word")
        return CheckReport(True)

    if len(cert.diagrams) != cert.level:
        return CheckReport(False, "wrong number of diagrams")
    diagrams = [CancellationDiagram.of(*pairs) for pairs in cert.diagrams]
    for i, (word, d) in enumerate(zip(words, diagrams), start=1):
        try:
            valid = diagram_valid(TraceWord.from_cyclic(word), d)
        except MalformedDiagram as e:
            return CheckReport(False, f"level-{i} diagram malformed: {e}")
        if not valid:
            return CheckReport(False, f"level-{i} diagram invalid")
    for i in range(1, cert.level):
        corr = refinement_map(loop, seq, i, tie_break=tie_break)
        try:
            induced = induce_diagram(diagrams[i], corr)
        except NoInducedDiagram as e:
            return CheckReport(False, f"level-{i + 1} diagram induces nothing: {e}")
        if diagrams[i - 1] not in induced:
            return CheckReport(
                False, f"level-{i + 1} diagram does not induce the level-{i} one"
            )
    conclusive = max_hole_level(seq) <= cert.level
    if cert.conclusive is not None and cert.conclusive != conclusive:
        return CheckReport(False, "conclusiveness flag is wrong")
    return CheckReport(True)
