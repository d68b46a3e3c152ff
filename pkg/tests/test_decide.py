"""Verdicts and replayable certificates."""

import random
from dataclasses import replace
from fractions import Fraction as F

import pytest

from carpetloop import (
    Certificate,
    DefiningSequence,
    Inconclusive,
    Nontrivial,
    PolyLoop,
    SearchCaps,
    TrivialUpTo,
    central_ring,
    check_certificate,
    decide,
    make_certificate,
)

from conftest import out_and_back_word, realized_loop

BAD_DIAGONAL = PolyLoop(((F(1, 5), F(1, 5)), (F(4, 5), F(1, 5)), (F(4, 5), F(4, 5))))
ON_RAY = PolyLoop(((F(3, 4), F(17, 36)), (F(5, 6), F(17, 36)), (F(3, 4), F(5, 12))))
# encircles the deepest-level hole at (2,1,1) and nothing coarser
DEEP_RING = PolyLoop(
    ((F(1, 18), F(1, 18)), (F(5, 18), F(1, 18)), (F(5, 18), F(5, 18)), (F(1, 18), F(5, 18)))
)


def trivial_loop(seq, level, rng, ray=True):
    levels = tuple(range(1, seq.depth + 1)) if ray else ()
    while True:
        loop = realized_loop(seq, out_and_back_word(seq, level, rng), ray_levels=levels)
        if loop is not None:
            return loop


class TestVerdicts:
    def test_central_ring_nontrivial(self, fc1, fc2):
        for seq in (fc1, fc2):
            v = decide(central_ring(seq), seq)
            assert isinstance(v, Nontrivial)
            assert v.level == 1
            assert v.witness.text == "g[1,1,1]"

    def test_reversed_ring_inverse_witness(self, fc1):
        v = decide(central_ring(fc1).reversed_loop(), fc1)
        assert isinstance(v, Nontrivial)
        assert v.witness.text == "g[1,1,1]^-1"

    def test_deep_hole_found_at_its_level(self, fc2):
        v = decide(DEEP_RING, fc2)
        assert isinstance(v, Nontrivial)
        assert v.level == 2
        assert v.witness.text == "g[2,1,1]"

    def test_out_and_back_trivial_and_conclusive(self, fc3):
        rng = random.Random(79)
        loop = trivial_loop(fc3, 3, rng)
        v = decide(loop, fc3)
        assert isinstance(v, TrivialUpTo)
        assert v.depth == 3 and v.conclusive
        assert len(v.scheme.diagrams) == 3

    def test_shallow_cut_is_not_conclusive(self, fc3):
        rng = random.Random(83)
        loop = trivial_loop(fc3, 2, rng)
        v = decide(loop, fc3, N=2)
        assert isinstance(v, TrivialUpTo)
        assert v.depth == 2 and not v.conclusive

    def test_validation_inconclusive(self, fc2):
        v = decide(BAD_DIAGONAL, fc2)
        assert isinstance(v, Inconclusive)
        assert v.kind == "validation"

    def test_ray_degeneracy_inconclusive(self, fc1):
        v = decide(ON_RAY, fc1)
        assert isinstance(v, Inconclusive)
        assert v.kind == "degeneracy"
        assert "ray" in v.reason

    def test_tight_caps_inconclusive(self, fc2):
        rng = random.Random(89)
        loop = trivial_loop(fc2, 2, rng)
        v = decide(loop, fc2, caps=SearchCaps(work=1))
        assert isinstance(v, Inconclusive)
        assert v.kind == "caps"


class TestCertificates:
    def test_nontrivial_certificate_checks(self, fc2):
        loop = DEEP_RING
        verdict, cert = make_certificate(loop, fc2)
        assert isinstance(verdict, Nontrivial)
        assert cert.kind == "nontrivial" and cert.level == 2
        assert len(cert.words) == 2
        assert cert.free_words[0] == ""
        assert cert.witness == "g[2,1,1]"
        assert Certificate.from_json(cert.to_json()) == cert
        assert check_certificate(cert, loop, fc2).ok

    def test_trivial_certificate_checks(self, fc2):
        rng = random.Random(97)
        loop = trivial_loop(fc2, 2, rng)
        verdict, cert = make_certificate(loop, fc2)
        assert isinstance(verdict, TrivialUpTo)
        assert cert.kind == "trivial_up_to"
        assert cert.conclusive is True
        assert len(cert.diagrams) == 2
        assert Certificate.from_json(cert.to_json()) == cert
        assert check_certificate(cert, loop, fc2).ok

    def test_shallow_certificate_not_conclusive(self, fc2):
        rng = random.Random(101)
        loop = trivial_loop(fc2, 2, rng)
        _, cert = make_certificate(loop, fc2, N=1)
        assert cert.conclusive is False
        assert check_certificate(cert, loop, fc2).ok

    def test_inconclusive_has_no_certificate(self, fc2):
        verdict, cert = make_certificate(BAD_DIAGONAL, fc2)
        assert isinstance(verdict, Inconclusive)
        assert cert is None

    def test_wrong_space_rejected(self, fc1, fc2):
        loop = central_ring(fc1)
        _, cert = make_certificate(loop, fc1)
        rep = check_certificate(cert, loop, fc2)
        assert not rep.ok and "space hash" in rep.reason

    def test_wrong_loop_rejected(self, fc1):
        loop = central_ring(fc1)
        _, cert = make_certificate(loop, fc1)
        rep = check_certificate(cert, loop.reversed_loop(), fc1)
        assert not rep.ok and "loop hash" in rep.reason

    def test_tampered_witness_rejected(self, fc1):
        loop = central_ring(fc1)
        _, cert = make_certificate(loop, fc1)
        rep = check_certificate(replace(cert, witness="g[1,1,1]^-1"), loop, fc1)
        assert not rep.ok and "witness" in rep.reason

    def test_tampered_kind_and_level_rejected(self, fc1):
        loop = central_ring(fc1)
        _, cert = make_certificate(loop, fc1)
        assert not check_certificate(replace(cert, kind="proof"), loop, fc1).ok
        assert not check_certificate(replace(cert, level=0), loop, fc1).ok

    def test_tampered_words_rejected(self, fc1):
        loop = central_ring(fc1)
        _, cert = make_certificate(loop, fc1)
        rep = check_certificate(replace(cert, words=("",)), loop, fc1)
        assert not rep.ok and "word mismatch" in rep.reason

    def test_tampered_diagram_rejected(self, fc2):
        rng = random.Random(103)
        loop = trivial_loop(fc2, 2, rng)
        _, cert = make_certificate(loop, fc2)
        pairs = cert.diagrams[-1]
        (a, b), (c, d) = pairs[0], pairs[1]
        bad = ((a, c), (b, d)) + pairs[2:]
        rep = check_certificate(
            replace(cert, diagrams=cert.diagrams[:-1] + (bad,)), loop, fc2
        )
        assert not rep.ok and "diagram" in rep.reason

    def test_flipped_conclusive_rejected(self, fc2):
        rng = random.Random(107)
        loop = trivial_loop(fc2, 2, rng)
        _, cert = make_certificate(loop, fc2)
        rep = check_certificate(replace(cert, conclusive=False), loop, fc2)
        assert not rep.ok and "conclusive" in rep.reason
