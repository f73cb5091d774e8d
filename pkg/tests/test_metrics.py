import itertools

import numpy as np
import pytest

from conftest import random_annotation
from teerkit import DataError
from teerkit.metrics import der, far_msr, optimal_mapping, steer, teer, vad_errors
from teerkit.sim import frame_grid_oracle
from teerkit.timeline import Annotation, EmotionLabel, RichSegment, Timeline, span

H, S, N = EmotionLabel.HAPPY, EmotionLabel.SAD, EmotionLabel.NEUTRAL


def ann(*segs, rec="r"):
    return Annotation(rec, tuple(RichSegment(span(a, b), spk, emo) for a, b, spk, emo in segs))


REF = ann((0, 4, "A", H), (3, 7, "B", S), (8, 10, "A", N))


def test_far_msr_examples():
    ref = Timeline([span(0, 5)])
    assert far_msr(ref, ref, span(0, 10)) == (0.0, 0.0)
    far, msr = far_msr(ref, Timeline([span(0, 10)]), span(0, 10))
    assert (far, msr) == (1.0, 0.0)
    far, msr = far_msr(ref, Timeline([span(0, 10)]), span(0, 10), "nonspeech")
    assert far == 1.0
    far, msr = far_msr(Timeline([span(0, 4)]), Timeline([span(2, 5)]), span(0, 10))
    assert far == pytest.approx(0.25) and msr == pytest.approx(0.5)
    with pytest.raises(DataError):
        far_msr(Timeline(), ref, span(0, 10))
    with pytest.raises(DataError):
        vad_errors(ref, ref, span(0, 10), "frames")


def test_mapping_examples():
    renamed = REF.relabel({"A": "x", "B": "y"})
    assert optimal_mapping(REF, renamed).as_dict() == {"A": "x", "B": "y"}
    single = ann((0, 10, "A", H))
    two = ann((0, 3, "p", H), (3, 10, "q", H))
    assert optimal_mapping(single, two).as_dict() == {"A": "q"}


def brute_mapping_overlap(ref, hyp):
    """Largest total overlap over all partial injections, by enumeration."""
    rs, hs = ref.speakers, hyp.speakers
    ov = {
        (r, h): (ref.speaker_timeline(r) & hyp.speaker_timeline(h)).duration_us
        for r in rs
        for h in hs
    }
    best = 0
    for k in range(min(len(rs), len(hs)) + 1):
        for sub in itertools.combinations(rs, k):
            for perm in itertools.permutations(hs, k):
                best = max(best, sum(ov[p] for p in zip(sub, perm)))
    return best, ov


@pytest.mark.parametrize("seed", range(20))
def test_mapping_is_optimal(seed):
    rng = np.random.default_rng(seed)
    ref = random_annotation(rng, ["A", "B", "C"][: int(rng.integers(1, 4))])
    hyp = random_annotation(rng, ["p", "q", "r", "s"][: int(rng.integers(1, 5))])
    best, ov = brute_mapping_overlap(ref, hyp)
    got = optimal_mapping(ref, hyp).pairs
    assert sum(ov[p] for p in got) == best


def test_der_examples():
    assert der(REF, REF).rate == 0.0
    empty = der(REF, Annotation("r"), collar=0)
    assert empty.rate == 1.0
    assert empty.missed == empty.total == 10.0
    with pytest.raises(DataError):
        der(Annotation("r"), REF, collar=0)


def test_der_by_hand():
    ref = ann((0, 10, "A", None))
    hyp = ann((0, 6, "x", None), (6, 12, "y", None))
    r = der(ref, hyp, collar=0)
    assert (r.missed, r.false_alarm, r.confusion, r.total) == (0.0, 2.0, 4.0, 10.0)
    r = der(ref, hyp, collar=0.5)
    # collar removes [−0.5, 0.5) and [9.5, 10.5)
    assert (r.missed, r.false_alarm, r.confusion, r.total) == (0.0, 1.5, 3.5, 9.0)


def test_teer_ten_percent():
    ref = ann((0, 10, "A", H))
    hyp = ann((0, 4, "A", H), (4, 5, "A", S), (5, 10, "A", H))
    r = teer(ref, hyp, collar=0)
    assert r.rate == pytest.approx(0.10)
    assert r.confusion == pytest.approx(1.0)
    assert frame_grid_oracle(ref, hyp).teer.rate == pytest.approx(0.10)


def test_teer_and_steer_zero_on_identity():
    assert teer(REF, REF).rate == 0.0
    assert steer(REF, REF).rate == 0.0


def test_steer_absorbs_global_swap():
    swapped = REF.relabel({"A": "B", "B": "A"})
    assert steer(REF, swapped, collar=0).rate == 0.0


def test_steer_counts_wrong_speaker_with_right_emotion():
    ref = ann((0, 4, "A", H), (4, 8, "B", H))
    hyp = ann((0, 8, "x", H))
    assert teer(ref, hyp, collar=0).rate == 0.0
    s = steer(ref, hyp, collar=0)
    assert s.confusion == pytest.approx(4.0)
    assert s.rate == pytest.approx(0.5)


def test_unlabelled_hypothesis_emotion_never_matches():
    ref = ann((0, 4, "A", H))
    hyp = ann((0, 4, "A", None))
    assert teer(ref, hyp, collar=0).rate == 1.0


def test_missing_reference_emotion_rejected():
    ref = ann((0, 4, "A", None))
    with pytest.raises(DataError):
        teer(ref, ref)
    with pytest.raises(DataError):
        steer(ref, ref)


def test_overlap_single_counts_each_instant_once():
    ref = ann((0, 4, "A", H), (2, 6, "B", S))
    hyp = ann((0, 6, "x", H))
    multi = teer(ref, hyp, collar=0)
    single = teer(ref, hyp, collar=0, overlap="single")
    assert multi.total == pytest.approx(8.0)
    assert single.total == pytest.approx(6.0)
    assert multi.missed == pytest.approx(2.0) and single.missed == 0.0
    with pytest.raises(DataError):
        teer(ref, hyp, overlap="twice")


@pytest.mark.parametrize("seed", range(25))
@pytest.mark.parametrize("collar", [0.0, 0.25])
def test_agrees_with_grid_oracle_on_grid_data(seed, collar):
    # boundaries and collar on the 10 ms grid, so the oracle is exact
    rng = np.random.default_rng(seed)
    ref = random_annotation(rng, ["A", "B", "C"][: int(rng.integers(1, 4))])
    hyp = random_annotation(rng, ["p", "q", "r"][: int(rng.integers(1, 4))])
    o = frame_grid_oracle(ref, hyp, collar=collar)
    for mine, theirs in ((der(ref, hyp, collar), o.der), (teer(ref, hyp, collar), o.teer),
                         (steer(ref, hyp, collar), o.steer)):
        assert mine.missed == pytest.approx(theirs.missed, abs=1e-6)
        assert mine.false_alarm == pytest.approx(theirs.false_alarm, abs=1e-6)
        assert mine.confusion == pytest.approx(theirs.confusion, abs=1e-6)
        assert mine.total == pytest.approx(theirs.total, abs=1e-6)
    far, msr = far_msr(ref.speech(), hyp.speech(), span(0, max(ref.end_us(), hyp.end_us()) / 1e6))
    assert far == pytest.approx(o.far, abs=1e-9)
    assert msr == pytest.approx(o.msr, abs=1e-9)


@pytest.mark.parametrize("seed", range(20))
def test_rate_bounds_and_shared_ms_fa(seed):
    rng = np.random.default_rng(100 + seed)
    ref = random_annotation(rng, ["A", "B"])
    hyp = random_annotation(rng, ["p", "q", "r"])
    d, t, s = der(ref, hyp), teer(ref, hyp), steer(ref, hyp)
    assert d.missed == t.missed == s.missed
    assert d.false_alarm == t.false_alarm == s.false_alarm
    assert s.confusion >= t.confusion
    assert s.confusion >= d.confusion
    for r in (d, t, s):
        assert r.rate >= (r.missed + r.false_alarm) / r.total
