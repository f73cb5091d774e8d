import json

import numpy as np
import pytest

from conftest import random_annotation
from teerkit import DataError
from teerkit.metrics import der, steer, teer
from teerkit.scoring import score
from teerkit.sim import SynthSpec, frame_grid_oracle, generate, grid_tolerance
from teerkit.timeline import Annotation, EmotionLabel, RichSegment, span


def test_zero_error_hypothesis_equals_reference():
    res = generate(SynthSpec(num_speakers=3, dialogue_length=120, overlap_prob=0.4, seed=2))
    assert res.hyp == res.ref
    assert der(res.ref, res.hyp, 0).rate == 0.0
    assert steer(res.ref, res.hyp, 0).rate == 0.0


def test_full_emotion_confusion_on_one_speaker():
    res = generate(SynthSpec(num_speakers=1, dialogue_length=60, emotion_confusion_prob=1.0, seed=3))
    assert teer(res.ref, res.hyp, collar=0).rate == pytest.approx(1.0)
    assert der(res.ref, res.hyp, collar=0).rate == 0.0


@pytest.mark.parametrize("seed", range(8))
def test_injected_durations_recovered(seed):
    spec = SynthSpec(
        num_speakers=3, dialogue_length=60, overlap_prob=0.3, miss_prob=0.2, fa_prob=0.2,
        emotion_confusion_prob=0.3, speaker_swap_prob=0.2, seed=seed,
    )
    res = generate(spec)
    inj = res.injected
    d = der(res.ref, res.hyp, collar=0)
    t = teer(res.ref, res.hyp, collar=0)
    s = steer(res.ref, res.hyp, collar=0)
    assert abs(d.missed - inj.missed) < 1e-6
    assert abs(d.false_alarm - inj.false_alarm) < 1e-6
    assert abs(d.confusion - inj.speaker_confusion) < 1e-6
    assert abs(t.confusion - inj.emotion_confusion) < 1e-6
    assert abs(s.confusion - inj.steer_confusion) < 1e-6


def test_determinism():
    spec = SynthSpec(num_speakers=2, miss_prob=0.3, jitter=0.1, posterior_flip_prob=0.1, seed=11)
    a, b = generate(spec), generate(spec)
    assert a.ref == b.ref and a.hyp == b.hyp and a.injected == b.injected
    assert all(x == y for x, y in zip(a.posteriors, b.posteriors))
    assert a.embeddings == b.embeddings
    assert generate(SynthSpec(seed=12)).ref != a.ref


@pytest.mark.parametrize(
    "fields",
    [
        {"utt_min": 5, "utt_max": 70, "dialogue_length": 60},
        {"miss_prob": 1.5},
        {"num_speakers": 0},
        {"jitter": 0.2, "gap_min": 0.3},
        {"utt_max": 0.5, "utt_min": 1},
        {"embedding_dim": 2, "num_speakers": 3},
        {"colour": "blue"},
    ],
)
def test_infeasible_specs_rejected(fields):
    with pytest.raises(DataError):
        SynthSpec.from_dict(fields)


def test_spec_from_file(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps({"num_speakers": 2, "seed": 5}))
    assert SynthSpec.from_file(p) == SynthSpec(num_speakers=2, seed=5)
    p.write_text("[1]")
    with pytest.raises(DataError):
        SynthSpec.from_file(p)
    p.write_text("{")
    with pytest.raises(DataError):
        SynthSpec.from_file(p)


def test_posteriors_follow_reference():
    res = generate(SynthSpec(num_speakers=2, dialogue_length=30, seed=1))
    speech = res.ref.speech()
    for tr in res.posteriors:
        for i, p in enumerate(tr.probs):
            t = tr.start_us + i * tr.frame_us + tr.frame_us // 2
            inside = any(s.start_us <= t < s.end_us for s in speech)
            assert p == (1.0 if inside else 0.0)


def test_oracle_examples():
    ref = Annotation("r", (RichSegment(span(0, 10), "A", EmotionLabel.HAPPY),))
    hyp = Annotation("r", (
        RichSegment(span(0, 4), "A", EmotionLabel.HAPPY),
        RichSegment(span(4, 5), "A", EmotionLabel.SAD),
        RichSegment(span(5, 10), "A", EmotionLabel.HAPPY),
    ))
    o = frame_grid_oracle(ref, ref)
    assert o.der.rate == o.teer.rate == o.steer.rate == 0.0
    assert frame_grid_oracle(ref, hyp).teer.rate == pytest.approx(0.10)
    with pytest.raises(DataError):
        frame_grid_oracle(ref, hyp, grid=0.02)
    many = Annotation("r", tuple(RichSegment(span(i, i + 1), f"s{i}") for i in range(5)))
    with pytest.raises(DataError):
        frame_grid_oracle(many, many)


@pytest.mark.parametrize("seed", range(10))
def test_off_grid_instances_within_tolerance(seed):
    rng = np.random.default_rng(seed)
    ref = random_annotation(rng, ["A", "B"], off_grid=True)
    hyp = random_annotation(rng, ["x", "y", "z"], off_grid=True)
    for collar in (0.0, 0.25):
        o = frame_grid_oracle(ref, hyp, collar=collar)
        for mine, theirs in ((der(ref, hyp, collar), o.der), (teer(ref, hyp, collar), o.teer),
                             (steer(ref, hyp, collar), o.steer)):
            tol = grid_tolerance(ref, hyp, collar, 0.01, mine.total)
            assert abs(mine.rate - theirs.rate) <= tol


@pytest.mark.parametrize("seed", range(5))
def test_oracle_segmentation_hypothesis(seed):
    res = generate(SynthSpec(num_speakers=2, dialogue_length=60, word_sub_rate=0.2,
                             word_del_rate=0.1, word_ins_rate=0.1, emotion_confusion_prob=0.5,
                             seed=seed))
    inj = res.injected
    w = score("wer", [res.ref], [res.hyp_utterances]).total
    # the aligner may find a cheaper script than the one planted
    assert w.errors <= inj.word_substitutions + inj.word_deletions + inj.word_insertions
    assert [s.span for s in res.hyp_utterances] == [s.span for s in res.ref]
    acc = score("acc", [res.ref], [res.hyp_utterances]).total
    changed = sum(a.emotion != b.emotion for a, b in zip(res.ref, res.hyp_utterances))
    assert acc.total - int(acc.confusion.trace()) == changed
