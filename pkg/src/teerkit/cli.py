"""Command-line interface.

Exit codes: 0 success, 2 usage error, 3 data or I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from teerkit import io
from teerkit.config import Config
from teerkit.errors import DataError
from teerkit.pipeline import diarize, vad_merge
from teerkit.scoring import METRICS, format_report, format_table, score
from teerkit.sim import SynthSpec, generate
from teerkit.timeline import Annotation, Timeline

EXIT_DATA = 3


def _config_parser() -> argparse.ArgumentParser:
    d = Config()
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration")
    g.add_argument("--collar", type=float, default=d.collar, help="forgiveness collar in seconds (default: %(default)s)")
    g.add_argument("--vad-threshold", type=float, default=d.vad_threshold)
    g.add_argument("--min-duration", type=float, default=d.min_duration,
                   help="shortest kept speech region / silence gap (default: %(default)s)")
    g.add_argument("--postprocess-order", choices=("fill-first", "drop-first"), default=d.postprocess_order)
    g.add_argument("--vad-window", type=float, default=d.vad_window)
    g.add_argument("--vad-hop", type=float, default=d.vad_hop)
    g.add_argument("--emb-window", type=float, default=d.emb_window)
    g.add_argument("--emb-overlap", type=float, default=d.emb_overlap)
    g.add_argument("--num-speakers", type=int, default=None, help="fix the cluster count instead of estimating it")
    g.add_argument("--k-max", type=int, default=d.k_max)
    g.add_argument("--far-denominator", choices=("speech", "nonspeech"), default=d.far_denominator)
    g.add_argument("--overlap", choices=("multi", "single"), default=d.overlap)
    g.add_argument("--seed", type=int, default=d.seed)
    return p


def _config(args: argparse.Namespace) -> Config:
    return Config(
        collar=args.collar,
        vad_threshold=args.vad_threshold,
        min_duration=args.min_duration,
        postprocess_order=args.postprocess_order,
        vad_window=args.vad_window,
        vad_hop=args.vad_hop,
        emb_window=args.emb_window,
        emb_overlap=args.emb_overlap,
        num_speakers=args.num_speakers,
        k_max=args.k_max,
        far_denominator=args.far_denominator,
        overlap=args.overlap,
        seed=args.seed,
    )


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def read_annotations(path: str | Path) -> list[Annotation]:
    """RTTM for ``*.rttm`` files, rich JSON lines otherwise."""
    path = Path(path)
    text = path.read_text()
    try:
        if path.suffix.lower() == ".rttm":
            return io.parse_rttm(text)
        return io.parse_rich(text)
    except DataError as e:
        raise DataError(f"{path}: {e}") from None


def cmd_vad_merge(args: argparse.Namespace, config: Config) -> None:
    path = Path(args.posteriors)
    try:
        tracks = io.parse_posteriors(path.read_text(), default_id=args.recording_id or path.stem)
    except DataError as e:
        raise DataError(f"{path}: {e}") from None
    anns = [
        io.timeline_to_annotation(rec, vad_merge(tracks[rec], config))
        for rec in sorted(tracks)
    ]
    _emit(io.write_rttm(anns), args.output)


def cmd_diarize(args: argparse.Namespace, config: Config) -> None:
    speech = read_annotations(args.speech)
    emb_path = Path(args.embeddings)
    try:
        embeddings = io.parse_embeddings(emb_path.read_text(), default_id=emb_path.stem)
    except DataError as e:
        raise DataError(f"{emb_path}: {e}") from None
    out = []
    for ann in speech:
        rec = ann.recording_id
        if rec not in embeddings:
            if len(embeddings) == 1 and len(speech) == 1:
                rec = next(iter(embeddings))
            else:
                raise DataError(f"no embeddings for recording {ann.recording_id!r}")
        out.append(diarize(ann.speech(), embeddings[rec], ann.recording_id, config))
    _emit(io.write_rttm(out), args.output)


def cmd_score(args: argparse.Namespace, config: Config) -> None:
    table = score(args.metric, read_annotations(args.ref), read_annotations(args.hyp), config)
    if args.report:
        Path(args.report).write_text(format_report(table))
    if args.json:
        sys.stdout.write(format_report(table))
    else:
        sys.stdout.write(format_table(table))


def cmd_simulate(args: argparse.Namespace, config: Config) -> None:
    spec = SynthSpec.from_file(args.spec)
    if args.spec_seed is not None:
        spec = SynthSpec.from_dict({**spec.to_dict(), "seed": args.spec_seed})
    res = generate(spec)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    rid = spec.recording_id
    (out / "spec.json").write_text(json.dumps(spec.to_dict(), indent=2, sort_keys=True) + "\n")
    (out / "ref.rttm").write_text(io.write_rttm([res.ref]))
    (out / "ref.jsonl").write_text(io.write_rich([res.ref]))
    (out / "hyp.rttm").write_text(io.write_rttm([res.hyp]))
    (out / "hyp.jsonl").write_text(io.write_rich([res.hyp]))
    (out / "hyp_utts.jsonl").write_text(io.write_rich([res.hyp_utterances]))
    (out / "ref_speech.rttm").write_text(
        io.write_rttm([io.timeline_to_annotation(rid, res.ref.speech())])
    )
    (out / "posteriors.csv").write_text(io.write_posteriors({rid: res.posteriors}))
    (out / "embeddings.csv").write_text(io.write_embeddings({rid: res.embeddings}))
    (out / "injected.json").write_text(json.dumps(asdict(res.injected), indent=2) + "\n")
    print(f"wrote fixture for {rid!r} to {out}")


def build_parser() -> argparse.ArgumentParser:
    common = _config_parser()
    parser = argparse.ArgumentParser(
        prog="teerkit",
        description="Automatic segmentation and time-weighted scoring for conversational speech.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("vad-merge", parents=[common], help="frame posteriors -> speech RTTM")
    p.add_argument("posteriors")
    p.add_argument("-o", "--output")
    p.add_argument("--recording-id", help="id for rows without a recording_id header (default: file stem)")
    p.set_defaults(func=cmd_vad_merge)

    p = sub.add_parser("diarize", parents=[common], help="speech RTTM + embeddings -> speaker RTTM")
    p.add_argument("speech")
    p.add_argument("embeddings")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_diarize)

    p = sub.add_parser("score", parents=[common], help="score a hypothesis against a reference")
    p.add_argument("metric", choices=METRICS)
    p.add_argument("ref")
    p.add_argument("hyp")
    p.add_argument("--report", help="write the JSON-lines report here")
    p.add_argument("--json", action="store_true", help="print the JSON-lines report instead of a table")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("simulate", parents=[common], help="generate a synthetic fixture directory")
    p.add_argument("spec", help="JSON file with generator settings")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--spec-seed", type=int, default=None, help="override the spec's seed")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = _config(args)
        args.func(args, config)
    except DataError as e:
        print(f"teerkit {args.command}: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"teerkit {args.command}: error: {e}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
