"""Command-line surface.

Subcommands: score, pairs, synth, prompts, epipolar, dpo-demo.  All
randomness flows from explicit --seed flags, so every invocation is
bit-deterministic across runs.

Exit codes are a stable scripting contract:
    0 success, 2 usage, 3 I/O, 4 validation, 5 numeric/degenerate.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import curation, dpo, epipolar, metrics, oracle, prompts, scene_io, scoring
from .errors import (DegenerateGeometryError, GeoprefError, SceneIOError,
                     TrainingDivergedError, ValidationError)

EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VALIDATION = 4
EXIT_NUMERIC = 5

# Validation failures that are really command-line mistakes.
_USAGE_CODES = {"bad_manifest", "duplicate_context", "bad_vocab"}


def _perceptual_from_flag(value):
    if value == "ssim":
        return metrics.structural_surrogate()
    if value.startswith("external:"):
        table = metrics.load_perceptual_table(value[len("external:"):])
        return metrics.precomputed_external(table)
    raise ValidationError(
        f"--perceptual must be 'ssim' or 'external:FILE', got {value!r}",
        code="bad_vocab")


def _write_or_print(payload, out):
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def cmd_score(args):
    metric = _perceptual_from_flag(args.perceptual)

    def run(path):
        seq = scene_io.read_scene(path)
        t0 = time.perf_counter()
        report = scoring.score(seq, t=args.frames, metric=metric,
                               downsample=args.downsample,
                               leave_one_out=args.leave_one_out)
        elapsed = time.perf_counter() - t0
        print(f"[timing] scene={seq.scene_id or path} frames={args.frames} "
              f"avg_time_s={elapsed:.3f} fps={args.frames / elapsed:.2f}",
              file=sys.stderr)
        return report.to_dict()

    if args.jobs > 1 and len(args.scene_dir) > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(run, args.scene_dir))
    else:
        reports = [run(p) for p in args.scene_dir]

    payload = reports[0] if len(reports) == 1 else reports
    _write_or_print(payload, args.out)
    return 0


def cmd_pairs(args):
    groups = curation.load_manifest(args.groups)
    config = curation.CurationConfig(margin_min=args.margin,
                                     winner_cap=args.winner_cap,
                                     static_threshold=args.static_threshold)
    report = curation.curate(groups, config, jobs=args.jobs)
    curation.write_pairs(report, args.out)
    print(f"groups={report.groups_total} pairs={len(report.pairs)} "
          f"drops={sum(report.drop_counts.values())}")
    return 0


def cmd_synth(args):
    scene = oracle.OracleScene(trajectory=args.traj, n_frames=args.frames,
                               width=args.size, height=args.size,
                               seed=args.seed, step=args.step)
    seq = oracle.render_scene(scene)
    if args.corrupt:
        kind, _, mag = args.corrupt.partition(":")
        try:
            magnitude = float(mag)
        except ValueError:
            raise ValidationError(
                f"--corrupt expects KIND:MAGNITUDE, got {args.corrupt!r}")
        seq = oracle.corrupt(seq, oracle.Corruptor(kind, magnitude,
                                                   seed=args.seed))
    scene_io.write_scene(seq, args.out)
    print(f"wrote {len(seq)} frames to {args.out}")
    return 0


def cmd_prompts(args):
    vocab = (prompts.load_vocabulary(args.vocab) if args.vocab
             else prompts.default_vocabulary())
    for script in prompts.batch_prompts(vocab, args.n, args.seed):
        print(script.full_text)
    return 0


def cmd_epipolar(args):
    matches = epipolar.load_correspondences(args.matches)
    if not matches:
        raise ValidationError(f"no correspondences in {args.matches}")
    seq = scene_io.read_scene(args.scene) if args.scene else None

    results = []
    for (fi, fj), pair_matches in sorted(matches.items()):
        if seq is not None:
            if not (0 <= fi < len(seq) and 0 <= fj < len(seq)):
                raise ValidationError(
                    f"match pair ({fi}, {fj}) outside the {len(seq)}-frame "
                    f"scene")
            f = epipolar.fundamental_from_poses(seq.intrinsics, seq.poses[fi],
                                                seq.poses[fj])
            source = "poses"
        else:
            f = epipolar.estimate_fundamental(pair_matches, seed=args.seed)
            source = "estimated"
        err = epipolar.sampson_error(pair_matches, f)
        results.append({"frame_i": fi, "frame_j": fj, "matches":
                        len(pair_matches), "sampson": err, "f_source": source})

    payload = {
        "pairs": results,
        "mean_sampson": float(np.mean([r["sampson"] for r in results])),
    }
    _write_or_print(payload, args.out)
    return 0


def cmd_dpo_demo(args):
    sched = dpo.cosine_schedule()
    pairs = dpo.separable_cohort(args.pairs, args.dim, args.seed)
    trace = dpo.toy_align(pairs, sched, beta=args.beta, steps=args.steps,
                          lr=args.lr)
    if args.trace_out:
        trace.write(args.trace_out)
    print(f"steps={args.steps} final_loss={trace.loss[-1]:.6f} "
          f"final_mean_margin={trace.mean_margin[-1]:.6f} "
          f"positive_fraction={trace.positive_fraction:.3f}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="geopref",
        description="3D consistency scoring, preference curation, and "
                    "v-prediction DPO utilities for video frame sequences.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score", help="score scene directories for 3D consistency")
    p.add_argument("scene_dir", nargs="+")
    p.add_argument("--frames", type=int, default=scoring.DEFAULT_FRAME_COUNT)
    p.add_argument("--downsample", type=int, default=1)
    p.add_argument("--perceptual", default="ssim",
                   help="'ssim' or 'external:FILE' with precomputed distances")
    p.add_argument("--leave-one-out", action="store_true")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("pairs", help="curate preference pairs from a manifest")
    p.add_argument("--groups", required=True, help="JSON manifest of groups")
    p.add_argument("--margin", type=float, default=curation.DEFAULT_MARGIN_MIN)
    p.add_argument("--winner-cap", type=float,
                   default=curation.DEFAULT_WINNER_CAP)
    p.add_argument("--static-threshold", type=float,
                   default=curation.STATIC_ALPHA_THRESHOLD)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("synth", help="render a ground-truth oracle scene")
    p.add_argument("--traj", choices=oracle.TRAJECTORIES, default="dolly")
    p.add_argument("--frames", type=int, default=10)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrupt", default=None, metavar="KIND:MAGNITUDE")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("prompts", help="generate scripted camera-motion prompts")
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--vocab", default=None,
                   help="sectioned text file overriding the vocabulary")
    p.set_defaults(func=cmd_prompts)

    p = sub.add_parser("epipolar", help="Sampson epipolar error baseline")
    p.add_argument("--matches", required=True,
                   help="text file of 'frame_i frame_j u1 v1 u2 v2' lines")
    p.add_argument("--scene", default=None,
                   help="scene directory; uses its poses for closed-form F")
    p.add_argument("--seed", type=int, default=epipolar.RANSAC_SEED)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_epipolar)

    p = sub.add_parser("dpo-demo",
                       help="toy preference-alignment loop on a separable cohort")
    p.add_argument("--pairs", type=int, default=40)
    p.add_argument("--dim", type=int, default=4)
    p.add_argument("--steps", type=int, default=500)
    p.add_argument("--lr", type=float, default=1e-2)
    p.add_argument("--beta", type=float, default=dpo.DEFAULT_BETA)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace-out", default=None)
    p.set_defaults(func=cmd_dpo_demo)

    return parser


def _validate_usage(parser, args):
    if args.command == "score":
        if args.frames < 2:
            parser.error("--frames must be >= 2")
        if args.downsample < 1:
            parser.error("--downsample must be >= 1")
        if args.jobs < 1:
            parser.error("--jobs must be >= 1")
    elif args.command == "pairs":
        if args.jobs < 1:
            parser.error("--jobs must be >= 1")
    elif args.command == "synth":
        if args.frames < 2:
            parser.error("--frames must be >= 2")
        if args.size < 2:
            parser.error("--size must be >= 2")
    elif args.command == "prompts":
        if args.n < 1:
            parser.error("--n must be >= 1")
    elif args.command == "dpo-demo":
        if args.pairs < 1 or args.dim < 1 or args.steps < 1:
            parser.error("--pairs, --dim and --steps must be >= 1")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate_usage(parser, args)
    try:
        return args.func(args)
    except SceneIOError as e:
        print(f"error [{e.code}]: {e}", file=sys.stderr)
        return EXIT_IO
    except (DegenerateGeometryError, TrainingDivergedError) as e:
        print(f"error [{e.code}]: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValidationError as e:
        print(f"error [{e.code}]: {e}", file=sys.stderr)
        return EXIT_USAGE if e.code in _USAGE_CODES else EXIT_VALIDATION
    except GeoprefError as e:
        print(f"error [{e.code}]: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
