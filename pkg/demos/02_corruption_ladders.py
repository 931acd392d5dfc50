#!/usr/bin/env python3
"""Reconstruction-error ladders for every corruptor kind.

Each corruptor damages one aspect of the sequence (depth, poses, one
frame's pixels, global brightness, temporal continuity).  The scene-level
score should grow with corruption magnitude; this script prints the
ladders the acceptance suite asserts to be strictly increasing.
"""

from geopref import Corruptor, OracleScene, corrupt, render_scene, score

LADDERS = {
    "depth_noise": (0.0, 0.05, 0.12, 0.3),
    "pose_jitter": (0.0, 0.1, 0.3, 1.0),
    "frame_warp": (0.0, 0.2, 0.5, 1.0),
    "brightness_flicker": (0.0, 0.05, 0.1, 0.2),
    "frozen_frame": (0.0, 0.5, 1.0, 2.0),
}

seq = render_scene(OracleScene(trajectory="dolly", n_frames=10, width=64,
                               height=64, seed=3, step=0.25))

print(f"{'corruptor':<20} " + " ".join(f"{'m=' + str(m):>10}"
                                       for m in (0.0, "...", "...", "...")))
for kind, magnitudes in LADDERS.items():
    errors = [score(corrupt(seq, Corruptor(kind, m, seed=11)), t=10).e_recon
              for m in magnitudes]
    increasing = all(a < b for a, b in zip(errors, errors[1:]))
    row = " ".join(f"{e:>10.5f}" for e in errors)
    print(f"{kind:<20} {row}   {'increasing' if increasing else 'NOT monotone'}")
