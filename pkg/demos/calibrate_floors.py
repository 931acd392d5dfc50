#!/usr/bin/env python3
"""Detectability-floor calibration for the corruption ladders.

This is the generation script behind the frozen constants in
tests/test_acceptance.py (CORRUPTION_LADDERS): for each corruptor kind it
sweeps candidate magnitude ladders over 20 seeded scenes and reports how
many scenes produce a strictly increasing e_recon ladder.  A ladder is
frozen into the acceptance suite only if at most one scene in twenty
fails.

Scenes use trajectory step 0.25: with the look-at orbit parameterization,
smaller steps leave consecutive frames nearly identical and the
frozen-frame corruptor (which duplicates frames) sits below its
detectability floor.
"""

import time

from geopref import Corruptor, OracleScene, corrupt, render_scene, score

CANDIDATE_LADDERS = {
    "depth_noise": [(0.02, 0.05, 0.1), (0.05, 0.12, 0.3)],
    "pose_jitter": [(0.02, 0.05, 0.1), (0.1, 0.3, 1.0)],
    "frame_warp": [(0.2, 0.5, 1.0)],
    "brightness_flicker": [(0.05, 0.1, 0.2)],
    "frozen_frame": [(0.5, 1.0, 2.0)],
}

TRAJECTORIES = ("orbit", "dolly", "lateral")


def main():
    start = time.perf_counter()
    scenes = []
    for seed in range(20):
        scene = OracleScene(trajectory=TRAJECTORIES[seed % 3], n_frames=10,
                            width=64, height=64, seed=seed, step=0.25)
        scenes.append((seed, render_scene(scene)))
    clean = {seed: score(seq, t=10).e_recon for seed, seq in scenes}

    for kind, ladders in CANDIDATE_LADDERS.items():
        for rungs in ladders:
            failures = 0
            for seed, seq in scenes:
                ladder = [clean[seed]] + [
                    score(corrupt(seq, Corruptor(kind, m, seed=100 + seed)),
                          t=10).e_recon
                    for m in rungs
                ]
                if not all(a < b for a, b in zip(ladder, ladder[1:])):
                    failures += 1
            verdict = "FROZEN" if failures <= 1 else "rejected"
            print(f"{kind:<20} rungs {rungs}: {20 - failures}/20 strictly "
                  f"increasing -> {verdict}")

    print(f"\ntotal {time.perf_counter() - start:.0f} s")


if __name__ == "__main__":
    main()
