#!/usr/bin/env python3
"""Preference-pair curation over a planted candidate cohort.

Candidates are grouped by conditioning context (three seeds per prompt in
the usual setup).  Within each group the best and worst scores form a
candidate pair; static groups, negligible margins, and poor winners are
dropped with machine-readable reasons.
"""

import tempfile
from pathlib import Path

from geopref import Candidate, curate
from geopref.curation import write_pairs

MOVING, STATIC = 1.01, 1e-6


def group(context_id, scores, alpha=MOVING):
    return [Candidate(context_id, seed, f"scenes/{context_id}/{seed}", e, alpha)
            for seed, e in enumerate(scores)]


groups = [
    group("park_bench", [0.41, 0.52, 0.66]),       # clean: emits a pair
    group("hallway", [0.48, 0.50, 0.51]),          # margin 0.03: dropped
    group("lobby", [0.83, 0.89, 0.97]),            # winner 0.83: dropped
    group("statue", [0.40, 0.60], alpha=STATIC),   # static: dropped
    group("garden", [0.35, 0.44, 0.58]),           # clean: emits a pair
]

report = curate(groups)
print(f"groups: {report.groups_total}   pairs: {len(report.pairs)}   "
      f"yield: {report.yield_ratio:.2f}")
for pair in report.pairs:
    print(f"  {pair.context_id}: winner {pair.winner.e_recon:.2f} "
          f"vs loser {pair.loser.e_recon:.2f} (margin {pair.margin:.2f})")
print(f"drop reasons: {report.drop_counts}")

with tempfile.TemporaryDirectory() as d:
    out = Path(d) / "pairs.tsv"
    write_pairs(report, out)
    print(f"\npairs file:\n{out.read_text()}")
    print(f"sidecar report:\n{(Path(d) / 'pairs.tsv.report.json').read_text()}")
