"""Preference-pair curation: grouping, ranking, and three-stage filtering.

Candidates within one conditioning context are ranked by reconstruction
error (lower is better).  Three filters gate pair emission:

  1. motion salience: candidates with motion score alpha below the static
     threshold are discarded;
  2. geometric margin: best and worst survivors must differ by strictly
     more than the margin threshold;
  3. difficulty pruning: the winner's error must not exceed the quality cap.

One pair per group (best vs. worst).  Groups that emit nothing carry a
machine-readable drop reason.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .errors import ValidationError
from .motion import STATIC_ALPHA_THRESHOLD

DEFAULT_MARGIN_MIN = 0.05
DEFAULT_WINNER_CAP = 0.8

DROP_STATIC = "static_group"
DROP_MARGIN = "margin_too_small"
DROP_WINNER = "winner_too_poor"

# Scores closer than this are ties, broken by the lower seed.
_SCORE_TIE = 1e-12


@dataclass(frozen=True)
class Candidate:
    """One scored sample for a conditioning context."""

    context_id: str
    seed: int
    scene_ref: str
    e_recon: float
    alpha: float


@dataclass(frozen=True)
class PreferencePair:
    context_id: str
    winner: Candidate
    loser: Candidate
    margin: float


@dataclass(frozen=True)
class PairDecision:
    """Outcome for one group: a pair or a drop reason, never both."""

    context_id: str
    pair: PreferencePair | None
    drop_reason: str | None


@dataclass(frozen=True)
class CurationConfig:
    margin_min: float = DEFAULT_MARGIN_MIN
    winner_cap: float = DEFAULT_WINNER_CAP
    static_threshold: float = STATIC_ALPHA_THRESHOLD


@dataclass(frozen=True)
class CurationReport:
    pairs: list
    decisions: list
    drop_counts: dict
    groups_total: int

    @property
    def yield_ratio(self):
        if self.groups_total == 0:
            return None
        return len(self.pairs) / self.groups_total


def _sort_key(c: Candidate):
    # Quantize for the tie rule, then break by seed.
    return (round(c.e_recon / _SCORE_TIE), c.seed)


def build_pairs(group, margin_min=DEFAULT_MARGIN_MIN,
                winner_cap=DEFAULT_WINNER_CAP,
                static_threshold=STATIC_ALPHA_THRESHOLD) -> PairDecision:
    """Apply the three filters to one candidate group."""
    group = list(group)
    if not group:
        raise ValidationError("empty candidate group")
    context_id = group[0].context_id
    if any(c.context_id != context_id for c in group):
        raise ValidationError(
            f"mixed context_ids in one group: "
            f"{sorted({c.context_id for c in group})}",
            code="mixed_context",
        )

    moving = [c for c in group if c.alpha >= static_threshold]
    if len(moving) < 2:
        return PairDecision(context_id, None, DROP_STATIC)

    ranked = sorted(moving, key=_sort_key)
    winner, loser = ranked[0], ranked[-1]
    margin = loser.e_recon - winner.e_recon
    if not margin > margin_min:
        return PairDecision(context_id, None, DROP_MARGIN)
    if winner.e_recon > winner_cap:
        return PairDecision(context_id, None, DROP_WINNER)
    return PairDecision(context_id, PreferencePair(context_id, winner, loser,
                                                   margin), None)


def curate(groups, config: CurationConfig | None = None,
           jobs=1) -> CurationReport:
    """Run build_pairs over every group; output ordered by context_id.

    Groups are independent, so ``jobs`` > 1 processes them in parallel;
    ordering stays deterministic either way.
    """
    if config is None:
        config = CurationConfig()
    groups = list(groups)
    seen = set()
    for g in groups:
        if not g:
            raise ValidationError("empty candidate group")
        cid = g[0].context_id
        if cid in seen:
            raise ValidationError(f"duplicate context_id across groups: {cid!r}",
                                  code="duplicate_context")
        seen.add(cid)

    def decide(g):
        return build_pairs(g, config.margin_min, config.winner_cap,
                           config.static_threshold)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            decisions = list(pool.map(decide, groups))
    else:
        decisions = [decide(g) for g in groups]
    decisions.sort(key=lambda d: d.context_id)
    pairs = [d.pair for d in decisions if d.pair is not None]
    drop_counts = {}
    for d in decisions:
        if d.drop_reason is not None:
            drop_counts[d.drop_reason] = drop_counts.get(d.drop_reason, 0) + 1
    return CurationReport(pairs, decisions, drop_counts, len(groups))


def write_pairs(report: CurationReport, path):
    """Emit one pair per line plus a sibling drop-reason report.

    Pair lines are tab-separated: context_id, winner path, loser path,
    winner score, loser score, margin.  The sibling report at
    ``<path>.report.json`` records drop reasons and the yield ratio.
    """
    path = str(path)
    with open(path, "w", encoding="utf-8") as f:
        for p in report.pairs:
            f.write("\t".join([
                p.context_id,
                p.winner.scene_ref,
                p.loser.scene_ref,
                f"{p.winner.e_recon:.10g}",
                f"{p.loser.e_recon:.10g}",
                f"{p.margin:.10g}",
            ]) + "\n")
    sidecar = {
        "groups_total": report.groups_total,
        "pairs_emitted": len(report.pairs),
        "yield_ratio": report.yield_ratio,
        "drop_counts": dict(sorted(report.drop_counts.items())),
        "drops": [
            {"context_id": d.context_id, "reason": d.drop_reason}
            for d in report.decisions if d.drop_reason is not None
        ],
    }
    with open(path + ".report.json", "w", encoding="utf-8") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")


def load_manifest(path):
    """Read a JSON manifest of candidate groups.

    Layout: a list of groups, each ``{"context_id": str, "candidates":
    [{"seed": int, "scene_ref": str, "e_recon": float, "alpha": float}]}``.
    """
    with open(path, "r", encoding="utf-8") as f:
        try:
            raw = json.load(f)
        except json.JSONDecodeError as e:
            raise ValidationError(f"malformed manifest {path}: {e}",
                                  code="bad_manifest")
    if not isinstance(raw, list):
        raise ValidationError(f"manifest {path} must be a list of groups",
                              code="bad_manifest")
    groups = []
    for g in raw:
        try:
            cid = g["context_id"]
            cands = [
                Candidate(cid, int(c["seed"]), str(c["scene_ref"]),
                          float(c["e_recon"]), float(c["alpha"]))
                for c in g["candidates"]
            ]
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError(f"malformed manifest {path}: {e}",
                                  code="bad_manifest")
        groups.append(cands)
    return groups
