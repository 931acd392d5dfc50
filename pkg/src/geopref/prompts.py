"""Deterministic scripted camera-motion prompt generator.

Each prompt prepends a fixed static-scene constraint, then describes a
camera path assembled from 2-3 motion primitives sampled without
replacement from a three-category vocabulary (translations, rotations,
complex paths) and joined with alternating temporal connectors.
The whole prompt is a pure function of (vocabulary, seed).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SceneIOError, ValidationError

STATIC_PREFIX = (
    "A realistic continuation of the reference scene. Everything must "
    "remain completely static: no moving people, no shifting objects, and "
    "no dynamic elements. Only the camera is allowed to move."
)

CAMERA_MOTION_MARKER = "Camera motion: "

CONNECTORS = ("then", "followed by")

DEFAULT_TRANSLATIONS = (
    "push forward into the scene",
    "pull back away from the scene",
    "slide sideways across the room",
    "move laterally along the furniture line",
    "drift across the space",
    "glide toward the room center",
    "shift through the foreground",
    "move diagonally through the space",
)

DEFAULT_ROTATIONS = (
    "pan across the room",
    "pan toward the main subject",
    "scan across the shelves",
    "tilt upward toward the ceiling",
    "tilt downward toward the floor",
    "roll gently to one side",
    "look around the environment",
)

DEFAULT_COMPLEX_PATHS = (
    "orbit around the scene",
    "arc around the center of the room",
    "circle around the main object",
    "swing around the room",
    "pivot around the viewpoint",
)


@dataclass(frozen=True)
class MotionVocabulary:
    translations: tuple
    rotations: tuple
    complex_paths: tuple

    def __post_init__(self):
        for name in ("translations", "rotations", "complex_paths"):
            phrases = getattr(self, name)
            if not phrases:
                raise ValidationError(f"vocabulary category {name!r} is empty")
            object.__setattr__(self, name, tuple(str(p) for p in phrases))
        union = self.union()
        if len(set(union)) != len(union):
            raise ValidationError("vocabulary phrases must be distinct")

    def union(self):
        return self.translations + self.rotations + self.complex_paths


def default_vocabulary():
    return MotionVocabulary(DEFAULT_TRANSLATIONS, DEFAULT_ROTATIONS,
                            DEFAULT_COMPLEX_PATHS)


@dataclass(frozen=True)
class PromptScript:
    segments: tuple
    connectors: tuple
    full_text: str


def join_segments(segments):
    """\"A, then B\" / \"A, then B, followed by C\": connectors alternate,
    starting with \"then\"."""
    segments = list(segments)
    parts = [segments[0]]
    connectors = []
    for i, seg in enumerate(segments[1:]):
        conn = CONNECTORS[i % len(CONNECTORS)]
        connectors.append(conn)
        parts.append(f", {conn} {seg}")
    return "".join(parts), tuple(connectors)


def generate_prompt(vocab: MotionVocabulary, rng_seed: int) -> PromptScript:
    """One scripted prompt, fully determined by the seed.

    Draws n uniformly from {2, 3}, samples n distinct primitives from the
    union of all categories, joins them, and prepends the static prefix
    plus the camera-motion marker.
    """
    pool = vocab.union()
    rng = np.random.default_rng(rng_seed)
    n = int(rng.integers(2, 4))
    if n > len(pool):
        raise ValidationError(
            f"vocabulary has {len(pool)} phrases, cannot sample {n}")
    pick = rng.choice(len(pool), size=n, replace=False)
    segments = tuple(pool[i] for i in pick)
    motion, connectors = join_segments(segments)
    full_text = f"{STATIC_PREFIX} {CAMERA_MOTION_MARKER}{motion}."
    return PromptScript(segments, connectors, full_text)


def batch_prompts(vocab: MotionVocabulary, n: int, base_seed: int):
    """n prompts from consecutive seeds base_seed..base_seed + n - 1."""
    if n < 1:
        raise ValidationError(f"batch size must be >= 1, got {n}")
    return [generate_prompt(vocab, base_seed + i) for i in range(n)]


def load_vocabulary(path):
    """Parse a sectioned text file overriding the default vocabulary.

    Sections are headed by ``[translations]``, ``[rotations]`` and
    ``[complex_paths]``; each non-empty line below a header is a phrase.
    """
    sections = {"translations": [], "rotations": [], "complex_paths": []}
    current = None
    try:
        with open(path, "r", encoding="utf-8") as f:
            lines = f.readlines()
    except OSError as e:
        raise SceneIOError(f"cannot read vocabulary file {path}: {e}",
                           code="missing_file")
    for n, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if name not in sections:
                raise ValidationError(
                    f"{path}:{n}: unknown section {name!r}", code="bad_vocab")
            current = name
        elif current is None:
            raise ValidationError(
                f"{path}:{n}: phrase before any section header", code="bad_vocab")
        else:
            sections[current].append(line)
    return MotionVocabulary(tuple(sections["translations"]),
                            tuple(sections["rotations"]),
                            tuple(sections["complex_paths"]))
