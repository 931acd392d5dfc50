#!/usr/bin/env python3
"""Deterministic scripted camera-motion prompts.

Every prompt opens with the fixed static-scene constraint, then chains
2-3 motion primitives with alternating temporal connectors.  The same
seed always produces the same prompt.
"""

from geopref import batch_prompts, default_vocabulary

vocab = default_vocabulary()
print(f"vocabulary: {len(vocab.translations)} translations, "
      f"{len(vocab.rotations)} rotations, "
      f"{len(vocab.complex_paths)} complex paths\n")

for script in batch_prompts(vocab, n=5, base_seed=42):
    print(f"- {script.full_text}\n")
