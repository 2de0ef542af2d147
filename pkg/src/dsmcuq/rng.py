"""Named, reproducible random substreams.

One master seed fans out into independent counter-based streams, one per
consumer, so the draws one consumer makes never shift another consumer's
sequence. That decoupling is what lets a recorded run be replayed at a
different expansion order while consuming identical randomness.

Stream order is fixed and part of the reproducibility contract:
    0 sampling   initial particle draws
    1 sround     stochastic rounding of the collision count
    2 pairing    the per-step permutation that selects disjoint pairs
    3 angles     per-pair scattering angles theta (pair order)
    4 rejection  per-pair acceptance draws xi (pair order; hard-sphere engines)
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

STREAM_NAMES = ("sampling", "sround", "pairing", "angles", "rejection")


@dataclass
class RngStreams:
    seed: int
    sampling: np.random.Generator
    sround: np.random.Generator
    pairing: np.random.Generator
    angles: np.random.Generator
    rejection: np.random.Generator

    def describe(self) -> str:
        return " ".join(f"{name}:{i}" for i, name in enumerate(STREAM_NAMES))


def make_streams(seed: int) -> RngStreams:
    """Spawn the five named substreams from one master seed."""
    children = np.random.SeedSequence(seed).spawn(len(STREAM_NAMES))
    gens = [np.random.Generator(np.random.Philox(c)) for c in children]
    return RngStreams(seed, *gens)
