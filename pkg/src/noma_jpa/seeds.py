"""Deterministic RNG substream derivation.

Every random quantity in the package is drawn from a substream derived
from one user-supplied 64-bit root seed via numpy's SeedSequence spawn
keys. The derivation rule is fixed and documented so that runs are
bit-reproducible across machines, processes, and worker counts:

    substream(root, domain)                 top-level stream for a purpose
    substream(root, domain, i)              i-th independent child
    substream(root, domain, i, j)           nested child, and so on

Domain codes (stable, never renumber):

    0  DROP      user placement / large-scale fading draws
    1  FRAMES    per-block channel, noise, and symbol draws in the link
                 simulator; block b of a run uses (FRAMES, b)
    2  THEOREM   statistical test harness draws
    3  MISC      everything else (oracle scenario generators, tests)

Simulation jobs take the root seed itself: every scheme and energy point
of one invocation sees the same draws (common random numbers), which
pairs their comparisons without costing any per-run determinism.
"""
from __future__ import annotations

import numpy as np

DROP = 0
FRAMES = 1
THEOREM = 2
MISC = 3

__all__ = ["DROP", "FRAMES", "THEOREM", "MISC", "sequence", "substream"]


def sequence(root_seed: int, *path: int) -> np.random.SeedSequence:
    """SeedSequence for a derivation path rooted at ``root_seed``."""
    if not (0 <= int(root_seed) < 2**64):
        raise ValueError("root seed must fit in an unsigned 64-bit integer")
    return np.random.SeedSequence(int(root_seed), spawn_key=tuple(int(p) for p in path))


def substream(root_seed: int, *path: int) -> np.random.Generator:
    """Generator on the substream identified by (root_seed, *path)."""
    return np.random.default_rng(sequence(root_seed, *path))
