"""Deterministic stream derivation for reproducible, schedule-independent sampling.

Every random draw in the package comes from a Generator obtained through
``substream``. A stream is addressed by the run seed plus an integer path,
so the stream feeding cell k is a pure function of (seed, domain, k) and
does not depend on how work was ordered or split across threads. Philox is
counter-based, which is what makes the spawn-key derivation cheap and
collision-free.

Domains keep unrelated uses of the same seed apart: per-cell mechanism
noise, whole-table draws (the multinomial sampler consumes one stream for
the entire table), and audit trials.
"""

from __future__ import annotations

import numpy as np

# Path prefixes for the three kinds of consumers. Distinct leading
# integers guarantee a cell stream can never collide with an audit stream
# derived from the same seed.
DOMAIN_CELL = 0
DOMAIN_TABLE = 1
DOMAIN_AUDIT = 2


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the Generator at ``path`` under ``seed``.

    Equal (seed, path) always yields an identical stream; any difference
    in either yields statistically independent streams.
    """
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))


def cell_stream(seed: int, index: int) -> np.random.Generator:
    """Stream used for independent per-cell noise at flat cell ``index``."""
    return substream(seed, DOMAIN_CELL, index)


def table_stream(seed: int) -> np.random.Generator:
    """Stream used when a mechanism draws the whole table jointly."""
    return substream(seed, DOMAIN_TABLE)


def audit_stream(seed: int, trial_block: int = 0) -> np.random.Generator:
    """Stream used for Monte Carlo audit trials."""
    return substream(seed, DOMAIN_AUDIT, trial_block)
