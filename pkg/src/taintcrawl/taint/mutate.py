"""Deterministic source-value mutation for the sink check."""

from __future__ import annotations

import hashlib
import math
import random
import string

ALNUM = string.ascii_letters + string.digits


def _rng(value: str, seed: int, trial: int) -> random.Random:
    digest = hashlib.blake2b(f"{seed}\x00{trial}\x00{value}".encode("utf-8"), digest_size=8).digest()
    return random.Random(int.from_bytes(digest, "big"))


def mutation_count(value: str, fraction: float) -> int:
    return max(1, math.ceil(fraction * len(value)))


def mutate(value: str, fraction: float = 0.25, seed: int = 0, trial: int = 0) -> str:
    """Replace a few alphanumeric characters of ``value`` with different ones.

    Non-alphanumerics (including ``# ? & = /``) are kept so URL-shaped values
    stay well formed. The length never changes; a value without alphanumerics
    is returned as is.
    """
    positions = [i for i, ch in enumerate(value) if ch.isascii() and ch.isalnum()]
    if not positions:
        return value
    rng = _rng(value, seed, trial)
    chosen = rng.sample(positions, min(mutation_count(value, fraction), len(positions)))
    chars = list(value)
    for i in sorted(chosen):
        chars[i] = rng.choice([c for c in ALNUM if c != chars[i]])
    return "".join(chars)
