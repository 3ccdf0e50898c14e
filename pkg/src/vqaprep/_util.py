"""Seed derivation and deterministic thread-pool helpers."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

__all__ = ["seed_key", "derive_rng", "parallel_map"]


def seed_key(*parts) -> tuple[int, ...]:
    """Flatten ints and int tuples into one non-negative seed tuple."""
    out: list[int] = []
    for part in parts:
        if isinstance(part, (tuple, list)):
            out.extend(int(x) for x in part)
        else:
            out.append(int(part))
    if any(x < 0 for x in out):
        raise ValueError(f"seed components must be non-negative, got {out}")
    return tuple(out)


def derive_rng(*parts) -> np.random.Generator:
    """Independent generator for a hierarchical seed key.

    Streams for distinct keys are statistically independent, so work items
    can be evaluated in any order (or concurrently) without changing results.
    """
    return np.random.default_rng(np.random.SeedSequence(list(seed_key(*parts))))


def parallel_map(fn: Callable, items: Sequence, threads: int = 1) -> list:
    """Order-preserving map, threaded when ``threads`` > 1."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))
