"""Seeded random step functions for property runs."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .schwartz import StepFunction, step_function_to_json


@dataclass(frozen=True)
class CorpusEntry:
    corpus_id: str
    function: StepFunction


def random_step_function(
    rng: np.random.Generator,
    p: int,
    n: int = 1,
    real: bool = False,
    max_cells: int = 256,
    support_range=(-1, 1),
    sparsity: float = 0.3,
) -> StepFunction:
    """A random compactly supported step function with at most ``max_cells`` cells."""
    max_levels = 0
    while p ** ((max_levels + 1) * n) <= max_cells:
        max_levels += 1
    levels = int(rng.integers(1, max_levels + 1)) if max_levels >= 1 else 0
    M = int(rng.integers(support_range[0], support_range[1] + 1))
    shape = (p**levels,) * n
    vals = rng.normal(size=shape)
    if not real:
        vals = vals + 1j * rng.normal(size=shape)
    keep = rng.random(shape) >= sparsity
    keep.flat[int(rng.integers(keep.size))] = True
    return StepFunction(p, n, M, levels - M, np.where(keep, vals, 0))


def make_corpus(
    seed: int,
    count: int,
    primes: Iterable[int] = (2, 3, 5),
    dimensions: Iterable[int] = (1, 2),
    real: bool = False,
    max_cells: int = 256,
) -> list:
    """``count`` functions cycling through the (p, n) pairs; fully determined by ``seed``."""
    rng = np.random.default_rng(seed)
    pairs = [(p, n) for p in primes for n in dimensions]
    out = []
    for i in range(count):
        p, n = pairs[i % len(pairs)]
        f = random_step_function(rng, p, n, real, max_cells)
        out.append(CorpusEntry(f"{seed}-{i}", f))
    return out


def corpus_to_json(entries, seed: Optional[int] = None) -> dict:
    return {
        "seed": seed,
        "functions": [{"id": e.corpus_id, "function": step_function_to_json(e.function)} for e in entries],
    }
