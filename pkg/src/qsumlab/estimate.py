from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass
class Estimate:
    """Numerical result plus the resources spent producing it."""

    value: float
    queries_used: int
    qubits_used: int
    seed: int | None = None
    trace: list = field(default_factory=list)
    info: dict[str, Any] = field(default_factory=dict)


def as_generator(rng) -> tuple[np.random.Generator, int | None]:
    """Accept a Generator, an int seed, or None; return (generator, seed or None)."""
    if isinstance(rng, np.random.Generator):
        return rng, None
    if rng is None:
        raise ValueError("a seed or Generator is required; wall-clock seeding is not allowed")
    seed = int(rng)
    return np.random.default_rng(seed), seed
