"""Experiment configuration: colony size, candidate nests, qualities, seed."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

ALGORITHMS = ("optimal", "simple")

# Constants the published analyses instantiate the nest-count regime with.
REGIME_C = 1
REGIME_D = 64


class ConfigError(ValueError):
    pass


def default_max_rounds(n: int, k: int) -> int:
    """Generous round cap: hitting it indicates a bug, not bad luck."""
    return 200 * k * max(1, math.ceil(math.log2(max(n, 2))))


@dataclass(frozen=True)
class ColonyConfig:
    """One run definition: (n, k, qualities, seed, algorithm, round cap)."""

    n: int
    k: int
    qualities: tuple
    seed: int
    algorithm: str
    max_rounds: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("n must be a positive integer")
        if self.k < 1:
            raise ConfigError("k must be a positive integer")
        object.__setattr__(self, "qualities", tuple(int(q) for q in self.qualities))
        if len(self.qualities) != self.k:
            raise ConfigError(f"need exactly {self.k} qualities, got {len(self.qualities)}")
        if any(q not in (0, 1) for q in self.qualities):
            raise ConfigError("qualities must be 0 or 1")
        if not any(self.qualities):
            raise ConfigError("at least one nest must have quality 1")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 unsigned bits")
        if self.max_rounds == 0:
            object.__setattr__(self, "max_rounds", default_max_rounds(self.n, self.k))
        if self.max_rounds < 1:
            raise ConfigError("max_rounds must be positive")
        limit = analyzed_k_limit(self.algorithm, self.n)
        if self.k > limit:
            warnings.warn(
                f"k={self.k} exceeds the analyzed regime for the {self.algorithm} "
                f"algorithm at n={self.n} (limit ~{limit:.2f}); convergence bounds "
                "are not guaranteed",
                stacklevel=2,
            )

    def quality(self, i: int) -> int:
        """Quality of candidate nest i; the home nest (0) has no quality."""
        if not 1 <= i <= self.k:
            raise ConfigError(f"nest id {i} out of candidate range 1..{self.k}")
        return self.qualities[i - 1]


def analyzed_k_limit(algorithm: str, n: int, c: int = REGIME_C, d: int = REGIME_D) -> float:
    """Largest k the convergence analysis of the given algorithm covers."""
    logn = math.log(max(n, 2))
    if algorithm == "optimal":
        return n / (12 * (c + 1) * logn)
    return math.sqrt(n / (8 * d * d * (c + 6) * logn))


def make_qualities(k: int, pattern: str, rng=None) -> tuple:
    """Build a quality vector from a named pattern.

    Patterns: "one-good" (nest 1 suitable, rest not), "all-good", or
    "random:p" (each nest suitable with probability p, redrawn until at
    least one is).  "random:p" requires an rng.
    """
    if pattern == "one-good":
        return (1,) + (0,) * (k - 1)
    if pattern == "all-good":
        return (1,) * k
    if pattern.startswith("random:"):
        p = float(pattern.split(":", 1)[1])
        if rng is None:
            raise ConfigError("random quality pattern needs an rng")
        while True:
            qs = tuple(int(x) for x in (rng.random(k) < p))
            if any(qs):
                return qs
    # explicit comma-separated vector, e.g. "1,0,1"
    try:
        qs = tuple(int(x) for x in pattern.split(","))
    except ValueError:
        raise ConfigError(f"unknown quality pattern {pattern!r}") from None
    if len(qs) != k:
        raise ConfigError(f"quality vector {pattern!r} does not have length {k}")
    return qs


def load_config_file(path) -> dict:
    """Read a flat key=value config file; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out
