"""Heavy-tailed entry laws, their quantile normalization and RNG streams.

Laws are symmetric with a power tail P(|x| >= u) ~ (scale/u)^alpha, so the
matrix normalization a_N = inf{u : P(|x| >= u) <= 1/N} is an exact quantile.
Randomness comes from counter-based Philox streams keyed by (master_seed,
stream_id), which makes parallel Monte Carlo reproducible regardless of
thread schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

__all__ = [
    "StableTailLaw",
    "RngStreamSpec",
    "normalizer_a_N",
    "sample_entry",
    "sample_entries",
]

_FAMILIES = ("symmetric-pareto", "symmetric-alpha-stable")


@dataclass(frozen=True)
class StableTailLaw:
    """Symmetric law with tail index alpha in (0, 2).

    symmetric-pareto:        P(|x| >= u) = min(1, (scale/u)^alpha)
    symmetric-alpha-stable:  characteristic function exp(-scale^alpha |t|^alpha)
    """

    alpha: float
    family: str = "symmetric-pareto"
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha}")
        if self.family not in _FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.scale <= 0:
            raise ValueError("scale must be positive")

    def tail(self, u: float) -> float:
        """P(|x| >= u)."""
        if u <= 0:
            return 1.0
        if self.family == "symmetric-pareto":
            return min(1.0, (self.scale / u) ** self.alpha)
        return 2.0 * stats.levy_stable.sf(u / self.scale, self.alpha, 0.0)


@dataclass(frozen=True)
class RngStreamSpec:
    """Key of a counter-based random stream.

    Distinct stream_ids give independent substreams; the same pair always
    reproduces byte-identical draws.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        bits = np.random.Philox(key=[self.master_seed & 0xFFFFFFFFFFFFFFFF,
                                     self.stream_id & 0xFFFFFFFFFFFFFFFF])
        return np.random.Generator(bits)

    def child(self, stream_id: int) -> "RngStreamSpec":
        return RngStreamSpec(self.master_seed, stream_id)


def normalizer_a_N(law: StableTailLaw, N: int) -> float:
    """Quantile normalization a_N = inf{u : P(|x| >= u) <= 1/N}."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if law.family == "symmetric-pareto":
        # (scale/u)^alpha = 1/N  =>  u = scale * N^(1/alpha)
        return law.scale * N ** (1.0 / law.alpha)
    target = 1.0 / N
    if law.tail(law.scale) <= target:
        lo, hi = 1e-12 * law.scale, law.scale
    else:
        lo, hi = law.scale, law.scale
        while law.tail(hi) > target:
            hi *= 2.0
    return optimize.brentq(lambda u: law.tail(u) - target, lo, hi, xtol=1e-12)


def _pareto_transform(law: StableTailLaw, u: np.ndarray, sign: np.ndarray):
    return sign * law.scale * u ** (-1.0 / law.alpha)


def _cms_transform(law: StableTailLaw, theta: np.ndarray, expo: np.ndarray):
    """Chambers-Mallows-Stuck map for the symmetric stable law.

    theta is uniform on (-pi/2, pi/2) and expo standard exponential.
    """
    al = law.alpha
    if al == 1.0:
        return law.scale * np.tan(theta)
    x = (np.sin(al * theta) / np.cos(theta) ** (1.0 / al)
         * (np.cos((1.0 - al) * theta) / expo) ** ((1.0 - al) / al))
    return law.scale * x


def sample_entries(law: StableTailLaw, rng: np.random.Generator, size) -> np.ndarray:
    """Draw an array of i.i.d. entries from the law."""
    if law.family == "symmetric-pareto":
        u = rng.random(size)
        u = np.where(u == 0.0, 1.0, u)  # avoid the measure-zero infinity
        sign = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return _pareto_transform(law, u, sign)
    theta = (rng.random(size) - 0.5) * math.pi
    expo = rng.standard_exponential(size)
    return _cms_transform(law, theta, expo)


def sample_entry(law: StableTailLaw, rng: np.random.Generator) -> float:
    return float(sample_entries(law, rng, ()))
