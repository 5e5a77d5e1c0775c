"""Pseudo-random excitation on quantized amplitude grids.

Identification inputs are persistently exciting level sequences: a
multiplicative congruential generator produces uniforms which are floor
quantized onto an amplitude grid.  Everything is deterministic in the seed
so any two runs (or implementations) with the same constants produce
identical series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Minimal-standard multiplicative generator constants.
MINSTD_MULTIPLIER = 16807
MINSTD_MODULUS = 2**31 - 1


@dataclass(frozen=True)
class AmplitudeGrid:
    """Evenly spaced signal levels from ``low`` to ``high`` inclusive."""

    low: float
    high: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"step must be > 0, got {self.step}")
        if self.high <= self.low:
            raise ValueError(f"need high > low, got [{self.low}, {self.high}]")
        span = (self.high - self.low) / self.step
        if abs(span - round(span)) > 1e-9 * max(1.0, abs(span)):
            raise ValueError(
                f"(high - low) = {self.high - self.low} is not a multiple of step {self.step}"
            )

    @property
    def n_levels(self) -> int:
        return int(round((self.high - self.low) / self.step)) + 1

    def levels(self) -> np.ndarray:
        return self.low + self.step * np.arange(self.n_levels)


@dataclass(frozen=True)
class LcgState:
    """State of the recurrence x' = (multiplier * x) mod modulus."""

    state: int
    multiplier: int = MINSTD_MULTIPLIER
    modulus: int = MINSTD_MODULUS

    def __post_init__(self):
        if not 1 <= self.state <= self.modulus - 1:
            raise ValueError(
                f"state must lie in [1, {self.modulus - 1}], got {self.state}"
            )


def lcg_next(s: LcgState) -> tuple[LcgState, float]:
    """Advance the generator one step; returns the new state and a uniform in [0, 1)."""
    nxt = (s.multiplier * s.state) % s.modulus
    return LcgState(nxt, s.multiplier, s.modulus), nxt / s.modulus


def generate_excitation(
    grid: AmplitudeGrid,
    n_samples: int,
    seed: int,
    hold: int = 1,
    multiplier: int = MINSTD_MULTIPLIER,
    modulus: int = MINSTD_MODULUS,
) -> np.ndarray:
    """Draw ``n_samples`` grid levels; each drawn level is held ``hold`` samples.

    A uniform u maps to level floor(u * n_levels), folded into the last
    level at the (unreachable) top edge, so levels are hit uniformly.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if hold < 1:
        raise ValueError(f"hold must be >= 1, got {hold}")
    state = LcgState(seed, multiplier, modulus)  # rejects zero/invalid seeds
    levels = grid.n_levels
    out = np.empty(n_samples)
    k = 0
    while k < n_samples:
        state, u = lcg_next(state)
        value = grid.low + grid.step * min(int(u * levels), levels - 1)
        run = min(hold, n_samples - k)
        out[k:k + run] = value
        k += run
    return out
