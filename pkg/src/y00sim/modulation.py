"""Mapping of (running-key block, data bit) pairs to phase points.

A basis count M defines 2M constellation points at angles k*pi/M.
Key block k together with data bit r selects the point

    theta(k, r) = (k/M + (r XOR parity(k))) * pi,

so each key value names an antipodal pair and the parity flip
interleaves the logical bit assignment around the circle.  Points are
handled as exact integer indices (angle = index * pi / M) and turned
into radians only where a measurement needs them, which keeps wedge
and decision-boundary arithmetic free of floating-point ties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError


@dataclass(frozen=True)
class ProtocolParams:
    """Signal energy s (mean photon number), basis count m, message length n."""

    s: float
    m: int
    n: int

    def __post_init__(self):
        if not self.s >= 0:
            raise ConfigError(f"mean photon number must be >= 0, got {self.s}")
        if self.m < 1:
            raise ConfigError(f"basis count must be >= 1, got {self.m}")
        if self.n < 1:
            raise ConfigError(f"message length must be >= 1, got {self.n}")


@dataclass(frozen=True)
class CoherentState:
    """Transmitted state: mean photon number and carrier phase in [0, 2pi)."""

    s: float
    phase: float

    def __post_init__(self):
        if not self.s >= 0:
            raise ConfigError("mean photon number must be >= 0")
        object.__setattr__(self, "phase", float(self.phase) % (2.0 * math.pi))


def parity(k: int) -> int:
    """0 for even key blocks, 1 for odd."""
    if k < 0:
        raise ConfigError("key block must be >= 0")
    return k & 1


def constellation_index(k: int, r: int, m: int) -> int:
    """Index in 0..2M-1 of the point carrying bit ``r`` under key ``k``."""
    if not 0 <= k < m:
        raise ConfigError(f"key block {k} outside 0..{m - 1}")
    if r not in (0, 1):
        raise ConfigError(f"data bit must be 0 or 1, got {r}")
    return (k + m * (r ^ (k & 1))) % (2 * m)


def phase_of_index(m_index: int, m: int) -> float:
    return math.pi * m_index / m


def encode(k: int, r: int, params: ProtocolParams) -> CoherentState:
    """Coherent state transmitted for key block ``k`` and plaintext bit ``r``."""
    idx = constellation_index(k, r, params.m)
    return CoherentState(s=params.s, phase=phase_of_index(idx, params.m))


def constellation_bit(m_index: int, m: int) -> int:
    """Data bit carried by the constellation point at ``m_index``.

    Inverse of ``encode`` on the bit: the point at index i was produced
    by key i mod M, and its bit is (i div M) XOR parity(i mod M).
    """
    if not 0 <= m_index < 2 * m:
        raise ConfigError(f"index {m_index} outside 0..{2 * m - 1}")
    return (m_index // m) ^ ((m_index % m) & 1)
