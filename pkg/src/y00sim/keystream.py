"""Seed keys and their expansion into M-ary running keys.

The pseudo-random expander is a Fibonacci linear feedback shift
register over GF(2).  A register state is the tuple of its next
``degree`` output bits, index 0 leaving first.  One step emits
``state[0]`` and shifts in the XOR of the tapped bits, so a tap set
``{t1, t2, ...}`` realizes the feedback polynomial
``x^degree + x^(degree-t1) + x^(degree-t2) + ... + 1`` implicitly
through the recurrence ``o[i+degree] = o[i+degree-t1] ^ o[i+degree-t2] ^ ...``.

Running-key blocks are packed from the bit stream most significant bit
first, ``ceil(log2(M))`` bits per block, so outputs are bit-exact and
reproducible across implementations.  Block extraction is unbiased
only for power-of-two M; modular folding onto other alphabets is
available behind an explicit opt-in because it skews small block
values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Tap sets giving maximal period 2^degree - 1 (one primitive
# polynomial per degree, from the standard Fibonacci LFSR tables).
PRIMITIVE_TAPS = {
    2: (2, 1),
    3: (3, 2),
    4: (4, 3),
    5: (5, 3),
    6: (6, 5),
    7: (7, 6),
    8: (8, 6, 5, 4),
    10: (10, 7),
    12: (12, 11, 10, 4),
    16: (16, 14, 13, 11),
    20: (20, 17),
}

DEFAULT_DEGREE = 16


@dataclass(frozen=True)
class LfsrConfig:
    """Register length and tap positions (1-based, 1..degree)."""

    degree: int
    taps: tuple[int, ...]

    def __post_init__(self):
        if not 2 <= self.degree <= 64:
            raise ConfigError(f"LFSR degree must be in [2, 64], got {self.degree}")
        taps = tuple(sorted(set(int(t) for t in self.taps), reverse=True))
        if not taps:
            raise ConfigError("LFSR tap set must be nonempty")
        if taps[0] > self.degree or taps[-1] < 1:
            raise ConfigError(f"taps {taps} outside 1..{self.degree}")
        object.__setattr__(self, "taps", taps)

    @classmethod
    def default(cls, degree: int = DEFAULT_DEGREE) -> "LfsrConfig":
        if degree not in PRIMITIVE_TAPS:
            raise ConfigError(
                f"no built-in primitive tap set for degree {degree}; "
                f"available: {sorted(PRIMITIVE_TAPS)}"
            )
        return cls(degree, PRIMITIVE_TAPS[degree])


@dataclass(frozen=True)
class SeedKey:
    """Secret register fill; ``bits[0]`` is the first bit emitted."""

    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) < 2:
            raise ConfigError("seed must hold at least 2 bits")
        if any(b not in (0, 1) for b in bits):
            raise ConfigError("seed bits must be 0 or 1")
        if not any(bits):
            raise ConfigError("all-zero seed is a fixed point of the feedback")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_int(cls, value: int, degree: int) -> "SeedKey":
        if not 0 < value < (1 << degree):
            raise ConfigError(f"seed value {value} not in [1, 2^{degree}-1]")
        return cls(tuple((value >> (degree - 1 - i)) & 1 for i in range(degree)))

    @classmethod
    def from_hex(cls, text: str, degree: int) -> "SeedKey":
        """Parse an MSB-first hex string into a ``degree``-bit seed."""
        try:
            value = int(text, 16)
        except ValueError as exc:
            raise ConfigError(f"seed {text!r} is not a hex string") from exc
        return cls.from_int(value, degree)

    def to_int(self) -> int:
        """MSB-first integer value, the canonical ordering of seeds."""
        value = 0
        for b in self.bits:
            value = (value << 1) | b
        return value


@dataclass(frozen=True)
class RunningKey:
    """Expanded key: one block per transmitted bit, each in 0..m-1."""

    blocks: tuple[int, ...]
    m: int

    def __post_init__(self):
        if any(not 0 <= b < self.m for b in self.blocks):
            raise ConfigError("running-key block outside 0..m-1")


def lfsr_step(state: tuple[int, ...], cfg: LfsrConfig) -> tuple[int, tuple[int, ...]]:
    """Advance one step; returns (output bit, next state).

    The state must be a nonzero bit tuple of length ``cfg.degree``.
    """
    d = cfg.degree
    if len(state) != d:
        raise ConfigError(f"state length {len(state)} != degree {d}")
    if not any(state):
        raise ConfigError("all-zero LFSR state")
    out = state[0]
    fb = 0
    for t in cfg.taps:
        fb ^= state[d - t]
    return out, state[1:] + (fb,)


def _step_register(reg: int, d: int, shifts: tuple[int, ...]) -> tuple[int, int]:
    # Integer register: bit i (LSB = 0) is the output i steps ahead.
    out = reg & 1
    fb = 0
    for sh in shifts:
        fb ^= (reg >> sh) & 1
    return out, (reg >> 1) | (fb << (d - 1))


def bit_stream(seed: SeedKey, cfg: LfsrConfig, nbits: int) -> np.ndarray:
    """First ``nbits`` output bits as a uint8 array.

    The stream is periodic in the register state; once the state
    returns to the seed the collected cycle is tiled, which keeps long
    expansions cheap.
    """
    d = cfg.degree
    if len(seed.bits) != d:
        raise ConfigError(f"seed length {len(seed.bits)} != degree {d}")
    if nbits < 0:
        raise ConfigError("nbits must be >= 0")
    shifts = tuple(d - t for t in cfg.taps)
    reg0 = 0
    for i, b in enumerate(seed.bits):
        reg0 |= b << i
    out: list[int] = []
    reg = reg0
    while len(out) < nbits:
        bit, reg = _step_register(reg, d, shifts)
        out.append(bit)
        if reg == reg0:
            break
    if len(out) >= nbits:
        return np.array(out[:nbits], dtype=np.uint8)
    cycle = np.array(out, dtype=np.uint8)
    reps = -(-nbits // len(cycle))
    return np.tile(cycle, reps)[:nbits]


def bulk_bit_streams(seeds: np.ndarray, cfg: LfsrConfig, nbits: int) -> np.ndarray:
    """Output bits for many seeds at once, shape (len(seeds), nbits).

    Seeds are MSB-first integer values.  Used by exhaustive key
    searches, where stepping each register in Python would dominate.
    """
    d = cfg.degree
    seeds = np.asarray(seeds, dtype=np.uint64)
    if np.any(seeds == 0) or np.any(seeds >> d != 0):
        raise ConfigError("seed values must be in [1, 2^degree - 1]")
    # Bit-reverse into the integer-register convention.
    regs = np.zeros_like(seeds)
    for i in range(d):
        regs |= ((seeds >> np.uint64(d - 1 - i)) & np.uint64(1)) << np.uint64(i)
    shifts = tuple(d - t for t in cfg.taps)
    bits = np.empty((len(seeds), nbits), dtype=np.uint8)
    one = np.uint64(1)
    for col in range(nbits):
        bits[:, col] = (regs & one).astype(np.uint8)
        fb = np.zeros_like(regs)
        for sh in shifts:
            fb ^= (regs >> np.uint64(sh)) & one
        regs = (regs >> one) | (fb << np.uint64(d - 1))
    return bits


def expand_key(
    seed: SeedKey, cfg: LfsrConfig, n: int, m: int, fold: bool = False
) -> RunningKey:
    """Expand a seed into ``n`` running-key blocks over 0..m-1.

    Consumes ``ceil(log2(m))`` stream bits per block, MSB first.  For
    non power-of-two ``m`` the packed value is reduced mod m, which is
    biased toward small blocks; that path is refused unless ``fold``
    is set.
    """
    if n < 1:
        raise ConfigError("block count n must be >= 1")
    if m < 1:
        raise ConfigError("basis count m must be >= 1")
    power_of_two = m & (m - 1) == 0
    if not power_of_two and not fold:
        raise ConfigError(
            f"m={m} is not a power of two; pass fold=True to accept the "
            "biased mod-m reduction"
        )
    w = max(1, (m - 1).bit_length()) if m > 1 else 0
    if w == 0:
        return RunningKey(blocks=(0,) * n, m=m)
    bits = bit_stream(seed, cfg, n * w).reshape(n, w).astype(np.int64)
    weights = 1 << np.arange(w - 1, -1, -1, dtype=np.int64)
    values = bits @ weights
    if not power_of_two:
        values = values % m
    return RunningKey(blocks=tuple(int(v) for v in values), m=m)
