"""Pulse sequences applied to the qubit, encoded as the switching function c(t).

c(t) starts at +1 and flips sign at every pi pulse. Its running integral is
what couples the sequence into the bath dynamics: a spin echo has zero
integral over the full window (static couplings cancel), a free induction
decay integrates to the full duration.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PulseProtocol",
    "ExperimentSequence",
    "switching_value",
    "flip_integral",
    "flip_integral_nodes",
    "segments",
    "make_sequence",
]


@dataclass(frozen=True)
class PulseProtocol:
    """A window of duration `duration` with instantaneous pi pulses at flip_times."""

    duration: float
    flip_times: tuple[float, ...] = ()
    kind: str = "custom"

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be >= 0")
        flips = tuple(float(t) for t in self.flip_times)
        object.__setattr__(self, "flip_times", flips)
        if any(not 0.0 < t < self.duration for t in flips):
            raise ValueError("flip times must lie strictly inside (0, duration)")
        if any(b <= a for a, b in zip(flips, flips[1:])):
            raise ValueError("flip times must be strictly increasing")

    @classmethod
    def fid(cls, duration: float) -> "PulseProtocol":
        return cls(duration=duration, flip_times=(), kind="FID")

    @classmethod
    def se(cls, duration: float) -> "PulseProtocol":
        if duration == 0:
            return cls(duration=0.0, flip_times=(), kind="SE")
        return cls(duration=duration, flip_times=(duration / 2,), kind="SE")

    @classmethod
    def cpmg(cls, n_pulses: int, duration: float) -> "PulseProtocol":
        if n_pulses < 1:
            raise ValueError("CPMG needs at least one pulse")
        if duration == 0:
            return cls(duration=0.0, flip_times=(), kind=f"CPMG-{n_pulses}")
        flips = tuple((2 * j - 1) * duration / (2 * n_pulses)
                      for j in range(1, n_pulses + 1))
        return cls(duration=duration, flip_times=flips, kind=f"CPMG-{n_pulses}")

    @classmethod
    def from_name(cls, name: str, duration: float) -> "PulseProtocol":
        label = name.strip().upper()
        if label == "FID":
            return cls.fid(duration)
        if label == "SE":
            return cls.se(duration)
        if label.startswith("CPMG-"):
            return cls.cpmg(int(label.split("-", 1)[1]), duration)
        raise ValueError(f"unknown protocol kind {name!r}")


@dataclass(frozen=True)
class ExperimentSequence:
    """Outer protocol for both measurement windows plus the intermediate one."""

    outer: PulseProtocol
    intermediate: PulseProtocol


def make_sequence(outer_kind: str, intermediate_kind: str,
                  t_M: float, t_I: float) -> ExperimentSequence:
    return ExperimentSequence(outer=PulseProtocol.from_name(outer_kind, t_M),
                              intermediate=PulseProtocol.from_name(intermediate_kind, t_I))


def _check_range(protocol: PulseProtocol, t: float):
    if not 0.0 <= t <= protocol.duration:
        raise ValueError(f"t={t!r} outside [0, {protocol.duration!r}]")


def switching_value(protocol: PulseProtocol, t: float) -> int:
    """c(t) = +-1; +1 before the first flip, sign alternating at each flip.

    At a flip time the post-flip value is returned.
    """
    _check_range(protocol, t)
    n_flips = sum(1 for f in protocol.flip_times if f <= t)
    return 1 if n_flips % 2 == 0 else -1


def segments(protocol: PulseProtocol):
    """(start, end, sign) pieces of c over [0, duration]."""
    edges = (0.0, *protocol.flip_times, protocol.duration)
    return [(edges[i], edges[i + 1], 1 if i % 2 == 0 else -1)
            for i in range(len(edges) - 1)]


def flip_integral(protocol: PulseProtocol, t: float) -> float:
    """Exact integral of c from 0 to t (piecewise linear, slope +-1)."""
    _check_range(protocol, t)
    total = 0.0
    for a, b, sign in segments(protocol):
        if t <= a:
            break
        total += sign * (min(t, b) - a)
    return total


def flip_integral_nodes(protocol: PulseProtocol, ts: np.ndarray) -> np.ndarray:
    """flip_integral evaluated on an array of times inside [0, duration]."""
    ts = np.asarray(ts, dtype=float)
    if ts.size and (ts.min() < 0 or ts.max() > protocol.duration):
        raise ValueError("times outside [0, duration]")
    out = np.zeros_like(ts)
    for a, b, sign in segments(protocol):
        # clip(ts, a, b) - a is the overlap of [0, t] with the segment
        out += sign * (np.clip(ts, a, b) - a)
    return out
