"""Finite discrete marginal distributions over per-component cost supports.

Every cost component ("action") takes values on a small, strictly positive,
strictly increasing grid of support points.  The data for an action is a
vector of observations drawn from that grid; observation counts may differ
across actions, which is the whole point of the library.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Support",
    "Marginal",
    "DataSet",
    "empirical_from_samples",
    "kl_divergence",
    "mean",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.asarray(a, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Support:
    """Ordered, strictly positive cost grid for one action."""

    points: np.ndarray

    def __post_init__(self):
        pts = _readonly(self.points)
        if pts.ndim != 1 or pts.size < 1:
            raise ValueError("support must be a nonempty 1-d array")
        if not np.all(pts > 0.0):
            raise ValueError("support points must be strictly positive")
        if pts.size > 1 and not np.all(np.diff(pts) > 0.0):
            raise ValueError("support points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @property
    def size(self) -> int:
        return int(self.points.size)

    @property
    def max(self) -> float:
        return float(self.points[-1])

    @classmethod
    def integers(cls, d: int) -> "Support":
        """The grid {1, ..., d} used throughout the experiments."""
        if d < 1:
            raise ValueError("d must be >= 1")
        return cls(np.arange(1, d + 1, dtype=float))

    def same_as(self, other: "Support") -> bool:
        return self.points.shape == other.points.shape and bool(
            np.array_equal(self.points, other.points)
        )


@dataclass(frozen=True)
class Marginal:
    """A pmf over a :class:`Support`."""

    support: Support
    probs: np.ndarray

    def __post_init__(self):
        p = _readonly(self.probs)
        if p.shape != self.support.points.shape:
            raise ValueError("probs length must match support size")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(float(np.sum(p)) - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {float(np.sum(p))!r}, not 1")
        object.__setattr__(self, "probs", p)

    def mean(self) -> float:
        return float(np.dot(self.support.points, self.probs))


def mean(m: Marginal) -> float:
    """Expected cost under ``m``."""
    return m.mean()


def empirical_from_samples(samples, support: Support) -> Marginal:
    """Frequency pmf of ``samples`` on ``support``.

    Raises if any sample is not a support point.  The last observed support
    point absorbs the float rounding so the pmf sums to exactly 1.0.
    """
    obs = np.asarray(samples, dtype=float)
    if obs.ndim != 1 or obs.size == 0:
        raise ValueError("samples must be a nonempty 1-d array")
    idx = np.searchsorted(support.points, obs)
    bad = (idx >= support.size) | (support.points[np.minimum(idx, support.size - 1)] != obs)
    if np.any(bad):
        offending = float(obs[np.argmax(bad)])
        raise ValueError(f"sample {offending!r} is not a support point")
    counts = np.bincount(idx, minlength=support.size).astype(float)
    probs = counts / obs.size
    observed = np.flatnonzero(counts)
    _absorb_rounding(probs, 1.0, int(observed[np.argmin(probs[observed])]))
    return Marginal(support, probs)


def _absorb_rounding(probs: np.ndarray, target: float, index: int) -> None:
    """Adjust ``probs[index]`` until math.fsum(probs) equals ``target``.

    fsum computes the exact sum rounded once, so it is monotone in any
    single entry; stepping an entry whose ulp is finer than the total's
    walks the rounded sum through every representable value, so bisection
    reaches the target exactly.  Callers pass the index of the smallest
    positive entry for exactly that reason; the adjustment stays within a
    few of its ulps.
    """

    def total(t: float) -> float:
        probs[index] = t
        return math.fsum(probs)

    base = probs[index]
    current = total(base)
    if current == target:
        return
    pad = 4.0 * max(abs(target - current), np.finfo(float).eps * max(abs(base), 1.0))
    lo, hi = base - pad, base + pad
    while total(lo) > target:
        lo -= pad
        pad *= 2.0
    while total(hi) < target:
        hi += pad
        pad *= 2.0
    while True:
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        got = total(mid)
        if got < target:
            lo = mid
        elif got > target:
            hi = mid
        else:
            return
    for candidate in (lo, hi):
        if total(candidate) == target:
            return
    probs[index] = base  # no exact hit reachable; keep the unadjusted value


def kl_divergence(p: Marginal, q: Marginal) -> float:
    """Relative entropy D(p || q) with the 0 ln 0 = 0 and ln(x/0) = inf conventions."""
    if not p.support.same_as(q.support):
        raise ValueError("marginals must share the same support")
    pa, qa = p.probs, q.probs
    active = pa > 0.0
    if np.any(qa[active] == 0.0):
        return float("inf")
    return float(np.sum(pa[active] * np.log(pa[active] / qa[active])))


@dataclass(frozen=True)
class DataSet:
    """Per-action observation vectors of possibly different lengths."""

    supports: tuple
    samples: tuple = field(repr=False)

    def __post_init__(self):
        if len(self.supports) != len(self.samples):
            raise ValueError("one sample vector per support is required")
        if len(self.supports) == 0:
            raise ValueError("data set must cover at least one action")
        frozen = []
        for a, (sup, obs) in enumerate(zip(self.supports, self.samples)):
            arr = _readonly(obs)
            if arr.ndim != 1 or arr.size < 1:
                raise ValueError(f"action {a}: at least one observation required")
            if not np.all(np.isin(arr, sup.points)):
                off = arr[~np.isin(arr, sup.points)][0]
                raise ValueError(f"action {a}: observation {float(off)!r} outside support")
            frozen.append(arr)
        object.__setattr__(self, "samples", tuple(frozen))
        object.__setattr__(self, "supports", tuple(self.supports))

    @property
    def num_actions(self) -> int:
        return len(self.samples)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([s.size for s in self.samples], dtype=int)

    @property
    def t_min(self) -> int:
        return int(self.sizes.min())

    def empirical(self, action: int) -> Marginal:
        return empirical_from_samples(self.samples[action], self.supports[action])

    def empiricals(self) -> list:
        return [self.empirical(a) for a in range(self.num_actions)]
