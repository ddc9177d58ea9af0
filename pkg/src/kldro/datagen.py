"""Nominal cost distributions, heterogeneous sample sizes, and data sets.

Costs live on the integer grid {1, ..., d}.  Nominal marginals are either
shifted binomials (optionally coupled through a joint multinomial) or a
renormalized discretization of a normal density.  Sample counts per action
are drawn uniformly or with a binomial tilt that observes cheap (or
expensive) actions more often.

Randomness comes from numpy's counter-based Philox generator; the
substream for replicate ``i`` of an experiment uses key ``seed XOR i``, so
any replicate can be regenerated in isolation, byte for byte.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import stats

from .graphs import LayeredGraph
from .marginals import DataSet, Marginal, Support

__all__ = [
    "NominalSpec",
    "SampleSizeSpec",
    "substream",
    "random_nominal_spec",
    "nominal_marginals",
    "sample_sizes",
    "draw_dataset",
    "dataset_to_csv",
    "dataset_from_csv",
]

NOMINAL_KINDS = ("shifted-binomial", "multinomial", "discretized-normal")
SIZE_KINDS = ("uniform", "binomial1", "binomial2")


def substream(seed: int, index: int) -> np.random.Generator:
    """Independent deterministic stream: Philox keyed by seed XOR index.

    The seed occupies the high limb of the 128-bit key, so streams never
    collide across (seed, index) pairs with index below 2**64.
    """
    return np.random.Generator(np.random.Philox(key=(int(seed) << 64) ^ int(index)))


@dataclass(frozen=True)
class NominalSpec:
    """Parameters of the data-generating marginals on {1, ..., d}."""

    kind: str
    d: int
    p: np.ndarray | None = None
    mu: np.ndarray | None = None
    sigma: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in NOMINAL_KINDS:
            raise ValueError(f"unknown nominal kind {self.kind!r}")
        if self.d < 1:
            raise ValueError("d must be >= 1")
        if self.kind in ("shifted-binomial", "multinomial"):
            if self.p is None:
                raise ValueError(f"{self.kind} requires success probabilities p")
            p = np.asarray(self.p, dtype=float)
            p.setflags(write=False)
            if np.any(p < 0.0) or np.any(p > 1.0):
                raise ValueError("p must lie in [0, 1]")
            if self.kind == "multinomial" and abs(float(p.sum()) - 1.0) > 1e-9:
                raise ValueError("multinomial p must sum to 1")
            object.__setattr__(self, "p", p)
        else:
            if self.mu is None or self.sigma is None:
                raise ValueError("discretized-normal requires mu and sigma")
            mu = np.asarray(self.mu, dtype=float)
            sigma = np.asarray(self.sigma, dtype=float)
            mu.setflags(write=False)
            sigma.setflags(write=False)
            if np.any(sigma <= 0.0):
                raise ValueError("sigma must be positive")
            if np.any(mu < 1.0) or np.any(mu > self.d):
                raise ValueError("mu must lie in [1, d]")
            object.__setattr__(self, "mu", mu)
            object.__setattr__(self, "sigma", sigma)

    @property
    def num_actions(self) -> int:
        arr = self.p if self.p is not None else self.mu
        return int(arr.size)


@dataclass(frozen=True)
class SampleSizeSpec:
    """How many observations each action gets: T_a in [t_min, t_min + delta]."""

    kind: str
    t_min: int
    delta: int

    def __post_init__(self):
        if self.kind not in SIZE_KINDS:
            raise ValueError(f"unknown sample-size kind {self.kind!r}")
        if self.t_min < 1:
            raise ValueError("t_min must be >= 1")
        if self.delta < 0:
            raise ValueError("delta must be >= 0")

    @property
    def t_max(self) -> int:
        return self.t_min + self.delta


def random_nominal_spec(
    kind: str, num_actions: int, d: int, rng: np.random.Generator, sigma: float | None = None
) -> NominalSpec:
    """Fresh per-instance parameters: p_a ~ U(0,1), mu_a ~ U(1,d)."""
    if kind == "shifted-binomial":
        return NominalSpec(kind, d, p=rng.uniform(0.0, 1.0, num_actions))
    if kind == "multinomial":
        p = rng.uniform(0.0, 1.0, num_actions)
        return NominalSpec(kind, d, p=p / p.sum())
    if kind == "discretized-normal":
        if sigma is None:
            raise ValueError("discretized-normal requires sigma")
        mu = rng.uniform(1.0, float(d), num_actions)
        return NominalSpec(kind, d, mu=mu, sigma=np.full(num_actions, float(sigma)))
    raise ValueError(f"unknown nominal kind {kind!r}")


def _normal_cell_masses(mu: float, sigma: float, d: int) -> np.ndarray:
    coef = 1.0 / (math.sqrt(2.0 * math.pi) * sigma)
    inv2 = 1.0 / (2.0 * sigma * sigma)

    def pdf(x: float) -> float:
        return coef * math.exp(-((x - mu) ** 2) * inv2)

    cells = np.empty(d)
    for i in range(1, d + 1):
        cells[i - 1], _ = integrate.quad(pdf, i - 0.5, i + 0.5, epsabs=1e-12)
    return cells


def nominal_marginals(spec: NominalSpec, graph: LayeredGraph) -> list[Marginal]:
    """One marginal per arc of ``graph`` on the shared support {1, ..., d}."""
    if spec.num_actions != graph.num_arcs:
        raise ValueError(
            f"spec covers {spec.num_actions} actions but the graph has {graph.num_arcs} arcs"
        )
    support = Support.integers(spec.d)
    out = []
    if spec.kind in ("shifted-binomial", "multinomial"):
        ks = np.arange(spec.d)
        for p_a in spec.p:
            probs = stats.binom.pmf(ks, spec.d - 1, p_a)
            out.append(Marginal(support, probs / probs.sum()))
    else:
        for mu_a, sigma_a in zip(spec.mu, spec.sigma):
            cells = _normal_cell_masses(float(mu_a), float(sigma_a), spec.d)
            out.append(Marginal(support, cells / cells.sum()))
    return out


def sample_sizes(
    spec: SampleSizeSpec, nominal: list[Marginal], rng: np.random.Generator
) -> np.ndarray:
    """Realized per-action observation counts, always within [t_min, t_max]."""
    m = len(nominal)
    if spec.kind == "uniform":
        return rng.integers(spec.t_min, spec.t_max + 1, size=m)
    means = np.array([q.mean() for q in nominal])
    lo, hi = float(means.min()), float(means.max())
    if hi - lo == 0.0:
        raise ValueError(f"{spec.kind} sizes need unequal nominal means to normalize")
    share = (means - lo) / (hi - lo)
    if spec.kind == "binomial2":
        share = 1.0 - share
    return spec.t_min + rng.binomial(spec.delta, share)


def draw_dataset(
    nominal: list[Marginal],
    sizes,
    rng: np.random.Generator,
    joint: bool = False,
) -> DataSet:
    """Observation vectors: i.i.d. per action, or prefixes of joint draws.

    With ``joint=True`` the marginals must be the binomial components of a
    multinomial vector; max(T_a) full cost vectors are drawn jointly and
    action ``a`` keeps the first T_a coordinates, preserving the joint
    dependence on the observed prefix.
    """
    sizes = np.asarray(sizes, dtype=int)
    if sizes.size != len(nominal):
        raise ValueError("one sample count per action is required")
    if np.any(sizes < 1):
        raise ValueError("every action needs at least one observation")
    supports = tuple(q.support for q in nominal)
    if not joint:
        samples = tuple(
            q.support.points[rng.choice(q.support.size, size=int(t), p=q.probs)]
            for q, t in zip(nominal, sizes)
        )
        return DataSet(supports, samples)
    d = supports[0].size
    if d == 1:
        samples = tuple(np.ones(int(t)) for t in sizes)
        return DataSet(supports, samples)
    p = np.array([(q.mean() - 1.0) / (d - 1.0) for q in nominal])
    if np.any(p < -1e-9) or abs(float(p.sum()) - 1.0) > 1e-6:
        raise ValueError("joint sampling requires multinomial component marginals")
    p = np.clip(p, 0.0, 1.0)
    counts = rng.multinomial(d - 1, p / p.sum(), size=int(sizes.max()))
    costs = counts.astype(float) + 1.0
    samples = tuple(costs[: int(t), a] for a, t in enumerate(sizes))
    return DataSet(supports, samples)


def dataset_to_csv(data: DataSet) -> str:
    """Long-format dump: action_index, sample_index, cost."""
    buf = io.StringIO()
    buf.write("action_index,sample_index,cost\n")
    for a, obs in enumerate(data.samples):
        for j, c in enumerate(obs):
            buf.write(f"{a},{j},{float(c)!r}\n")
    return buf.getvalue()


def dataset_from_csv(text: str, supports) -> DataSet:
    lines = text.strip().splitlines()
    if lines[0] != "action_index,sample_index,cost":
        raise ValueError("unexpected CSV header")
    per_action: dict[int, list] = {}
    for line in lines[1:]:
        a_s, j_s, c_s = line.split(",")
        per_action.setdefault(int(a_s), []).append((int(j_s), float(c_s)))
    samples = []
    for a in range(len(supports)):
        rows = sorted(per_action.get(a, []))
        samples.append(np.array([c for _, c in rows]))
    return DataSet(tuple(supports), tuple(samples))
