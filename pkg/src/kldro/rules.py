"""Prediction and prescription rules for the data-driven path problem.

Four rules share one interface: given a data set they produce per-path
predicted losses and the minimizing decision.

* the robust baseline: per-action worst case over a KL ball, then a
  deterministic shortest path (the two-stage decomposition);
* an upper-confidence-bound benchmark from Hoeffding's inequality;
* a joint-ball benchmark on the truncated data set, solved per enumerated
  path ("dro1");
* the baseline re-run on the truncated data set ("dro2").
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graphs import Decision, LayeredGraph, enumerate_paths, path_cost, shortest_path
from .marginals import DataSet
from .marginals import _absorb_rounding
from .radius import AmbiguitySpec, RadiusInputs, radius_best, rate_from_alpha
from .worstcase import minimize_dual, solve_dual

__all__ = [
    "Prescription",
    "JointEmpirical",
    "split_alpha",
    "calibrate_ambiguity",
    "dro_predict",
    "dro_prescribe",
    "hoeffding_prescribe",
    "truncate_dataset",
    "dro1_prescribe",
    "dro2_prescribe",
]


@dataclass(frozen=True)
class Prescription:
    """A decision, the rule's predicted loss at it, and (when the rule
    decomposes per action) the per-arc costs that produced it."""

    decision: Decision
    predicted_loss: float
    arc_costs: np.ndarray | None = None


def split_alpha(alpha: float, sizes) -> np.ndarray:
    """Confidence budget split in inverse ratio with the sample counts.

    alpha_a = (alpha / T_a) / sum_b (1 / T_b); computed with rational
    weights, and the last share absorbs the rounding so the float budget
    sums to exactly ``alpha``.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    sizes = np.asarray(sizes, dtype=int)
    if sizes.ndim != 1 or sizes.size < 1 or np.any(sizes < 1):
        raise ValueError("sizes must be positive integers")
    weights = [Fraction(1, int(t)) for t in sizes]
    total = sum(weights)
    alpha_frac = Fraction(alpha)
    out = np.array([float(alpha_frac * w / total) for w in weights])
    _absorb_rounding(out, alpha, int(np.argmin(out)))
    return out


def calibrate_ambiguity(data: DataSet, alpha: float) -> AmbiguitySpec:
    """Per-action radii: split the budget, then take the best of the three
    finite-sample bounds for each action."""
    sizes = data.sizes
    t_min = data.t_min
    alphas = split_alpha(alpha, sizes)
    rate = rate_from_alpha(alpha, t_min)
    radii = np.empty(data.num_actions)
    labels = []
    for a in range(data.num_actions):
        inputs = RadiusInputs(
            T_a=int(sizes[a]),
            d_a=data.supports[a].size,
            num_actions=data.num_actions,
            T_min=t_min,
            alpha_a=float(alphas[a]),
            rate=rate,
        )
        radii[a], label = radius_best(inputs)
        labels.append(label)
    return AmbiguitySpec(radii, tuple(labels), alpha=alpha, alpha_per_action=alphas)


def _worst_case_costs(data: DataSet, spec: AmbiguitySpec) -> np.ndarray:
    if spec.num_actions != data.num_actions:
        raise ValueError("ambiguity spec must cover every action")
    return np.array(
        [solve_dual(data.empirical(a), float(spec.radii[a])).value for a in range(data.num_actions)]
    )


def dro_predict(x: Decision, data: DataSet, spec: AmbiguitySpec) -> float:
    """Predicted loss of ``x``: sum of per-action worst-case costs on the path."""
    if spec.num_actions != data.num_actions:
        raise ValueError("ambiguity spec must cover every action")
    total = 0.0
    for a in np.flatnonzero(x.incidence):
        total += solve_dual(data.empirical(int(a)), float(spec.radii[a])).value
    return total


def dro_prescribe(data: DataSet, spec: AmbiguitySpec, g: LayeredGraph) -> Prescription:
    """Worst-case costs once per action, then one deterministic shortest path."""
    costs = _worst_case_costs(data, spec)
    decision, value = shortest_path(g, costs)
    return Prescription(decision, value, costs)


def hoeffding_prescribe(
    data: DataSet,
    alpha: float,
    d: int,
    g: LayeredGraph,
    epsilon: float | np.ndarray | None = None,
) -> Prescription:
    """Upper confidence bounds for the means, clipped at the top cost d.

    The per-action slack inverts the Hoeffding tail at the split budget:
    eps_a = (d - 1) sqrt(ln(1/alpha_a) / (2 T_a)).  Passing ``epsilon``
    overrides the calibration with a fixed slack (the plain
    empirical-mean-plus-constant rule is the special case of a shared
    scalar).
    """
    for sup in data.supports:
        if sup.size != d or not np.array_equal(sup.points, np.arange(1, d + 1, dtype=float)):
            raise ValueError("hoeffding rule expects every support to be {1, ..., d}")
    sizes = data.sizes
    if epsilon is None:
        alphas = split_alpha(alpha, sizes)
        eps = (d - 1) * np.sqrt(np.log(1.0 / alphas) / (2.0 * sizes))
    else:
        eps = np.broadcast_to(np.asarray(epsilon, dtype=float), (data.num_actions,))
    means = np.array([data.empirical(a).mean() for a in range(data.num_actions)])
    costs = np.minimum(means + eps, float(d))
    decision, value = shortest_path(g, costs)
    return Prescription(decision, value, costs)


def truncate_dataset(data: DataSet) -> DataSet:
    """Keep the first T_min observations of every action."""
    t_min = data.t_min
    return DataSet(data.supports, tuple(obs[:t_min] for obs in data.samples))


@dataclass(frozen=True)
class JointEmpirical:
    """Distinct observed cost vectors with their frequencies, built from
    sample-index-aligned observations."""

    atoms: np.ndarray  # (k, num_actions)
    probs: np.ndarray

    def __post_init__(self):
        atoms = np.asarray(self.atoms, dtype=float)
        probs = np.asarray(self.probs, dtype=float)
        atoms.setflags(write=False)
        probs.setflags(write=False)
        if atoms.ndim != 2 or probs.shape != (atoms.shape[0],):
            raise ValueError("atoms must be (k, m) with one probability per atom")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise ValueError("atom probabilities must sum to 1")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_dataset(cls, data: DataSet) -> "JointEmpirical":
        t_min = data.t_min
        rows = np.stack([obs[:t_min] for obs in data.samples], axis=1)
        atoms, counts = np.unique(rows, axis=0, return_counts=True)
        probs = counts.astype(float) / t_min
        _absorb_rounding(probs, 1.0, int(np.argmin(probs)))
        return cls(atoms, probs)


def _joint_ball_radius(t_min: int, d: int, num_actions: int, alpha: float) -> tuple[float, str]:
    # One ball around the joint empirical: support size d^m, T_min samples,
    # and the whole confidence budget (no union bound over actions).
    inputs = RadiusInputs(
        T_a=t_min,
        d_a=d**num_actions,
        num_actions=1,
        T_min=t_min,
        alpha_a=alpha,
        rate=rate_from_alpha(alpha, t_min),
    )
    return radius_best(inputs)


def _path_dual_value(joint: JointEmpirical, x: Decision, r: float, beta_lower: float) -> float:
    costs = joint.atoms @ x.incidence.astype(float)
    values, inverse = np.unique(costs, return_inverse=True)
    weights = np.bincount(inverse, weights=joint.probs)
    _, value, _ = minimize_dual(values, weights, r, beta_lower=beta_lower)
    return value


def dro1_prescribe(
    data: DataSet,
    alpha: float,
    d: int,
    g: LayeredGraph,
    cap: int = 100_000,
    radius_override: float | None = None,
) -> Prescription:
    """Joint-ball rule on the truncated data: enumerate paths, solve the
    scalar dual per path with beta bounded below by d * (path length).

    At radius zero the dual value degenerates to the joint sample-average
    path cost, computed through the per-arc decomposition so it matches the
    shortest-path relaxation bit for bit; exact value ties are broken the
    same way the forward pass breaks them (sink-side node order).
    """
    truncated = truncate_dataset(data)
    joint = JointEmpirical.from_dataset(truncated)
    if radius_override is not None:
        r = float(radius_override)
    else:
        r, _ = _joint_ball_radius(truncated.t_min, d, data.num_actions, alpha)
    means = None
    if r == 0.0:
        means = np.array([truncated.empirical(a).mean() for a in range(truncated.num_actions)])
    best: tuple[float, tuple, Decision] | None = None
    for x in enumerate_paths(g, cap=cap):
        if means is not None:
            value = path_cost(x, means)
        else:
            beta_lower = float(d) * float(np.sum(x.incidence))
            value = _path_dual_value(joint, x, r, beta_lower)
        key = (value, tuple(reversed(x.nodes)))
        if best is None or key < (best[0], best[1]):
            best = (value, key[1], x)
    value, _, decision = best
    return Prescription(decision, value, None)


def dro2_prescribe(
    data: DataSet,
    alpha: float,
    g: LayeredGraph,
    radius_override: float | None = None,
) -> Prescription:
    """Baseline rule on the truncated data, radii recalibrated at T_min."""
    truncated = truncate_dataset(data)
    if radius_override is not None:
        spec = AmbiguitySpec.manual(np.full(truncated.num_actions, float(radius_override)))
    else:
        spec = calibrate_ambiguity(truncated, alpha)
    return dro_prescribe(truncated, spec, g)
